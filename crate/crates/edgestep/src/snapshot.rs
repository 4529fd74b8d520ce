//! Compact graph snapshots: the final state of a run, as consumed by the
//! infection module and written to disk.
//!
//! The on-disk format is a small binary header followed by the raw
//! little-endian endpoint array. Loading validates every structural
//! invariant, so a corrupted or truncated file is reported instead of
//! producing a malformed graph.

use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Result};

const MAGIC: [u8; 4] = *b"ESNP";
const VERSION: u16 = 1;

/// An immutable multigraph given by its endpoint array; entry 2k and 2k+1
/// are the endpoints of edge k, vertex ids are 1-based, and a loop stores
/// its vertex twice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSnapshot {
    time: u64,
    vertex_count: u32,
    endpoints: Vec<u32>,
}

impl GraphSnapshot {
    /// Wraps an endpoint array produced by the generator. Panics when the
    /// handshake invariant or the id range is violated: those indicate a
    /// bug in the caller, not bad input data.
    pub fn new(time: u64, vertex_count: u32, endpoints: Vec<u32>) -> Self {
        assert_eq!(endpoints.len() as u64, 2 * time, "endpoint count must be 2·time");
        assert!(
            endpoints.iter().all(|&v| v >= 1 && v <= vertex_count),
            "endpoint ids must lie in 1..=vertex_count"
        );
        Self {
            time,
            vertex_count,
            endpoints,
        }
    }

    /// Builds a snapshot from an explicit edge list; isolated vertices are
    /// allowed (ids up to `vertex_count` need not appear). Intended for
    /// hand-built fixtures.
    pub fn from_edges(vertex_count: u32, edges: &[(u32, u32)]) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidParameter(
                "a graph needs at least one vertex".into(),
            ));
        }
        let mut endpoints = Vec::with_capacity(2 * edges.len());
        for &(u, v) in edges {
            if u == 0 || v == 0 || u > vertex_count || v > vertex_count {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) outside 1..={vertex_count}"
                )));
            }
            endpoints.extend_from_slice(&[u, v]);
        }
        Ok(Self {
            time: edges.len() as u64,
            vertex_count,
            endpoints,
        })
    }

    /// Number of edges.
    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn endpoints(&self) -> &[u32] {
        &self.endpoints
    }

    /// Edges as endpoint pairs, in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.endpoints.chunks_exact(2).map(|e| (e[0], e[1]))
    }

    /// Degree of every vertex (loops count twice), indexed by vertex − 1.
    pub fn degrees(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.vertex_count as usize];
        for &v in &self.endpoints {
            counts[v as usize - 1] += 1;
        }
        counts
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.time.to_le_bytes())?;
        w.write_all(&self.vertex_count.to_le_bytes())?;
        w.write_all(&(self.endpoints.len() as u64).to_le_bytes())?;
        let mut bytes = Vec::with_capacity(4 * self.endpoints.len());
        for &v in &self.endpoints {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self> {
        fn bad(msg: impl Into<String>) -> Error {
            Error::SnapshotFormat(msg.into())
        }
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(bad("not a graph snapshot (bad magic)"));
        }
        let mut buf2 = [0u8; 2];
        r.read_exact(&mut buf2)?;
        let version = u16::from_le_bytes(buf2);
        if version != VERSION {
            return Err(bad(format!("unsupported snapshot version {version}")));
        }
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf8)?;
        let time = u64::from_le_bytes(buf8);
        let mut buf4 = [0u8; 4];
        r.read_exact(&mut buf4)?;
        let vertex_count = u32::from_le_bytes(buf4);
        r.read_exact(&mut buf8)?;
        let n = u64::from_le_bytes(buf8);
        if n != 2 * time {
            return Err(bad(format!("endpoint count {n} does not equal 2·time")));
        }
        if vertex_count == 0 {
            return Err(bad("snapshot has no vertices"));
        }
        let mut bytes = vec![0u8; (n as usize) * 4];
        r.read_exact(&mut bytes)?;
        let endpoints: Vec<u32> = bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4-byte chunk")))
            .collect();
        if let Some(&v) = endpoints.iter().find(|&&v| v == 0 || v > vertex_count) {
            return Err(bad(format!(
                "endpoint id {v} outside 1..={vertex_count}"
            )));
        }
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(bad("trailing data after endpoint array"));
        }
        Ok(Self {
            time,
            vertex_count,
            endpoints,
        })
    }

    pub fn save_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.save(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::load(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
