//! The graph process itself: degree-proportional attachment with an
//! edge-step.
//!
//! The process starts from `G_1` — one vertex carrying one loop — and at
//! each step `t → t+1` flips a coin with success probability `f(t+1)`:
//!
//! * **vertex-step**: a new vertex joins and attaches to an existing vertex
//!   chosen with probability proportional to its degree;
//! * **edge-step**: two endpoints are drawn independently, each
//!   degree-proportionally, and an edge is added between them. Loops and
//!   parallel edges count.
//!
//! Degrees are tracked incrementally; the maximum degree and its runner-up
//! are maintained in O(1) per step, which the leadership experiments rely
//! on at 10^7-step horizons.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edge_step::EdgeStepFunction;
use crate::rng::replica_rng;
use crate::snapshot::GraphSnapshot;
use crate::{Error, Result};

/// A growing multigraph with degree-proportional sampling.
///
/// Vertices are identified by birth order starting at 1; the initial vertex
/// is 1. Each edge stores its two endpoints consecutively in `endpoints`,
/// so drawing a uniform entry of that array is exactly a degree-proportional
/// draw: a vertex of degree d appears d times (loops contribute their vertex
/// twice).
#[derive(Clone, Debug)]
pub struct Multigraph {
    /// Current step t; equals the number of edges.
    time: u64,
    /// Endpoint pairs: entries 2k and 2k+1 are the endpoints of edge k.
    endpoints: Vec<u32>,
    /// `degrees[v−1]` is the degree of vertex v.
    degrees: Vec<u32>,
    /// `birth_times[v−1]` is the step at which vertex v was added.
    birth_times: Vec<u64>,
    /// A vertex of maximum degree.
    argmax: u32,
    max_degree: u32,
    /// Largest degree among vertices other than `argmax` (0 when the graph
    /// has a single vertex).
    runner_up_degree: u32,
}

impl Multigraph {
    /// The initial graph `G_1`: one vertex with one loop.
    pub fn init() -> Self {
        Self::with_capacity(1)
    }

    /// As [`init`], reserving room for a run of `horizon` steps up front.
    ///
    /// [`init`]: Multigraph::init
    pub fn with_capacity(horizon: u64) -> Self {
        let mut endpoints = Vec::with_capacity(2 * horizon as usize);
        endpoints.extend_from_slice(&[1, 1]);
        let mut degrees = Vec::with_capacity(horizon as usize);
        degrees.push(2);
        let mut birth_times = Vec::with_capacity(horizon as usize);
        birth_times.push(1);
        Self {
            time: 1,
            endpoints,
            degrees,
            birth_times,
            argmax: 1,
            max_degree: 2,
            runner_up_degree: 0,
        }
    }

    /// Rebuilds process state from a stored snapshot. Birth times are
    /// recovered as each vertex's first appearance in the chronological
    /// edge list, which is exact for graphs produced by this process.
    pub fn from_snapshot(snap: &GraphSnapshot) -> Self {
        let n = snap.vertex_count() as usize;
        let endpoints = snap.endpoints().to_vec();
        let mut degrees = vec![0u32; n];
        let mut birth_times = vec![0u64; n];
        for (idx, &v) in endpoints.iter().enumerate() {
            degrees[v as usize - 1] += 1;
            if birth_times[v as usize - 1] == 0 {
                birth_times[v as usize - 1] = idx as u64 / 2 + 1;
            }
        }
        let mut g = Self {
            time: snap.time(),
            endpoints,
            degrees,
            birth_times,
            argmax: 1,
            max_degree: 0,
            runner_up_degree: 0,
        };
        for v in 1..=n as u32 {
            let d = g.degrees[v as usize - 1];
            if d > g.max_degree {
                g.runner_up_degree = g.max_degree;
                g.max_degree = d;
                g.argmax = v;
            } else if d > g.runner_up_degree {
                g.runner_up_degree = d;
            }
        }
        g
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn vertex_count(&self) -> u32 {
        self.degrees.len() as u32
    }

    /// Degree of vertex v at the current time; 0 if v has not been born yet,
    /// matching the convention `d_s(i) ≡ 0` before the birth of i.
    pub fn degree(&self, v: u32) -> u32 {
        self.degrees.get(v as usize - 1).copied().unwrap_or(0)
    }

    /// Birth time τ(v), or `None` if v has not been born.
    pub fn birth_time(&self, v: u32) -> Option<u64> {
        self.birth_times.get(v as usize - 1).copied()
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// A vertex attaining the maximum degree.
    pub fn leader(&self) -> u32 {
        self.argmax
    }

    /// Degree gap between the leader and the best of the rest.
    pub fn leader_gap(&self) -> u32 {
        self.max_degree - self.runner_up_degree
    }

    pub fn endpoints(&self) -> &[u32] {
        &self.endpoints
    }

    /// Edges as endpoint pairs, in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.endpoints.chunks_exact(2).map(|e| (e[0], e[1]))
    }

    /// Draws a vertex with probability degree/(2t): a uniform entry of the
    /// endpoint array.
    pub fn sample_degree_proportional(&self, rng: &mut ChaCha8Rng) -> u32 {
        self.endpoints[rng.random_range(0..self.endpoints.len())]
    }

    /// Advances one step using the coin `Ber(f(t+1))` for the transition
    /// `G_t → G_{t+1}`.
    pub fn step(&mut self, f: &EdgeStepFunction, rng: &mut ChaCha8Rng) {
        if rng.random::<f64>() < f.evaluate(self.time + 1) {
            self.vertex_step(rng);
        } else {
            self.edge_step(rng);
        }
    }

    /// Forced vertex-step: a new vertex attaches to a degree-proportional
    /// target.
    pub fn vertex_step(&mut self, rng: &mut ChaCha8Rng) {
        let target = self.sample_degree_proportional(rng);
        let new = self.vertex_count() + 1;
        self.time += 1;
        self.degrees.push(0);
        self.birth_times.push(self.time);
        self.endpoints.extend_from_slice(&[target, new]);
        self.bump(target);
        self.bump(new);
        debug_assert_eq!(self.endpoints.len() as u64, 2 * self.time);
    }

    /// Forced edge-step: both endpoints drawn independently against the
    /// pre-step graph; drawing the same vertex twice creates a loop.
    pub fn edge_step(&mut self, rng: &mut ChaCha8Rng) {
        let u1 = self.sample_degree_proportional(rng);
        let u2 = self.sample_degree_proportional(rng);
        self.time += 1;
        self.endpoints.extend_from_slice(&[u1, u2]);
        self.bump(u1);
        self.bump(u2);
        debug_assert_eq!(self.endpoints.len() as u64, 2 * self.time);
    }

    /// Increments the degree of v, maintaining the maximum and runner-up.
    /// Correct only because degrees never decrease.
    fn bump(&mut self, v: u32) {
        let d = &mut self.degrees[v as usize - 1];
        *d += 1;
        let d = *d;
        if v == self.argmax {
            self.max_degree = d;
        } else if d > self.max_degree {
            self.runner_up_degree = self.max_degree;
            self.argmax = v;
            self.max_degree = d;
        } else if d > self.runner_up_degree {
            self.runner_up_degree = d;
        }
    }

    /// Recomputes all degrees from the endpoint array. O(edges); intended
    /// for validation, not for per-step use.
    pub fn recount_degrees(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.degrees.len()];
        for &v in &self.endpoints {
            counts[v as usize - 1] += 1;
        }
        counts
    }

    /// Compact edge-list snapshot for the infection module and for disk.
    pub fn to_snapshot(&self) -> GraphSnapshot {
        GraphSnapshot::new(self.time, self.vertex_count(), self.endpoints.clone())
    }
}

/// Configuration of a single process run.
#[derive(Clone, Debug)]
pub struct ProcessConfig {
    pub f: EdgeStepFunction,
    /// Final step T.
    pub horizon: u64,
    /// Master seed; combined with `replica` to derive this run's stream.
    pub seed: u64,
    /// Replica index within a campaign (0 for standalone runs).
    pub replica: u64,
    /// Vertex ids whose degree trajectories are recorded.
    pub tracked_vertices: Vec<u32>,
    /// Record observables every `record_stride` steps; 0 selects the
    /// default `max(1, horizon/10^4)`. Logarithmic checkpoints `⌊T/2^j⌋`
    /// are always recorded on top, so ratio statistics (t vs 2t) are
    /// available regardless of stride.
    pub record_stride: u64,
    /// Additional times to record exactly.
    pub extra_checkpoints: Vec<u64>,
    /// When set, per-step leadership bookkeeping uses this gap threshold.
    pub leadership_gap: Option<u32>,
    /// When set, the degree difference |d(i) − d(j)| is recorded at every
    /// step where either degree jumps.
    pub pair: Option<(u32, u32)>,
}

impl ProcessConfig {
    pub fn new(f: EdgeStepFunction, horizon: u64, seed: u64) -> Self {
        Self {
            f,
            horizon,
            seed,
            replica: 0,
            tracked_vertices: Vec::new(),
            record_stride: 0,
            extra_checkpoints: Vec::new(),
            leadership_gap: None,
            pair: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        let pair_ids = self.pair.map(|(i, j)| [i, j]).unwrap_or([1, 1]);
        if self.tracked_vertices.iter().chain(&pair_ids).any(|&v| v == 0) {
            return Err(Error::InvalidParameter(
                "vertex ids are 1-based; 0 is not a valid tracked vertex".into(),
            ));
        }
        if let Some(&t) = self
            .extra_checkpoints
            .iter()
            .find(|&&t| t < 1 || t > self.horizon)
        {
            return Err(Error::InvalidParameter(format!(
                "extra checkpoint {t} outside 1..={}",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Per-step leadership bookkeeping over a whole run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeadershipStats {
    /// Gap threshold N the violation bookkeeping used.
    pub gap_threshold: u32,
    /// Last step at which the identity of the leader changed (0 = never;
    /// the leader has been the initial vertex throughout).
    pub last_leader_change: u64,
    /// Last step at which the leader's gap to the runner-up was ≤ N
    /// (0 = never).
    pub last_gap_violation: u64,
}

/// Degree-difference observations for a tracked pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub i: u32,
    pub j: u32,
    /// Steps at which d(i) or d(j) jumped.
    pub jump_times: Vec<u64>,
    /// |d(i) − d(j)| immediately after each jump.
    pub jump_values: Vec<u32>,
}

/// Everything a run records. Deterministic given the config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// Recorded step indices, ascending.
    pub times: Vec<u64>,
    /// Tracked vertex ids, ascending; rows of `degrees` are parallel.
    pub tracked: Vec<u32>,
    /// `degrees[k][n]` = degree of `tracked[k]` at `times[n]` (0 before
    /// birth).
    pub degrees: Vec<Vec<u32>>,
    pub max_degree: Vec<u32>,
    /// A maximum-degree vertex at each recorded time.
    pub leader: Vec<u32>,
    /// Gap between the leader and the runner-up at each recorded time.
    pub leader_gap: Vec<u32>,
    pub vertex_count: Vec<u32>,
    /// Realized birth times of the tracked vertices; `None` when the vertex
    /// was not born within the horizon.
    pub tau: Vec<Option<u64>>,
    pub leadership: Option<LeadershipStats>,
    pub pair: Option<PairRecord>,
}

/// Degree-difference series extracted from a record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeDifference {
    pub times: Vec<u64>,
    /// |d(i) − d(j)| at each recorded time.
    pub values: Vec<u32>,
    /// The same difference observed at the jump times of either degree,
    /// present when the run tracked exactly this pair.
    pub jump_times: Option<Vec<u64>>,
    pub jump_values: Option<Vec<u32>>,
}

/// The union of stride multiples, logarithmic checkpoints `⌊horizon/2^j⌋`,
/// the endpoints {1, horizon}, and any extras: sorted and deduplicated.
pub fn recorded_times(horizon: u64, stride: u64, extra: &[u64]) -> Vec<u64> {
    let stride = if stride == 0 {
        (horizon / 10_000).max(1)
    } else {
        stride
    };
    let mut times: Vec<u64> = vec![1, horizon];
    times.extend((1..=horizon / stride).map(|k| k * stride));
    let mut t = horizon;
    while t > 1 {
        t /= 2;
        times.push(t);
    }
    times.extend_from_slice(extra);
    times.sort_unstable();
    times.dedup();
    times
}

/// Runs the process to its horizon, recording at the configured times.
/// Deterministic given the config: the replica's RNG stream is derived from
/// `(seed, replica)`.
pub fn run(config: &ProcessConfig) -> Result<TrajectoryRecord> {
    config.validate()?;
    let mut tracked = config.tracked_vertices.clone();
    if let Some((i, j)) = config.pair {
        tracked.extend_from_slice(&[i, j]);
    }
    tracked.sort_unstable();
    tracked.dedup();

    let times = recorded_times(config.horizon, config.record_stride, &config.extra_checkpoints);
    let mut record = TrajectoryRecord {
        times: Vec::with_capacity(times.len()),
        tracked: tracked.clone(),
        degrees: vec![Vec::with_capacity(times.len()); tracked.len()],
        max_degree: Vec::with_capacity(times.len()),
        leader: Vec::with_capacity(times.len()),
        leader_gap: Vec::with_capacity(times.len()),
        vertex_count: Vec::with_capacity(times.len()),
        tau: vec![None; tracked.len()],
        leadership: config.leadership_gap.map(|n| LeadershipStats {
            gap_threshold: n,
            last_leader_change: 0,
            last_gap_violation: 0,
        }),
        pair: config.pair.map(|(i, j)| PairRecord {
            i,
            j,
            jump_times: Vec::new(),
            jump_values: Vec::new(),
        }),
    };

    let mut rng = replica_rng(config.seed, config.replica);
    let mut g = Multigraph::with_capacity(config.horizon);
    let mut next_record = 0usize;
    let mut prev_leader = g.leader();
    let mut prev_pair_degrees = config.pair.map(|(i, j)| (g.degree(i), g.degree(j)));

    let observe = |g: &Multigraph, record: &mut TrajectoryRecord, next_record: &mut usize| {
        while *next_record < times.len() && times[*next_record] == g.time() {
            record.times.push(g.time());
            for (row, &v) in record.degrees.iter_mut().zip(&tracked) {
                row.push(g.degree(v));
            }
            record.max_degree.push(g.max_degree());
            record.leader.push(g.leader());
            record.leader_gap.push(g.leader_gap());
            record.vertex_count.push(g.vertex_count());
            *next_record += 1;
        }
    };

    observe(&g, &mut record, &mut next_record);
    while g.time() < config.horizon {
        g.step(&config.f, &mut rng);

        if let Some(stats) = record.leadership.as_mut() {
            if g.leader() != prev_leader {
                stats.last_leader_change = g.time();
                prev_leader = g.leader();
            }
            if g.leader_gap() <= stats.gap_threshold {
                stats.last_gap_violation = g.time();
            }
        }
        if let (Some(pair), Some(prev)) = (record.pair.as_mut(), prev_pair_degrees.as_mut()) {
            let now = (g.degree(pair.i), g.degree(pair.j));
            if now != *prev {
                pair.jump_times.push(g.time());
                pair.jump_values.push(now.0.abs_diff(now.1));
                *prev = now;
            }
        }
        observe(&g, &mut record, &mut next_record);
    }

    for (slot, &v) in record.tau.iter_mut().zip(&tracked) {
        *slot = g.birth_time(v);
    }
    Ok(record)
}

/// Degree-difference series for two tracked vertices of a record. The jump
/// subsequence is included when the run tracked exactly this (unordered)
/// pair.
pub fn degree_difference(record: &TrajectoryRecord, i: u32, j: u32) -> Result<DegreeDifference> {
    let row = |v: u32| -> Result<&Vec<u32>> {
        record
            .tracked
            .iter()
            .position(|&t| t == v)
            .map(|k| &record.degrees[k])
            .ok_or(Error::UntrackedVertex(v))
    };
    let di = row(i)?;
    let dj = row(j)?;
    let values = di.iter().zip(dj).map(|(a, b)| a.abs_diff(*b)).collect();
    let (jump_times, jump_values) = match &record.pair {
        Some(p) if (p.i, p.j) == (i, j) || (p.i, p.j) == (j, i) => {
            (Some(p.jump_times.clone()), Some(p.jump_values.clone()))
        }
        _ => (None, None),
    };
    Ok(DegreeDifference {
        times: record.times.clone(),
        values,
        jump_times,
        jump_values,
    })
}

impl TrajectoryRecord {
    /// One row per recorded time: `t,vertex_count,max_degree,leader,gap`
    /// followed by one `d_<i>` column per tracked vertex.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t,vertex_count,max_degree,leader,gap")?;
        for v in &self.tracked {
            write!(w, ",d_{v}")?;
        }
        writeln!(w)?;
        for (n, &t) in self.times.iter().enumerate() {
            write!(
                w,
                "{t},{},{},{},{}",
                self.vertex_count[n], self.max_degree[n], self.leader[n], self.leader_gap[n]
            )?;
            for row in &self.degrees {
                write!(w, ",{}", row[n])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
