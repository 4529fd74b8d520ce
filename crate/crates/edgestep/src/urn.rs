//! A Pólya–Eggenberger urn with immigration, coupled to the degree process.
//!
//! Red balls stand for endpoint slots of a distinguished vertex, blue balls
//! for everything else. At each step, with probability `f(t+1)` an
//! immigration step happens: one Pólya draw (the drawn color's ball is
//! added) followed by one new blue ball — mirroring a vertex-step, where
//! the newcomer attaches to the graph and then carries degree 1 itself.
//! Otherwise two draws are made, each adding a ball of its color —
//! mirroring an edge-step. Both non-immigration draws see the *pre-step*
//! composition, exactly as both endpoints of a new edge are chosen from
//! `G_t` before the edge is added; the sequential variant in which the
//! second draw sees the first added ball is available behind a flag for
//! comparison and defaults off.
//!
//! Started from (red=2, blue=0) at time 1, the red count has exactly the
//! law of `d_t(1)`: red/(red+blue) is the degree share of vertex 1.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::edge_step::EdgeStepFunction;
use crate::normalization::NormalizationTable;
use crate::rng::replica_rng;
use crate::stats;
use crate::{Error, Result};

/// Urn composition at a point in time. A value type: steps consume and
/// return it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct UrnState {
    pub red: u64,
    pub blue: u64,
    pub time: u64,
}

impl UrnState {
    /// Start mirroring vertex 1 in `G_1`: the initial loop gives two red
    /// endpoint slots and nothing else.
    pub fn initial() -> Self {
        UrnState {
            red: 2,
            blue: 0,
            time: 1,
        }
    }

    /// Start mirroring a vertex born at time `t0 ≥ 2`: it enters with
    /// degree 1 (one red ball) among `2·t0` endpoint slots total.
    pub fn vertex_born_at(t0: u64) -> Result<Self> {
        if t0 < 2 {
            return Err(Error::InvalidParameter(
                "vertices born by vertex-step have t0 >= 2; use initial() for vertex 1".into(),
            ));
        }
        Ok(UrnState {
            red: 1,
            blue: 2 * t0 - 1,
            time: t0,
        })
    }

    pub fn new(red: u64, blue: u64, time: u64) -> Result<Self> {
        if red < 1 {
            return Err(Error::InvalidParameter(
                "urn needs at least one red ball".into(),
            ));
        }
        if time < 1 {
            return Err(Error::InvalidParameter("urn time starts at 1".into()));
        }
        Ok(UrnState { red, blue, time })
    }

    pub fn total(&self) -> u64 {
        self.red + self.blue
    }

    /// Red share red/(red+blue).
    pub fn proportion(&self) -> f64 {
        self.red as f64 / self.total() as f64
    }
}

/// Advances the urn one step. `f = None` disables immigration entirely
/// (a pure Pólya urn), used for the color-symmetry checks; otherwise the
/// immigration coin for `time → time+1` is `Ber(f(time+1))`.
pub fn urn_step(
    state: UrnState,
    f: Option<&EdgeStepFunction>,
    sequential_double_draw: bool,
    rng: &mut ChaCha8Rng,
) -> UrnState {
    let UrnState { red, blue, time } = state;
    let total = red + blue;
    let immigration = match f {
        Some(f) => rng.random::<f64>() < f.evaluate(time + 1),
        None => false,
    };
    let (red, blue) = if immigration {
        // One Pólya draw, then the blue immigrant.
        if rng.random_range(0..total) < red {
            (red + 1, blue + 1)
        } else {
            (red, blue + 2)
        }
    } else if sequential_double_draw {
        let first_red = rng.random_range(0..total) < red;
        let (r1, b1) = if first_red { (red + 1, blue) } else { (red, blue + 1) };
        if rng.random_range(0..total + 1) < r1 {
            (r1 + 1, b1)
        } else {
            (r1, b1 + 1)
        }
    } else {
        // Two draws against the pre-step composition.
        let hits = (rng.random_range(0..total) < red) as u64
            + (rng.random_range(0..total) < red) as u64;
        (red + hits, blue + 2 - hits)
    };
    UrnState {
        red,
        blue,
        time: time + 1,
    }
}

/// A replicated urn simulation.
#[derive(Clone, Debug)]
pub struct UrnConfig {
    /// Immigration schedule; `None` runs a pure Pólya urn.
    pub f: Option<EdgeStepFunction>,
    pub start: UrnState,
    /// Final time T.
    pub horizon: u64,
    pub replicas: u64,
    pub master_seed: u64,
    pub sequential_double_draw: bool,
    /// 0 selects `max(1, horizon/10^4)`; logarithmic checkpoints are always
    /// included.
    pub record_stride: u64,
}

/// Cross-replica summary of the red share at each recorded time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UrnTrajectory {
    pub times: Vec<u64>,
    /// Mean of red/(red+blue) across replicas.
    pub mean: Vec<f64>,
    pub q05: Vec<f64>,
    pub q50: Vec<f64>,
    pub q95: Vec<f64>,
    /// Mean of red/φ(t) — the normalization under which the graph degree is
    /// a martingale. Present when a table was supplied.
    pub mean_red_over_phi: Option<Vec<f64>>,
}

/// Runs `replicas` independent urns and summarizes the red share per
/// recorded time. Deterministic given the config; replica r uses the
/// substream `(master_seed, r)`.
pub fn red_proportion_trajectory(
    config: &UrnConfig,
    table: Option<&NormalizationTable>,
) -> Result<UrnTrajectory> {
    if config.horizon < config.start.time {
        return Err(Error::InvalidParameter(format!(
            "horizon {} precedes the start time {}",
            config.horizon, config.start.time
        )));
    }
    if config.replicas == 0 {
        return Err(Error::InvalidParameter("need at least one replica".into()));
    }
    if let Some(table) = table {
        if table.horizon() < config.horizon {
            return Err(Error::OutOfHorizon {
                t: config.horizon,
                horizon: table.horizon(),
            });
        }
    }
    let times: Vec<u64> =
        crate::generator::recorded_times(config.horizon, config.record_stride, &[])
            .into_iter()
            .filter(|&t| t >= config.start.time)
            .collect();

    // proportions[n][r]: red share of replica r at times[n].
    let mut proportions = vec![Vec::with_capacity(config.replicas as usize); times.len()];
    let mut reds = vec![Vec::with_capacity(config.replicas as usize); times.len()];
    for replica in 0..config.replicas {
        let mut rng = replica_rng(config.master_seed, replica);
        let mut state = config.start;
        let mut next = times.partition_point(|&t| t < state.time);
        loop {
            while next < times.len() && times[next] == state.time {
                proportions[next].push(state.proportion());
                reds[next].push(state.red as f64);
                next += 1;
            }
            if state.time >= config.horizon {
                break;
            }
            state = urn_step(
                state,
                config.f.as_ref(),
                config.sequential_double_draw,
                &mut rng,
            );
        }
    }

    let mean_red_over_phi = match table {
        Some(table) => {
            let mut series = Vec::with_capacity(times.len());
            for (n, &t) in times.iter().enumerate() {
                series.push(stats::mean(&reds[n]) / table.phi(t)?);
            }
            Some(series)
        }
        None => None,
    };
    Ok(UrnTrajectory {
        times,
        mean: proportions.iter().map(|c| stats::mean(c)).collect(),
        q05: proportions.iter().map(|c| stats::quantile(c, 0.05)).collect(),
        q50: proportions.iter().map(|c| stats::quantile(c, 0.50)).collect(),
        q95: proportions.iter().map(|c| stats::quantile(c, 0.95)).collect(),
        mean_red_over_phi,
    })
}

impl UrnTrajectory {
    /// One row per recorded time: `t,mean,q05,q50,q95[,mean_red_over_phi]`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t,mean,q05,q50,q95")?;
        if self.mean_red_over_phi.is_some() {
            write!(w, ",mean_red_over_phi")?;
        }
        writeln!(w)?;
        for (n, &t) in self.times.iter().enumerate() {
            write!(
                w,
                "{t},{},{},{},{}",
                self.mean[n], self.q05[n], self.q50[n], self.q95[n]
            )?;
            if let Some(series) = &self.mean_red_over_phi {
                write!(w, ",{}", series[n])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
