//! Monte-Carlo campaigns that turn the limit theorems into desk-scale
//! statistical checks: max-degree stabilization, CLT residuals, persistent
//! leadership, moment decay, the trajectory upper bound, and birth-time
//! concentration.
//!
//! Every campaign follows the same contract:
//! - raw per-replica observables are always stored ([`RawTable`]), and every
//!   summary statistic is a pure function of them;
//! - `(master_seed, config)` determines the result bit for bit, independent
//!   of the worker count (replicas are merged by index);
//! - pass/fail gates are engineering tolerances sized for ~10-minute desk
//!   runs — the underlying theorems are asymptotic and give no rates, so
//!   the gates are heuristics by necessity, and are recorded next to the
//!   measured value rather than baked into the data.

mod clt;
mod leadership;
mod max_degree;
mod moments;
mod tau;
mod upper_bound;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edge_step::{ConditionReport, EdgeStepFunction};
use crate::{Error, Result};

/// Below this replica count the gate statistics are too noisy to mean much;
/// campaigns still run but carry a warning.
pub const MIN_REPLICAS: u32 = 100;

/// Campaigns fail when more than this fraction of replicas is excluded for
/// degeneracy (tracked vertex unborn, nonpositive plug-in variance, …).
pub const MAX_EXCLUSION_FRACTION: f64 = 0.05;

fn default_vertex() -> u32 {
    1
}

fn default_ks_gate() -> f64 {
    0.05
}

fn default_gap() -> u32 {
    1
}

fn default_hold_gate() -> f64 {
    0.5
}

fn default_moment_order() -> u32 {
    1
}

fn default_moment_max_vertex() -> u32 {
    64
}

fn default_upper_bound_vertex() -> u32 {
    4
}

fn default_alpha_grid() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0]
}

fn default_tau_grid() -> Vec<u32> {
    vec![1, 10, 25, 50, 100]
}

/// Which experiment to run, with its kind-specific parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CampaignKind {
    /// M_t/φ(t) at logarithmic checkpoints; late-window drift gate, plus
    /// the linear-regime share (summable f) or the M_t/t decay trend
    /// (non-summable f).
    MaxDegree,
    /// Studentized residuals √φ(s)·(X_s − X_T)/√(X_T·v̂) for X = d(i)/φ,
    /// gated on the Kolmogorov–Smirnov distance to the standard normal; a
    /// shuffled-pairing negative control must fail the same gate.
    CltResiduals {
        anchor_s: u64,
        anchor_t: u64,
        #[serde(default = "default_vertex")]
        vertex: u32,
        /// KS gate; 0.05 suits ≥2000 replicas at anchor_t ≥ 10^6, smaller
        /// runs need a looser value.
        #[serde(default = "default_ks_gate")]
        ks_gate: f64,
    },
    /// Leader identity and gap bookkeeping: share of replicas whose leader
    /// at T/2 is still the leader at T, and last times the gap condition
    /// failed.
    Leadership {
        /// Required lead over the runner-up (0 = unique maximum).
        #[serde(default = "default_gap")]
        gap: u32,
        #[serde(default = "default_hold_gate")]
        hold_gate: f64,
    },
    /// Empirical moments of ζ̂_i = d_T(i)/φ(T) over i ∈ {1, 2, 4, …}; gates
    /// the log-log slope of the k-th moment against the −k/2 decay bound.
    ZetaMoments {
        #[serde(default = "default_moment_order")]
        moment_order: u32,
        #[serde(default = "default_moment_max_vertex")]
        max_vertex: u32,
    },
    /// Tail of sup_{s≤T} d_s(i)·φ(F⁻¹(i))/φ(s) against an α grid; the
    /// exceedance fraction must be nonincreasing with a roughly exponential
    /// decay shape.
    UpperBound {
        #[serde(default = "default_upper_bound_vertex")]
        vertex: u32,
        #[serde(default = "default_alpha_grid")]
        alphas: Vec<f64>,
    },
    /// Frequency of the early-birth event {τ(i) ≤ F⁻¹(i)/2} over a vertex
    /// grid; nonincreasing in i and vanishing for large i.
    TauConcentration {
        #[serde(default = "default_tau_grid")]
        vertices: Vec<u32>,
    },
}

impl CampaignKind {
    pub fn name(&self) -> &'static str {
        match self {
            CampaignKind::MaxDegree => "max_degree",
            CampaignKind::CltResiduals { .. } => "clt_residuals",
            CampaignKind::Leadership { .. } => "leadership",
            CampaignKind::ZetaMoments { .. } => "zeta_moments",
            CampaignKind::UpperBound { .. } => "upper_bound",
            CampaignKind::TauConcentration { .. } => "tau_concentration",
        }
    }
}

/// A full campaign description; everything downstream is a deterministic
/// function of this value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub f: EdgeStepFunction,
    pub horizon: u64,
    pub replicas: u32,
    pub master_seed: u64,
    pub kind: CampaignKind,
}

impl CampaignConfig {
    pub fn new(
        f: EdgeStepFunction,
        horizon: u64,
        replicas: u32,
        master_seed: u64,
        kind: CampaignKind,
    ) -> Result<Self> {
        let config = Self {
            f,
            horizon,
            replicas,
            master_seed,
            kind,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::InvalidParameter(
                "campaign horizon must be at least 2".into(),
            ));
        }
        if self.replicas < 2 {
            return Err(Error::InvalidParameter(
                "campaigns need at least 2 replicas".into(),
            ));
        }
        match &self.kind {
            CampaignKind::MaxDegree => {}
            CampaignKind::CltResiduals {
                anchor_s,
                anchor_t,
                vertex,
                ks_gate,
            } => {
                if !(2 <= *anchor_s && anchor_s < anchor_t && *anchor_t <= self.horizon) {
                    return Err(Error::InvalidParameter(format!(
                        "CLT anchors must satisfy 2 ≤ s < T ≤ horizon, got s={anchor_s}, \
                         T={anchor_t}, horizon={}",
                        self.horizon
                    )));
                }
                if *vertex == 0 {
                    return Err(Error::InvalidParameter("vertex ids are 1-based".into()));
                }
                if !(*ks_gate > 0.0 && *ks_gate < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "KS gate must lie in (0,1), got {ks_gate}"
                    )));
                }
            }
            CampaignKind::Leadership { hold_gate, .. } => {
                if !(0.0..=1.0).contains(hold_gate) {
                    return Err(Error::InvalidParameter(format!(
                        "hold gate must lie in [0,1], got {hold_gate}"
                    )));
                }
            }
            CampaignKind::ZetaMoments {
                moment_order,
                max_vertex,
            } => {
                if !(1..=8).contains(moment_order) {
                    return Err(Error::InvalidParameter(format!(
                        "moment order must lie in 1..=8, got {moment_order}"
                    )));
                }
                if *max_vertex < 2 {
                    return Err(Error::InvalidParameter(
                        "the moment grid needs max_vertex ≥ 2 for a slope".into(),
                    ));
                }
            }
            CampaignKind::UpperBound { vertex, alphas } => {
                if *vertex == 0 {
                    return Err(Error::InvalidParameter("vertex ids are 1-based".into()));
                }
                if alphas.len() < 2
                    || alphas.windows(2).any(|w| w[0] >= w[1])
                    || alphas.iter().any(|&a| !(a > 0.0) || !a.is_finite())
                {
                    return Err(Error::InvalidParameter(
                        "alpha grid must be ≥ 2 strictly increasing positive values".into(),
                    ));
                }
            }
            CampaignKind::TauConcentration { vertices } => {
                if vertices.is_empty()
                    || vertices.windows(2).any(|w| w[0] >= w[1])
                    || vertices[0] == 0
                {
                    return Err(Error::InvalidParameter(
                        "vertex grid must be nonempty, strictly increasing, 1-based".into(),
                    ));
                }
                let last = *vertices.last().expect("nonempty");
                let deadline = self.f.inverse_cumulative(last as f64)? / 2;
                if deadline > self.horizon {
                    return Err(Error::InvalidParameter(format!(
                        "deciding the early-birth event for vertex {last} needs horizon ≥ \
                         {deadline}, got {}",
                        self.horizon
                    )));
                }
            }
        }
        Ok(())
    }

    /// Non-fatal advisories about the configuration (noise at low replica
    /// counts); callers surface these alongside the campaign's own warnings.
    pub fn warnings(&self) -> Vec<String> {
        if self.replicas < MIN_REPLICAS {
            vec![format!(
                "{} replicas is below the statistical minimum {MIN_REPLICAS}; gate values \
                 will be noisy",
                self.replicas
            )]
        } else {
            Vec::new()
        }
    }
}

/// Which side of the threshold counts as passing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateDirection {
    AtMost,
    AtLeast,
}

/// One named pass/fail check; NaN values fail in either direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub direction: GateDirection,
    pub pass: bool,
}

impl Gate {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_owned(),
            value,
            threshold,
            direction: GateDirection::AtMost,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_owned(),
            value,
            threshold,
            direction: GateDirection::AtLeast,
            pass: value >= threshold,
        }
    }
}

/// Raw per-replica observables, one row per replica, merged by index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl RawTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    /// Column values by header name; panics on an unknown name (caller bug).
    pub fn column(&self, name: &str) -> Vec<f64> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .unwrap_or_else(|| panic!("no column named {name}"));
        self.rows.iter().map(|r| r[idx]).collect()
    }

    /// CSV body with shortest-round-trip float formatting, so identical
    /// data yields identical bytes on every platform.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                write!(out, "{v}").expect("write to String");
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

/// Campaign output: raw data, summary statistics (pure functions of the raw
/// data), gates, and bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    /// How f was classified at the campaign horizon; gate selection depends
    /// on it.
    pub classification: ConditionReport,
    pub raw: RawTable,
    pub summary: BTreeMap<String, f64>,
    pub gates: Vec<Gate>,
    pub excluded_replicas: u32,
    pub warnings: Vec<String>,
}

impl CampaignReport {
    pub fn all_gates_pass(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }

    /// Writes `raw.csv`, `summary.json`, and one `gates/<name>.PASS` or
    /// `gates/<name>.FAIL` marker per gate under `dir`. Stale markers from
    /// a previous run of the opposite polarity are removed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("raw.csv"), self.raw.to_csv_string())?;
        let mut value = serde_json::to_value(self)?;
        if let Some(obj) = value.as_object_mut() {
            // The raw table lives in raw.csv; the summary stays light.
            obj.remove("raw");
        }
        fs::write(
            dir.join("summary.json"),
            format!("{}\n", serde_json::to_string_pretty(&value)?),
        )?;
        let gates_dir = dir.join("gates");
        fs::create_dir_all(&gates_dir)?;
        for gate in &self.gates {
            for stale in ["PASS", "FAIL"] {
                let path = gates_dir.join(format!("{}.{stale}", gate.name));
                if path.exists() {
                    fs::remove_file(path)?;
                }
            }
            let marker = if gate.pass { "PASS" } else { "FAIL" };
            fs::write(
                gates_dir.join(format!("{}.{marker}", gate.name)),
                format!(
                    "value {} {} threshold {}\n",
                    gate.value,
                    match gate.direction {
                        GateDirection::AtMost => "<=",
                        GateDirection::AtLeast => ">=",
                    },
                    gate.threshold
                ),
            )?;
        }
        Ok(())
    }
}

/// Runs the configured campaign. Deterministic in `(config, master_seed)`;
/// replica work is parallel with order-independent merging.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    config.validate()?;
    let mut report = match &config.kind {
        CampaignKind::MaxDegree => max_degree::run(config),
        CampaignKind::CltResiduals {
            anchor_s,
            anchor_t,
            vertex,
            ks_gate,
        } => clt::run(config, *anchor_s, *anchor_t, *vertex, *ks_gate),
        CampaignKind::Leadership { gap, hold_gate } => {
            leadership::run(config, *gap, *hold_gate)
        }
        CampaignKind::ZetaMoments {
            moment_order,
            max_vertex,
        } => moments::run(config, *moment_order, *max_vertex),
        CampaignKind::UpperBound { vertex, alphas } => {
            upper_bound::run(config, *vertex, alphas)
        }
        CampaignKind::TauConcentration { vertices } => tau::run(config, vertices),
    }?;
    report.warnings.extend(config.warnings());
    Ok(report)
}

/// Maps a closure over replica indices in parallel; the output order is by
/// replica index regardless of scheduling, keeping merges deterministic.
pub fn par_map_replicas<T, F>(replicas: u32, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u32) -> T + Sync + Send,
{
    (0..replicas).into_par_iter().map(f).collect()
}

/// Shared helper: fraction of `values` strictly above `threshold`.
pub(crate) fn share_above(values: &[f64], threshold: f64) -> f64 {
    values.iter().filter(|&&v| v > threshold).count() as f64 / values.len() as f64
}
