//! Trajectory upper bound: tail of the running supremum of d_s(i)/φ(s).
//!
//! The bound says P(∃s ≤ T: d_s(i) ≥ α·φ(s)/φ(F⁻¹(i))) decays like
//! exp(−C·α) with an unknown constant, so only the shape is checked: the
//! exceedance fraction over an α grid must be nonincreasing (nested events
//! make this exact) and the log-fraction must steepen between grid points
//! consistently with exponential decay.
//!
//! The supremum is exact over integer times: d is piecewise constant and φ
//! is increasing, so the ratio attains local maxima only at steps where the
//! degree jumps (including birth), which is where it is evaluated.

use std::collections::BTreeMap;

use super::{par_map_replicas, CampaignConfig, CampaignReport, Gate, RawTable};
use crate::generator::Multigraph;
use crate::normalization::NormalizationTable;
use crate::rng::replica_rng;
use crate::stats;
use crate::{Error, Result};

/// log-fraction ratio between the last and second α must reach this.
pub const LOG_DECAY_GATE: f64 = 2.0;

pub(super) fn run(config: &CampaignConfig, vertex: u32, alphas: &[f64]) -> Result<CampaignReport> {
    let birth_target = config.f.inverse_cumulative(vertex as f64)?;
    if birth_target > config.horizon {
        return Err(Error::InvalidParameter(format!(
            "normalizing by φ(F⁻¹({vertex})) needs horizon ≥ {birth_target}, got {}",
            config.horizon
        )));
    }
    let table = NormalizationTable::build(&config.f, config.horizon, 1)?;
    let phi_birth = table.phi(birth_target)?;

    let rows = par_map_replicas(config.replicas, |replica| {
        let mut g = Multigraph::with_capacity(config.horizon);
        let mut rng = replica_rng(config.master_seed, replica as u64);
        let mut sup = if g.degree(vertex) > 0 {
            g.degree(vertex) as f64 / table.phi(1).expect("t=1 in table")
        } else {
            0.0
        };
        let mut prev = g.degree(vertex);
        for t in 2..=config.horizon {
            g.step(&config.f, &mut rng);
            let d = g.degree(vertex);
            if d != prev {
                let ratio = d as f64 / table.phi(t).expect("t within horizon");
                if ratio > sup {
                    sup = ratio;
                }
                prev = d;
            }
        }
        let born = g.degree(vertex) > 0;
        vec![
            replica as f64,
            sup * phi_birth,
            (!born) as u32 as f64,
        ]
    });

    let mut raw = RawTable::new(
        ["replica", "sup_scaled", "excluded"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for row in rows {
        raw.push(row);
    }
    let excluded_col = raw.column("excluded");
    let excluded = excluded_col.iter().filter(|&&e| e == 1.0).count() as u32;
    let sups: Vec<f64> = raw
        .column("sup_scaled")
        .iter()
        .zip(&excluded_col)
        .filter(|(_, &e)| e == 0.0)
        .map(|(s, _)| *s)
        .collect();

    let n = sups.len().max(1) as f64;
    let fractions: Vec<f64> = alphas
        .iter()
        .map(|&a| sups.iter().filter(|&&s| s >= a).count() as f64 / n)
        .collect();

    let mut summary = BTreeMap::new();
    for (&a, &frac) in alphas.iter().zip(&fractions) {
        summary.insert(format!("fraction_alpha_{a}"), frac);
    }
    summary.insert("median_sup".to_owned(), stats::median(&sups));
    summary.insert(
        "exclusion_fraction".to_owned(),
        excluded as f64 / config.replicas as f64,
    );

    // Exceedance events are nested, so this is an exact invariant of the
    // implementation rather than a statistical check.
    let max_increase = fractions
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    // Clamp away from {0, 1} so the log-ratio stays finite; half an
    // observation is the usual resolution floor.
    let clamp = |fr: f64| fr.clamp(0.5 / n, 1.0 - 0.5 / n);
    let log_ratio = clamp(*fractions.last().expect("validated nonempty")).ln()
        / clamp(fractions[1]).ln();
    summary.insert("log_decay_ratio".to_owned(), log_ratio);

    let gates = vec![
        Gate::at_most("monotone_violation", max_increase, 0.0),
        Gate::at_least("log_decay_ratio", log_ratio, LOG_DECAY_GATE),
    ];

    Ok(CampaignReport {
        config: config.clone(),
        classification: config.f.classify(config.horizon),
        raw,
        summary,
        gates,
        excluded_replicas: excluded,
        warnings: Vec::new(),
    })
}
