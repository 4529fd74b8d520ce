//! CLT residuals: studentized fluctuations of the normalized degree.
//!
//! With X_t = d_t(i)/φ(t), the residual R = √φ(s)·(X_s − X_T)/√(X_T·v̂)
//! should be approximately standard normal for s large and T ≫ s. The
//! unknown limit ζ_i is proxied by the late value X_T; the variance factor
//! v̂ is 1 when Σ f(s)/s diverges (case a) and 1 − ξ(∞)·X_T/2 when it
//! converges (case b). A shuffled-pairing control — X_T borrowed from a
//! different replica — must fail the same gate, guarding against a test
//! that would accept anything.

use std::collections::BTreeMap;

use super::{
    par_map_replicas, CampaignConfig, CampaignReport, Gate, RawTable, MAX_EXCLUSION_FRACTION,
};
use crate::edge_step::Condition;
use crate::generator::{self, ProcessConfig};
use crate::normalization::NormalizationTable;
use crate::stats;
use crate::Result;

pub(super) fn run(
    config: &CampaignConfig,
    anchor_s: u64,
    anchor_t: u64,
    vertex: u32,
    ks_gate: f64,
) -> Result<CampaignReport> {
    let table = NormalizationTable::build(&config.f, config.horizon, 1)?;
    let classification = config.f.classify(config.horizon);
    let case_b = classification.condition_s == Condition::Holds;
    let xi = table.xi_infinity(1e-3);
    let mut warnings = Vec::new();
    if case_b && !xi.converged {
        warnings.push(
            "ξ(∞) has not converged at this horizon; the case-(b) variance plug-in is \
             approximate"
                .to_owned(),
        );
    }
    let phi_s = table.phi(anchor_s)?;
    let phi_t = table.phi(anchor_t)?;

    let observed = par_map_replicas(config.replicas, |replica| {
        let mut pc = ProcessConfig::new(config.f.clone(), config.horizon, config.master_seed);
        pc.replica = replica as u64;
        pc.record_stride = config.horizon;
        pc.tracked_vertices = vec![vertex];
        pc.extra_checkpoints = vec![anchor_s, anchor_t];
        let record = generator::run(&pc).expect("config validated by the campaign");
        let at = |t: u64| -> f64 {
            let idx = record.times.binary_search(&t).expect("anchor was recorded");
            record.degrees[0][idx] as f64
        };
        (at(anchor_s), at(anchor_t))
    });

    let variance_factor = |x_t: f64| -> f64 {
        if case_b {
            1.0 - xi.value * x_t / 2.0
        } else {
            1.0
        }
    };
    let residual_for = |d_s: f64, x_t: f64| -> Option<f64> {
        let x_s = d_s / phi_s;
        let denom = x_t * variance_factor(x_t);
        if d_s == 0.0 || denom <= 0.0 {
            return None;
        }
        Some(phi_s.sqrt() * (x_s - x_t) / denom.sqrt())
    };

    let mut raw = RawTable::new(
        ["replica", "d_s", "d_t", "residual", "excluded"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    let mut residuals = Vec::new();
    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut excluded = 0u32;
    for (replica, &(d_s, d_t)) in observed.iter().enumerate() {
        let x_t = d_t / phi_t;
        match residual_for(d_s, x_t) {
            Some(r) => {
                residuals.push(r);
                kept.push((d_s, x_t));
                raw.push(vec![replica as f64, d_s, d_t, r, 0.0]);
            }
            None => {
                excluded += 1;
                raw.push(vec![replica as f64, d_s, d_t, f64::NAN, 1.0]);
            }
        }
    }

    // Negative control: pair each replica's early value with the NEXT
    // replica's late value. The mismatch √φ(s)·(ζ_i − ζ_i') blows the
    // centering up, so a sound test must reject this.
    let mut shuffled = Vec::new();
    for (idx, &(d_s, _)) in kept.iter().enumerate() {
        let (_, x_t_other) = kept[(idx + 1) % kept.len()];
        if let Some(r) = residual_for(d_s, x_t_other) {
            shuffled.push(r);
        }
    }

    let ks_of = |sample: &[f64]| -> f64 {
        if sample.is_empty() {
            f64::NAN
        } else {
            stats::ks_statistic_normal(sample)
        }
    };
    let mean_abs = |sample: &[f64]| -> f64 {
        if sample.is_empty() {
            f64::NAN
        } else {
            sample.iter().map(|r| r.abs()).sum::<f64>() / sample.len() as f64
        }
    };

    let mut summary = BTreeMap::new();
    summary.insert("ks_normal".to_owned(), ks_of(&residuals));
    summary.insert("ks_shuffled".to_owned(), ks_of(&shuffled));
    summary.insert("mean_abs_residual".to_owned(), mean_abs(&residuals));
    summary.insert("mean_abs_shuffled".to_owned(), mean_abs(&shuffled));
    summary.insert(
        "exclusion_fraction".to_owned(),
        excluded as f64 / config.replicas as f64,
    );
    summary.insert("case_b".to_owned(), if case_b { 1.0 } else { 0.0 });
    if case_b {
        summary.insert("xi_infinity".to_owned(), xi.value);
    }

    let gates = vec![
        Gate::at_most("ks_normal", summary["ks_normal"], ks_gate),
        // The control must FAIL the primary gate: its KS must exceed it.
        Gate::at_least("negative_control_ks", summary["ks_shuffled"], ks_gate),
        Gate::at_most(
            "exclusion_fraction",
            summary["exclusion_fraction"],
            MAX_EXCLUSION_FRACTION,
        ),
    ];

    Ok(CampaignReport {
        config: config.clone(),
        classification,
        raw,
        summary,
        gates,
        excluded_replicas: excluded,
        warnings,
    })
}
