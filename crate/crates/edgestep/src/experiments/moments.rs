//! Moment decay of the normalized degree limits.
//!
//! ζ̂_i = d_T(i)/φ(T) estimates the limit ζ_i; its k-th moment is bounded
//! by C·i^(−k/2), so the log-log slope of the empirical k-th moment over
//! the dyadic grid i ∈ {1, 2, 4, …} must come out ≤ −k/2 plus slack. The
//! slack absorbs the finite-T positive bias of the small-i moments.

use std::collections::BTreeMap;

use super::{
    par_map_replicas, CampaignConfig, CampaignReport, Gate, RawTable, MAX_EXCLUSION_FRACTION,
};
use crate::generator::{self, ProcessConfig};
use crate::normalization::NormalizationTable;
use crate::stats;
use crate::Result;

/// Gate: slope ≤ −k/2 + SLOPE_SLACK.
pub const SLOPE_SLACK: f64 = 0.15;

/// Relative standard error above which a moment estimate is flagged.
pub const RSE_WARNING: f64 = 0.20;

pub(super) fn run(config: &CampaignConfig, order: u32, max_vertex: u32) -> Result<CampaignReport> {
    let grid: Vec<u32> = std::iter::successors(Some(1u32), |i| i.checked_mul(2))
        .take_while(|&i| i <= max_vertex)
        .collect();
    let table = NormalizationTable::build(&config.f, config.horizon, 1)?;
    let phi_t = table.phi(config.horizon)?;

    let rows = par_map_replicas(config.replicas, |replica| {
        let mut pc = ProcessConfig::new(config.f.clone(), config.horizon, config.master_seed);
        pc.replica = replica as u64;
        pc.record_stride = config.horizon;
        pc.tracked_vertices = grid.clone();
        let record = generator::run(&pc).expect("config validated by the campaign");
        let last = record.times.len() - 1;
        let degrees: Vec<f64> = record.degrees.iter().map(|d| d[last] as f64).collect();
        (replica, degrees)
    });

    let mut columns = vec!["replica".to_owned()];
    columns.extend(grid.iter().map(|i| format!("d_{i}")));
    columns.push("excluded".to_owned());
    let mut raw = RawTable::new(columns);
    let mut excluded = 0u32;
    let mut zetas: Vec<Vec<f64>> = vec![Vec::new(); grid.len()];
    for (replica, degrees) in rows {
        let degenerate = degrees.iter().any(|&d| d == 0.0);
        if degenerate {
            excluded += 1;
        } else {
            for (slot, &d) in zetas.iter_mut().zip(&degrees) {
                slot.push(d / phi_t);
            }
        }
        let mut row = vec![replica as f64];
        row.extend(&degrees);
        row.push(degenerate as u32 as f64);
        raw.push(row);
    }

    let mut summary = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut top_moments = Vec::new();
    for (slot, &i) in zetas.iter().zip(&grid) {
        for j in 1..=order {
            let powers: Vec<f64> = slot.iter().map(|z| z.powi(j as i32)).collect();
            let m = stats::mean(&powers);
            summary.insert(format!("moment{j}_i{i}"), m);
            if j == order {
                top_moments.push(m);
                let rse = stats::standard_error(&powers) / m;
                if rse > RSE_WARNING {
                    warnings.push(format!(
                        "moment {j} at vertex {i} has relative standard error {rse:.2}; \
                         add replicas"
                    ));
                }
            }
        }
    }
    let log_i: Vec<f64> = grid.iter().map(|&i| (i as f64).ln()).collect();
    let log_m: Vec<f64> = top_moments.iter().map(|m| m.ln()).collect();
    let slope = stats::regression_slope(&log_i, &log_m);
    summary.insert("log_slope".to_owned(), slope);
    summary.insert(
        "exclusion_fraction".to_owned(),
        excluded as f64 / config.replicas as f64,
    );
    let positive_share = zetas[0].iter().filter(|&&z| z > 0.0).count() as f64
        / zetas[0].len().max(1) as f64;
    summary.insert("zeta1_positive_share".to_owned(), positive_share);

    let mut gates = vec![
        Gate::at_most("log_slope", slope, -(order as f64) / 2.0 + SLOPE_SLACK),
        Gate::at_least("zeta1_positive_share", positive_share, 1.0),
        Gate::at_most(
            "exclusion_fraction",
            summary["exclusion_fraction"],
            MAX_EXCLUSION_FRACTION,
        ),
    ];
    if order >= 2 {
        // Jensen: E[ζ²] ≥ (E[ζ])² at every grid point; gate the first.
        let ratio = summary["moment2_i1"] / summary["moment1_i1"].powi(2);
        gates.push(Gate::at_least("jensen_ratio_i1", ratio, 1.0));
    }

    Ok(CampaignReport {
        config: config.clone(),
        classification: config.f.classify(config.horizon),
        raw,
        summary,
        gates,
        excluded_replicas: excluded,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{run_campaign, CampaignKind};
    use super::*;
    use crate::edge_step::EdgeStepFunction;

    fn config(order: u32, max_vertex: u32, replicas: u32) -> CampaignConfig {
        CampaignConfig::new(
            EdgeStepFunction::constant(0.5).unwrap(),
            5_000,
            replicas,
            88,
            CampaignKind::ZetaMoments {
                moment_order: order,
                max_vertex,
            },
        )
        .unwrap()
    }

    #[test]
    fn first_moment_decays_in_the_vertex_index() {
        let report = run_campaign(&config(1, 16, 150)).unwrap();
        // The raw decay, before any slope fit: early vertices dominate.
        assert!(report.summary["moment1_i1"] > report.summary["moment1_i16"]);
        let slope = report.summary["log_slope"];
        assert!(slope < 0.0, "slope {slope}");
        assert_eq!(report.summary["zeta1_positive_share"], 1.0);
    }

    #[test]
    fn jensen_gate_holds_for_second_moments() {
        let report = run_campaign(&config(2, 8, 80)).unwrap();
        let gate = report
            .gates
            .iter()
            .find(|g| g.name == "jensen_ratio_i1")
            .expect("order 2 adds the Jensen gate");
        assert!(gate.pass, "Jensen ratio {}", gate.value);
        // Both moment orders land in the summary.
        assert!(report.summary.contains_key("moment1_i4"));
        assert!(report.summary.contains_key("moment2_i4"));
    }

    #[test]
    fn few_replicas_warn_about_standard_error() {
        let report = run_campaign(&config(2, 8, 6)).unwrap();
        assert!(
            report
                .warnings
                .iter()
                .any(|w| w.contains("relative standard error")),
            "warnings: {:?}",
            report.warnings
        );
    }

    #[test]
    fn summary_is_recomputable_from_raw() {
        let report = run_campaign(&config(1, 4, 20)).unwrap();
        let table = NormalizationTable::build(
            &EdgeStepFunction::constant(0.5).unwrap(),
            5_000,
            1,
        )
        .unwrap();
        let phi = table.phi(5_000).unwrap();
        let excluded = report.raw.column("excluded");
        let zeta1: Vec<f64> = report
            .raw
            .column("d_1")
            .iter()
            .zip(&excluded)
            .filter(|(_, &e)| e == 0.0)
            .map(|(d, _)| d / phi)
            .collect();
        assert_eq!(stats::mean(&zeta1), report.summary["moment1_i1"]);
    }
}
