//! Birth-time concentration: how often is vertex i born suspiciously early?
//!
//! τ(i) concentrates around F⁻¹(i), and the early-birth event
//! {τ(i) ≤ F⁻¹(i)/2} has probability decaying exponentially in i. The
//! campaign measures the empirical frequency over a vertex grid and gates
//! on the shape: nonincreasing in i (up to Monte-Carlo noise) and
//! negligible for i ≥ 50. At i=1 the event can hold trivially (τ(1)=1);
//! it is reported, never failed.

use std::collections::BTreeMap;

use super::{par_map_replicas, CampaignConfig, CampaignReport, Gate, RawTable};
use crate::generator::{self, ProcessConfig};
use crate::Result;

/// Frequency gate for vertices i ≥ TAIL_START.
pub const TAIL_START: u32 = 50;
pub const TAIL_FREQUENCY_GATE: f64 = 1e-2;

pub(super) fn run(config: &CampaignConfig, vertices: &[u32]) -> Result<CampaignReport> {
    let deadlines: Vec<f64> = vertices
        .iter()
        .map(|&i| Ok(config.f.inverse_cumulative(i as f64)? as f64 / 2.0))
        .collect::<Result<_>>()?;

    let rows = par_map_replicas(config.replicas, |replica| {
        let mut pc = ProcessConfig::new(config.f.clone(), config.horizon, config.master_seed);
        pc.replica = replica as u64;
        pc.record_stride = config.horizon;
        pc.tracked_vertices = vertices.to_vec();
        let record = generator::run(&pc).expect("config validated by the campaign");
        let mut row = vec![replica as f64];
        // 0 encodes "not born within the horizon"; real birth times are ≥ 1.
        row.extend(
            record
                .tau
                .iter()
                .map(|t| t.map(|v| v as f64).unwrap_or(0.0)),
        );
        row
    });

    let mut columns = vec!["replica".to_owned()];
    columns.extend(vertices.iter().map(|i| format!("tau_{i}")));
    let mut raw = RawTable::new(columns);
    for row in rows {
        raw.push(row);
    }

    let n = config.replicas as f64;
    let frequencies: Vec<f64> = vertices
        .iter()
        .zip(&deadlines)
        .map(|(&i, &deadline)| {
            raw.column(&format!("tau_{i}"))
                .iter()
                .filter(|&&tau| tau >= 1.0 && tau <= deadline)
                .count() as f64
                / n
        })
        .collect();

    let mut summary = BTreeMap::new();
    for ((&i, &freq), &deadline) in vertices.iter().zip(&frequencies).zip(&deadlines) {
        summary.insert(format!("freq_i{i}"), freq);
        summary.insert(format!("deadline_i{i}"), deadline);
    }

    // Monotone up to 2σ of the difference of the two proportions (taken as
    // independent, which overstates the noise of same-replica estimates —
    // conservative in the right direction).
    let max_violation = frequencies
        .windows(2)
        .map(|w| {
            let slack =
                2.0 * ((w[0] * (1.0 - w[0]) + w[1] * (1.0 - w[1])) / n).sqrt();
            w[1] - w[0] - slack
        })
        .fold(f64::NEG_INFINITY, f64::max);
    summary.insert(
        "monotone_violation".to_owned(),
        if max_violation.is_finite() { max_violation } else { 0.0 },
    );

    let mut gates = vec![Gate::at_most(
        "monotone_violation",
        summary["monotone_violation"],
        0.0,
    )];
    let tail: Vec<f64> = vertices
        .iter()
        .zip(&frequencies)
        .filter(|(&i, _)| i >= TAIL_START)
        .map(|(_, &f)| f)
        .collect();
    if !tail.is_empty() {
        let worst = tail.iter().fold(0.0f64, |a, &b| a.max(b));
        gates.push(Gate::at_most("tail_frequency", worst, TAIL_FREQUENCY_GATE));
    }

    Ok(CampaignReport {
        config: config.clone(),
        classification: config.f.classify(config.horizon),
        raw,
        summary,
        gates,
        excluded_replicas: 0,
        warnings: Vec::new(),
    })
}
