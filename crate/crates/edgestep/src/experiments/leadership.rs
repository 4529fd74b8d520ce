//! Persistent leadership: does the degree leader settle?
//!
//! Per replica the run records the leader identity at T/2 and T, the last
//! step at which the leader changed, and the last step at which the lead
//! over the runner-up was ≤ N. The headline statistic is the share of
//! replicas whose leader at T/2 is still the leader at T; eventual
//! persistence is an almost-sure statement with no rate, so cross-horizon
//! trends are left to callers running this campaign at several T.

use std::collections::BTreeMap;

use super::{par_map_replicas, CampaignConfig, CampaignReport, Gate, RawTable};
use crate::generator::{self, ProcessConfig};
use crate::stats;
use crate::Result;

pub(super) fn run(config: &CampaignConfig, gap: u32, hold_gate: f64) -> Result<CampaignReport> {
    let t_final = config.horizon;
    let t_half = config.horizon / 2;

    let rows = par_map_replicas(config.replicas, |replica| {
        let mut pc = ProcessConfig::new(config.f.clone(), config.horizon, config.master_seed);
        pc.replica = replica as u64;
        pc.record_stride = config.horizon;
        pc.leadership_gap = Some(gap);
        let record = generator::run(&pc).expect("config validated by the campaign");
        let at = |t: u64| record.times.binary_search(&t).expect("checkpoint recorded");
        let (half, fin) = (at(t_half), at(t_final));
        let stats = record.leadership.expect("leadership bookkeeping was enabled");
        vec![
            replica as f64,
            record.leader[half] as f64,
            record.leader[fin] as f64,
            (record.leader[half] == record.leader[fin]) as u32 as f64,
            stats.last_leader_change as f64,
            stats.last_gap_violation as f64,
            record.leader_gap[half] as f64,
            record.leader_gap[fin] as f64,
        ]
    });

    let mut raw = RawTable::new(
        [
            "replica",
            "leader_half",
            "leader_final",
            "stable",
            "last_leader_change",
            "last_gap_violation",
            "gap_half",
            "gap_final",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    );
    for row in rows {
        raw.push(row);
    }

    let stable = raw.column("stable");
    let violations = raw.column("last_gap_violation");
    let mut summary = BTreeMap::new();
    summary.insert("hold_share".to_owned(), stats::mean(&stable));
    summary.insert(
        "settled_share".to_owned(),
        violations.iter().filter(|&&v| (v as u64) < t_final).count() as f64
            / violations.len() as f64,
    );
    summary.insert(
        "median_gap_final".to_owned(),
        stats::median(&raw.column("gap_final")),
    );
    summary.insert(
        "median_gap_half".to_owned(),
        stats::median(&raw.column("gap_half")),
    );
    summary.insert(
        "median_last_violation".to_owned(),
        stats::median(&violations),
    );
    summary.insert(
        "q90_last_violation".to_owned(),
        stats::quantile(&violations, 0.9),
    );

    let gates = vec![Gate::at_least(
        "hold_share",
        summary["hold_share"],
        hold_gate,
    )];

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
