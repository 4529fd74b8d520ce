//! Command executors. Every command writes its artifacts plus a
//! `manifest.json` (config hash, code version, wall time, warnings,
//! outputs) into the output directory and returns the process exit code.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use serde_json::json;
use sha2::{Digest, Sha256};

use edgestep::bootstrap::{run_to_stabilization, structure_report, InfectionResult};
use edgestep::experiments::{par_map_replicas, run_campaign, RawTable};
use edgestep::generator::{self, recorded_times, Multigraph, ProcessConfig};
use edgestep::normalization::NormalizationTable;
use edgestep::rng::{replica_rng, stream_rng};
use edgestep::snapshot::GraphSnapshot;
use edgestep::stats;
use edgestep::urn::{urn_step, UrnState};

use crate::config::{Action, BootstrapAction, GenerateParams, NormalizeParams, RunConfig, UrnAction};

pub const EXIT_SUCCESS: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_GATE_FAILURE: u8 = 3;
pub const EXIT_RUNTIME_ANOMALY: u8 = 4;

/// RNG stream slot for infection seeding, distinct from the graph stream.
const INFECTION_STREAM: u64 = 1;

/// Runs the configured command to completion and returns the exit code.
/// Artifacts and the manifest are written even when a gate fails or a
/// bootstrap run hits its round cap: those outcomes are reported through
/// the exit code, not hidden.
pub fn execute(config: &RunConfig) -> anyhow::Result<u8> {
    let started = Instant::now();
    fs::create_dir_all(&config.out)
        .with_context(|| format!("creating output directory {}", config.out.display()))?;
    let mut outputs = Vec::new();
    let mut warnings = config.warnings.clone();
    let code = match &config.action {
        Action::Generate(params) => generate(config, params, &mut outputs, &mut warnings)?,
        Action::Normalize(params) => normalize(config, params, &mut outputs, &mut warnings)?,
        Action::Campaign(campaign) => {
            let report = run_campaign(campaign)?;
            report.write(&config.out)?;
            outputs.extend(["raw.csv".into(), "summary.json".into()]);
            for gate in &report.gates {
                outputs.push(format!(
                    "gates/{}.{}",
                    gate.name,
                    if gate.pass { "PASS" } else { "FAIL" }
                ));
                println!(
                    "gate {}: {} (value {})",
                    gate.name,
                    if gate.pass { "PASS" } else { "FAIL" },
                    gate.value
                );
            }
            warnings.extend(report.warnings.iter().cloned());
            if report.all_gates_pass() {
                EXIT_SUCCESS
            } else {
                EXIT_GATE_FAILURE
            }
        }
        Action::Bootstrap(action) => bootstrap(config, action, &mut outputs, &mut warnings)?,
        Action::Urn(action) => urn(config, action, &mut outputs, &mut warnings)?,
    };
    write_manifest(config, code, started.elapsed().as_secs_f64(), &outputs, &warnings)?;
    Ok(code)
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text).with_context(|| format!("writing {name}"))?;
    Ok(())
}

fn write_manifest(
    config: &RunConfig,
    exit_code: u8,
    wall_time_seconds: f64,
    outputs: &[String],
    warnings: &[String],
) -> anyhow::Result<()> {
    let digest = Sha256::digest(config.canonical.as_bytes());
    let hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let manifest = json!({
        "command": config.command.as_str(),
        "code_version": env!("CARGO_PKG_VERSION"),
        "config_hash": format!("sha256:{hash}"),
        "config": config.canonical,
        "seed": config.seed,
        "workers": config.workers,
        "wall_time_seconds": wall_time_seconds,
        "exit_code": exit_code,
        "outputs": outputs,
        "warnings": warnings,
    });
    write_json(&config.out, "manifest.json", &manifest)
}

fn generate(
    config: &RunConfig,
    params: &GenerateParams,
    outputs: &mut Vec<String>,
    warnings: &mut Vec<String>,
) -> anyhow::Result<u8> {
    let mut pc = ProcessConfig::new(config.f.clone(), params.horizon, config.seed);
    pc.tracked_vertices = params.tracked_vertices.clone();
    pc.record_stride = params.record_stride;
    pc.leadership_gap = params.leadership_gap;
    let record = generator::run(&pc)?;

    // `run` records observables but does not keep the graph; replaying the
    // same replica stream rebuilds it exactly (the run consumes no other
    // randomness). The cross-check below turns any drift between the two
    // into a hard error instead of a silently wrong snapshot.
    let mut g = Multigraph::with_capacity(params.horizon);
    let mut rng = replica_rng(config.seed, 0);
    for _ in 1..params.horizon {
        g.step(&config.f, &mut rng);
    }
    anyhow::ensure!(
        g.max_degree() == *record.max_degree.last().expect("nonempty record")
            && g.vertex_count() == *record.vertex_count.last().expect("nonempty record"),
        "snapshot replay diverged from the recorded trajectory"
    );
    let snapshot = g.to_snapshot();
    snapshot
        .save_path(config.out.join("snapshot.bin"))
        .context("writing snapshot.bin")?;
    outputs.push("snapshot.bin".into());

    let mut columns = vec![
        "time".to_string(),
        "vertex_count".to_string(),
        "max_degree".to_string(),
        "leader".to_string(),
        "leader_gap".to_string(),
    ];
    columns.extend(record.tracked.iter().map(|v| format!("d_{v}")));
    let mut table = RawTable::new(columns);
    for (n, &t) in record.times.iter().enumerate() {
        let mut row = vec![
            t as f64,
            record.vertex_count[n] as f64,
            record.max_degree[n] as f64,
            record.leader[n] as f64,
            record.leader_gap[n] as f64,
        ];
        row.extend(record.degrees.iter().map(|d| d[n] as f64));
        table.push(row);
    }
    fs::write(config.out.join("trajectory.csv"), table.to_csv_string())
        .context("writing trajectory.csv")?;
    outputs.push("trajectory.csv".into());

    let classification = config.f.classify(params.horizon);
    let tau: serde_json::Map<String, serde_json::Value> = record
        .tracked
        .iter()
        .zip(&record.tau)
        .map(|(v, tau)| (format!("{v}"), json!(tau)))
        .collect();
    if record.tau.iter().any(|t| t.is_none()) {
        warnings.push("some tracked vertices were not born within the horizon".into());
    }
    let summary = json!({
        "horizon": params.horizon,
        "vertex_count": g.vertex_count(),
        "max_degree": g.max_degree(),
        "leader": g.leader(),
        "leader_gap": g.leader_gap(),
        "tau": tau,
        "leadership": record.leadership,
        "classification": classification,
    });
    write_json(&config.out, "summary.json", &summary)?;
    outputs.push("summary.json".into());
    Ok(EXIT_SUCCESS)
}

fn normalize(
    config: &RunConfig,
    params: &NormalizeParams,
    outputs: &mut Vec<String>,
    warnings: &mut Vec<String>,
) -> anyhow::Result<u8> {
    let table = NormalizationTable::build(&config.f, params.horizon, params.orders)?;
    let times = recorded_times(params.horizon, params.stride, &params.times);

    let mut columns = vec!["t".to_string(), "phi".to_string(), "xi".to_string()];
    columns.extend((2..=params.orders).map(|k| format!("phi_{k}")));
    let mut rows = RawTable::new(columns);
    for &t in &times {
        let mut row = vec![t as f64, table.phi(t)?, table.xi(t)?];
        for k in 2..=params.orders {
            row.push(table.phi_k(k, t)?);
        }
        rows.push(row);
    }
    fs::write(config.out.join("normalization.csv"), rows.to_csv_string())
        .context("writing normalization.csv")?;
    outputs.push("normalization.csv".into());

    let xi_infinity = table.xi_infinity(1e-3);
    if !xi_infinity.converged {
        warnings.push(format!(
            "xi has not converged by the horizon (xi({}) = {}); treat the limit as unresolved",
            params.horizon, xi_infinity.value
        ));
    }
    let summary = json!({
        "horizon": params.horizon,
        "orders": params.orders,
        "classification": config.f.classify(params.horizon),
        "xi_infinity": xi_infinity,
    });
    write_json(&config.out, "summary.json", &summary)?;
    outputs.push("summary.json".into());
    Ok(EXIT_SUCCESS)
}

fn bootstrap(
    config: &RunConfig,
    action: &BootstrapAction,
    outputs: &mut Vec<String>,
    warnings: &mut Vec<String>,
) -> anyhow::Result<u8> {
    let build_snapshot = |replica: u64| -> GraphSnapshot {
        let mut g = Multigraph::with_capacity(action.horizon);
        let mut rng = replica_rng(config.seed, replica);
        for _ in 1..action.horizon {
            g.step(&config.f, &mut rng);
        }
        g.to_snapshot()
    };

    // Star/core structure of a representative replica, with the
    // classification warning for f outside the outbreak regime.
    let structure = if action.params.a > 1.0 {
        Some(structure_report(
            &build_snapshot(0),
            &config.f,
            action.params.a,
            action.params.r,
        )?)
    } else {
        warnings.push("structure report needs a > 1; skipped".into());
        None
    };
    if let Some(warning) = structure.as_ref().and_then(|s| s.classification_warning.clone()) {
        warnings.push(warning);
    }

    let results: Vec<edgestep::Result<InfectionResult>> =
        par_map_replicas(action.replicas, |replica| {
            let snapshot = build_snapshot(replica as u64);
            let mut rng = stream_rng(config.seed, replica as u64, INFECTION_STREAM);
            run_to_stabilization(&snapshot, &action.params, &mut rng)
        });
    let results: Vec<InfectionResult> = results.into_iter().collect::<edgestep::Result<_>>()?;

    let mut per_run = RawTable::new(
        [
            "replica",
            "vertices",
            "initial_infected",
            "final_infected",
            "fraction",
            "rounds",
            "rounds_to_half_final",
            "hit_round_cap",
        ]
        .map(String::from)
        .to_vec(),
    );
    let mut per_round = RawTable::new(
        ["replica", "round", "newly_infected"].map(String::from).to_vec(),
    );
    for (replica, result) in results.iter().enumerate() {
        let vertices = result.infected.len() as f64;
        per_run.push(vec![
            replica as f64,
            vertices,
            result.initial_infected as f64,
            result.final_infected as f64,
            result.fraction,
            result.rounds as f64,
            result.rounds_to_half_final as f64,
            if result.hit_round_cap { 1.0 } else { 0.0 },
        ]);
        for (round, &added) in result.newly_infected_per_round.iter().enumerate() {
            per_round.push(vec![replica as f64, round as f64, added as f64]);
        }
    }
    fs::write(config.out.join("bootstrap.csv"), per_run.to_csv_string())
        .context("writing bootstrap.csv")?;
    outputs.push("bootstrap.csv".into());
    fs::write(config.out.join("rounds.csv"), per_round.to_csv_string())
        .context("writing rounds.csv")?;
    outputs.push("rounds.csv".into());

    let fractions: Vec<f64> = results.iter().map(|r| r.fraction).collect();
    let rounds: Vec<f64> = results.iter().map(|r| r.rounds as f64).collect();
    let cap_hits: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.hit_round_cap)
        .map(|(i, _)| i)
        .collect();
    let summary = json!({
        "replicas": action.replicas,
        "r": action.params.r,
        "a": action.params.a,
        "round_cap": action.params.round_cap,
        "mean_fraction": stats::mean(&fractions),
        "median_fraction": stats::median(&fractions),
        "mean_rounds": stats::mean(&rounds),
        "max_rounds": rounds.iter().cloned().fold(0.0, f64::max),
        "round_cap_hits": cap_hits,
        "structure": structure,
    });
    write_json(&config.out, "summary.json", &summary)?;
    outputs.push("summary.json".into());

    if !cap_hits.is_empty() {
        warnings.push(format!(
            "{} of {} replicas hit the round cap {} while still growing",
            cap_hits.len(),
            action.replicas,
            action.params.round_cap
        ));
        return Ok(EXIT_RUNTIME_ANOMALY);
    }
    Ok(EXIT_SUCCESS)
}

fn urn(
    config: &RunConfig,
    action: &UrnAction,
    outputs: &mut Vec<String>,
    warnings: &mut Vec<String>,
) -> anyhow::Result<u8> {
    let start = match action.born_at {
        Some(t0) => UrnState::vertex_born_at(t0)?,
        None => UrnState::initial(),
    };
    let times: Vec<u64> = recorded_times(action.horizon, action.stride, &[start.time])
        .into_iter()
        .filter(|&t| t >= start.time)
        .collect();
    let f = action.immigration.then_some(&config.f);

    let per_replica: Vec<Vec<(u64, u64, u64)>> = par_map_replicas(action.replicas, |replica| {
        let mut rng = replica_rng(config.seed, replica as u64);
        let mut state = start;
        let mut rows = Vec::with_capacity(times.len());
        let mut next = 0usize;
        while next < times.len() && times[next] == state.time {
            rows.push((state.time, state.red, state.blue));
            next += 1;
        }
        while state.time < action.horizon {
            state = urn_step(state, f, action.sequential_double_draw, &mut rng);
            while next < times.len() && times[next] == state.time {
                rows.push((state.time, state.red, state.blue));
                next += 1;
            }
        }
        rows
    });

    let mut table = RawTable::new(
        ["replica", "time", "red", "blue", "proportion"]
            .map(String::from)
            .to_vec(),
    );
    let mut finals = Vec::with_capacity(action.replicas as usize);
    for (replica, rows) in per_replica.iter().enumerate() {
        for &(time, red, blue) in rows {
            table.push(vec![
                replica as f64,
                time as f64,
                red as f64,
                blue as f64,
                red as f64 / (red + blue) as f64,
            ]);
        }
        let &(_, red, blue) = rows.last().expect("at least the start time is recorded");
        finals.push(red as f64 / (red + blue) as f64);
    }
    fs::write(config.out.join("urn.csv"), table.to_csv_string())
        .context("writing urn.csv")?;
    outputs.push("urn.csv".into());

    let dominance = finals.iter().filter(|&&p| p > 1.0 - 1e-3).count();
    if !action.immigration {
        warnings.push("immigration disabled: this is a pure Pólya urn, not the degree coupling".into());
    }
    let summary = json!({
        "replicas": action.replicas,
        "horizon": action.horizon,
        "start": { "red": start.red, "blue": start.blue, "time": start.time },
        "immigration": action.immigration,
        "sequential_double_draw": action.sequential_double_draw,
        "mean_final_proportion": stats::mean(&finals),
        "variance_final_proportion": stats::variance(&finals),
        "min_final_proportion": finals.iter().cloned().fold(f64::INFINITY, f64::min),
        "max_final_proportion": finals.iter().cloned().fold(0.0, f64::max),
        "dominance_share": dominance as f64 / finals.len() as f64,
    });
    write_json(&config.out, "summary.json", &summary)?;
    outputs.push("summary.json".into());
    Ok(EXIT_SUCCESS)
}
