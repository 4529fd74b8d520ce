//! Threshold bootstrap percolation on multigraph snapshots.
//!
//! Round 0 infects each vertex independently with probability `a/|V|`.
//! In every later round, each uninfected vertex counts the total edge
//! multiplicity it sends into the currently infected set — parallel edges
//! count once per copy — and becomes infected when that count reaches the
//! threshold r. Rounds are synchronous; the process stops at the first
//! round that adds nothing.
//!
//! Loop convention: a loop at v counts toward v's own threshold only when
//! v is already infected, i.e. loops never help an uninfected vertex
//! infect itself. Thresholds would otherwise be trivialized on this graph
//! family, where loops are routine.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edge_step::{Condition, EdgeStepFunction};
use crate::snapshot::GraphSnapshot;
use crate::{Error, Result};

fn default_round_cap() -> u32 {
    1_000
}

/// Infection parameters. `a` is the expected number of round-0 infections;
/// each vertex is seeded with probability `a/|V|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapParams {
    /// Infection threshold, at least 2.
    pub r: u32,
    /// Infection rate, in `[0, |V|]` of the target graph.
    pub a: f64,
    /// Safety bound on rounds; reaching it is reported as an anomaly,
    /// never silently truncated.
    #[serde(default = "default_round_cap")]
    pub round_cap: u32,
}

impl BootstrapParams {
    pub fn new(r: u32, a: f64) -> Result<Self> {
        let params = Self {
            r,
            a,
            round_cap: default_round_cap(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 2 {
            return Err(Error::InvalidParameter(format!(
                "bootstrap threshold must be at least 2, got {}",
                self.r
            )));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "infection rate must be a finite nonnegative real, got {}",
                self.a
            )));
        }
        if self.round_cap == 0 {
            return Err(Error::InvalidParameter("round cap must be positive".into()));
        }
        Ok(())
    }
}

/// Per-vertex neighbor multiplicities in compressed form: `entries(v)`
/// lists each neighbor of v once together with the number of parallel
/// edges. A loop at v appears as a self-entry with multiplicity 2 per copy,
/// which the round logic never counts for an uninfected v.
#[derive(Clone, Debug)]
pub struct NeighborMap {
    offsets: Vec<usize>,
    entries: Vec<(u32, u32)>,
}

impl NeighborMap {
    pub fn build(snap: &GraphSnapshot) -> Self {
        let n = snap.vertex_count() as usize;
        // Slot counts: every endpoint occurrence contributes one raw slot.
        let mut counts = vec![0usize; n];
        for &v in snap.endpoints() {
            counts[v as usize - 1] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for v in 0..n {
            offsets.push(offsets[v] + counts[v]);
        }
        let mut raw = vec![0u32; offsets[n]];
        let mut cursor = offsets.clone();
        for (u, v) in snap.edges() {
            raw[cursor[u as usize - 1]] = v;
            cursor[u as usize - 1] += 1;
            raw[cursor[v as usize - 1]] = u;
            cursor[v as usize - 1] += 1;
        }
        // Run-length encode each vertex's sorted neighbor list.
        let mut entries = Vec::with_capacity(offsets[n]);
        let mut compact_offsets = Vec::with_capacity(n + 1);
        compact_offsets.push(0);
        for v in 0..n {
            let slice = &mut raw[offsets[v]..offsets[v + 1]];
            slice.sort_unstable();
            let mut iter = slice.iter().peekable();
            while let Some(&w) = iter.next() {
                let mut mult = 1u32;
                while iter.peek() == Some(&&w) {
                    iter.next();
                    mult += 1;
                }
                entries.push((w, mult));
            }
            compact_offsets.push(entries.len());
        }
        Self {
            offsets: compact_offsets,
            entries,
        }
    }

    pub fn vertex_count(&self) -> u32 {
        (self.offsets.len() - 1) as u32
    }

    /// `(neighbor, multiplicity)` pairs of v, sorted by neighbor id.
    pub fn entries(&self, v: u32) -> &[(u32, u32)] {
        &self.entries[self.offsets[v as usize - 1]..self.offsets[v as usize]]
    }
}

/// Infection state after some number of synchronous rounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfectionState {
    infected: Vec<bool>,
    /// Edge multiplicity each uninfected vertex sends into the infected
    /// set; maintained incrementally as frontiers are processed.
    counts: Vec<u32>,
    /// Vertices infected in the most recent round, not yet propagated.
    frontier: Vec<u32>,
    round: u32,
    newly_infected_per_round: Vec<u32>,
    infected_count: u32,
}

impl InfectionState {
    fn from_seeds(vertex_count: u32, seeds: Vec<u32>) -> Self {
        let mut infected = vec![false; vertex_count as usize];
        for &v in &seeds {
            infected[v as usize - 1] = true;
        }
        Self {
            infected,
            counts: vec![0; vertex_count as usize],
            newly_infected_per_round: vec![seeds.len() as u32],
            infected_count: seeds.len() as u32,
            frontier: seeds,
            round: 0,
        }
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn infected_count(&self) -> u32 {
        self.infected_count
    }

    pub fn is_infected(&self, v: u32) -> bool {
        self.infected[v as usize - 1]
    }

    pub fn infected_ids(&self) -> Vec<u32> {
        self.infected
            .iter()
            .enumerate()
            .filter(|(_, &i)| i)
            .map(|(idx, _)| idx as u32 + 1)
            .collect()
    }

    /// Newly infected counts per round, starting with the round-0 seed.
    pub fn newly_infected_per_round(&self) -> &[u32] {
        &self.newly_infected_per_round
    }
}

/// Bernoulli(a/|V|) seeding, one independent coin per vertex.
pub fn seed_infection(
    snap: &GraphSnapshot,
    params: &BootstrapParams,
    rng: &mut ChaCha8Rng,
) -> Result<InfectionState> {
    params.validate()?;
    let n = snap.vertex_count();
    if params.a > n as f64 {
        return Err(Error::InvalidParameter(format!(
            "infection rate {} exceeds the vertex count {n}",
            params.a
        )));
    }
    let p = params.a / n as f64;
    let seeds: Vec<u32> = (1..=n).filter(|_| rng.random::<f64>() < p).collect();
    Ok(InfectionState::from_seeds(n, seeds))
}

/// Seeds an explicit vertex set; used by the exhaustive and coupling tests.
pub fn seed_from_set(snap: &GraphSnapshot, ids: &[u32]) -> Result<InfectionState> {
    let n = snap.vertex_count();
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.iter().any(|&v| v == 0 || v > n) {
        return Err(Error::InvalidParameter(format!(
            "seed ids must lie in 1..={n}"
        )));
    }
    Ok(InfectionState::from_seeds(n, sorted))
}

/// One synchronous round: infects every uninfected vertex whose edge
/// multiplicity into the current infected set is at least r. Returns the
/// number of vertices added; 0 means the process has stabilized (and the
/// round counter does not advance).
pub fn infection_round(map: &NeighborMap, r: u32, state: &mut InfectionState) -> u32 {
    let frontier = std::mem::take(&mut state.frontier);
    let mut next = Vec::new();
    for &u in &frontier {
        for &(w, mult) in map.entries(u) {
            let idx = w as usize - 1;
            if state.infected[idx] {
                continue;
            }
            let before = state.counts[idx];
            state.counts[idx] = before + mult;
            if before < r && state.counts[idx] >= r {
                next.push(w);
            }
        }
    }
    if next.is_empty() {
        return 0;
    }
    next.sort_unstable();
    for &v in &next {
        state.infected[v as usize - 1] = true;
    }
    state.round += 1;
    state.infected_count += next.len() as u32;
    state.newly_infected_per_round.push(next.len() as u32);
    let added = next.len() as u32;
    state.frontier = next;
    added
}

/// Outcome of a full run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfectionResult {
    pub initial_infected: u32,
    pub final_infected: u32,
    /// |I_∞| / |V|.
    pub fraction: f64,
    /// Rounds that added at least one vertex.
    pub rounds: u32,
    /// First round s with |I_s| ≥ |I_∞|/2 (0 when the seed already covers
    /// half of the final set).
    pub rounds_to_half_final: u32,
    /// The round cap was reached while the infection was still growing.
    pub hit_round_cap: bool,
    pub newly_infected_per_round: Vec<u32>,
    /// Final infected indicator, by vertex id − 1.
    pub infected: Vec<bool>,
}

/// Iterates rounds from an already-seeded state until stabilization or the
/// round cap.
pub fn run_from_state(
    map: &NeighborMap,
    params: &BootstrapParams,
    mut state: InfectionState,
) -> InfectionResult {
    let mut hit_round_cap = false;
    loop {
        if state.round >= params.round_cap {
            // Only an anomaly if another round would still add vertices.
            let mut probe = state.clone();
            hit_round_cap = infection_round(map, params.r, &mut probe) > 0;
            break;
        }
        if infection_round(map, params.r, &mut state) == 0 {
            break;
        }
    }
    let final_infected = state.infected_count;
    let mut cumulative = 0u64;
    let mut rounds_to_half_final = 0;
    for (round, &added) in state.newly_infected_per_round.iter().enumerate() {
        cumulative += added as u64;
        if 2 * cumulative >= final_infected as u64 {
            rounds_to_half_final = round as u32;
            break;
        }
    }
    InfectionResult {
        initial_infected: state.newly_infected_per_round[0],
        final_infected,
        fraction: final_infected as f64 / state.infected.len() as f64,
        rounds: state.round,
        rounds_to_half_final,
        hit_round_cap,
        newly_infected_per_round: state.newly_infected_per_round,
        infected: state.infected,
    }
}

/// Seeds and runs to stabilization. Deterministic given (snapshot, params,
/// rng state).
pub fn run_to_stabilization(
    snap: &GraphSnapshot,
    params: &BootstrapParams,
    rng: &mut ChaCha8Rng,
) -> Result<InfectionResult> {
    let state = seed_infection(snap, params, rng)?;
    let map = NeighborMap::build(snap);
    Ok(run_from_state(&map, params, state))
}

/// Structural features behind the outbreak argument: the best star
/// candidate and the high-degree core.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    /// Maximum-degree vertex — by definition the best star candidate.
    pub star_vertex: u32,
    pub star_degree: u32,
    /// Degree a star needs: 2·r²·t·f(a)·ln(a).
    pub star_threshold: f64,
    pub star_meets_threshold: bool,
    /// Core membership bound g(t) = 1/f(t).
    pub degree_threshold_g: f64,
    /// Number of vertices with degree ≥ g(t).
    pub core_size: u32,
    pub core_degree_sum: u64,
    /// Whether the core carries at least half of the total degree budget t.
    pub core_meets_half: bool,
    /// Set when f is not classified as satisfying the summability
    /// condition the outbreak argument needs.
    pub classification_warning: Option<String>,
}

/// Reports the star and core structure of a snapshot with respect to the
/// generating f, the infection rate a, and the threshold r.
///
/// The star degree requirement is a two-constant bound in the underlying
/// argument whose constants cancel: with h(x) = C₁·g(x)/(2r²·C₂·ln x) the
/// requirement C₁·t/(C₂·h(a)) reduces to 2·r²·t·f(a)·ln(a) exactly.
pub fn structure_report(
    snap: &GraphSnapshot,
    f: &EdgeStepFunction,
    a: f64,
    r: u32,
) -> Result<StructureReport> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!(
            "bootstrap threshold must be at least 2, got {r}"
        )));
    }
    if !(a > 1.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "the star threshold needs a rate a > 1, got {a}"
        )));
    }
    let t = snap.time();
    let degrees = snap.degrees();
    let (star_idx, &star_degree) = degrees
        .iter()
        .enumerate()
        .max_by_key(|(_, &d)| d)
        .expect("snapshot has at least one vertex");
    let star_threshold = 2.0 * (r as f64).powi(2) * t as f64 * f.evaluate_real(a) * a.ln();
    let degree_threshold_g = 1.0 / f.evaluate(t.max(1));
    let core: Vec<u64> = degrees
        .iter()
        .filter(|&&d| d as f64 >= degree_threshold_g)
        .map(|&d| d as u64)
        .collect();
    let core_degree_sum: u64 = core.iter().sum();
    let report = f.classify(t);
    let classification_warning = if report.condition_s == Condition::Holds {
        None
    } else {
        Some(format!(
            "edge-step function is not summability-classified (condition_s: {:?}); \
             the outbreak structure bounds assume it",
            report.condition_s
        ))
    };
    Ok(StructureReport {
        star_vertex: star_idx as u32 + 1,
        star_degree,
        star_threshold,
        star_meets_threshold: star_degree as f64 >= star_threshold,
        degree_threshold_g,
        core_size: core.len() as u32,
        core_degree_sum,
        core_meets_half: 2 * core_degree_sum >= t,
        classification_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{replica_rng, stream_rng};
    use crate::stats;

    fn path(n: u32) -> GraphSnapshot {
        let edges: Vec<(u32, u32)> = (1..n).map(|v| (v, v + 1)).collect();
        GraphSnapshot::from_edges(n, &edges).unwrap()
    }

    fn complete(n: u32) -> GraphSnapshot {
        let mut edges = Vec::new();
        for u in 1..=n {
            for v in u + 1..=n {
                edges.push((u, v));
            }
        }
        GraphSnapshot::from_edges(n, &edges).unwrap()
    }

    fn star(leaves: u32) -> GraphSnapshot {
        let edges: Vec<(u32, u32)> = (2..=leaves + 1).map(|v| (1, v)).collect();
        GraphSnapshot::from_edges(leaves + 1, &edges).unwrap()
    }

    /// Independent reference: synchronous closure recomputed from the edge
    /// list every round, no neighbor map, no incremental counts.
    fn brute_force_closure(snap: &GraphSnapshot, seeds: &[u32], r: u32) -> Vec<bool> {
        let n = snap.vertex_count();
        let mut infected = vec![false; n as usize];
        for &v in seeds {
            infected[v as usize - 1] = true;
        }
        loop {
            let mut added = false;
            let mut next = infected.clone();
            for v in 1..=n {
                if infected[v as usize - 1] {
                    continue;
                }
                let mut count = 0;
                for (x, y) in snap.edges() {
                    if x == v && y != v && infected[y as usize - 1] {
                        count += 1;
                    }
                    if y == v && x != v && infected[x as usize - 1] {
                        count += 1;
                    }
                }
                if count >= r {
                    next[v as usize - 1] = true;
                    added = true;
                }
            }
            infected = next;
            if !added {
                return infected;
            }
        }
    }

    fn run_with_seeds(snap: &GraphSnapshot, seeds: &[u32], r: u32) -> InfectionResult {
        let params = BootstrapParams::new(r, 0.0).unwrap();
        let map = NeighborMap::build(snap);
        run_from_state(&map, &params, seed_from_set(snap, seeds).unwrap())
    }

    #[test]
    fn params_validate() {
        assert!(BootstrapParams::new(1, 1.0).is_err());
        assert!(BootstrapParams::new(2, -1.0).is_err());
        assert!(BootstrapParams::new(2, f64::NAN).is_err());
        assert!(BootstrapParams::new(2, 0.0).is_ok());
    }

    #[test]
    fn neighbor_map_multiplicities() {
        let snap =
            GraphSnapshot::from_edges(3, &[(1, 2), (1, 2), (2, 3), (1, 1)]).unwrap();
        let map = NeighborMap::build(&snap);
        assert_eq!(map.entries(1), &[(1, 2), (2, 2)]);
        assert_eq!(map.entries(2), &[(1, 2), (3, 1)]);
        assert_eq!(map.entries(3), &[(2, 1)]);
    }

    #[test]
    fn seeding_edge_cases() {
        let snap = path(10);
        let mut rng = replica_rng(1, 0);
        let all = BootstrapParams::new(2, 10.0).unwrap();
        let state = seed_infection(&snap, &all, &mut rng).unwrap();
        assert_eq!(state.infected_count(), 10);

        let none = BootstrapParams::new(2, 0.0).unwrap();
        let state = seed_infection(&snap, &none, &mut rng).unwrap();
        assert_eq!(state.infected_count(), 0);
        let result = run_from_state(&NeighborMap::build(&snap), &none, state);
        assert_eq!(result.final_infected, 0);
        assert_eq!(result.rounds, 0);
        assert_eq!(result.fraction, 0.0);

        let too_big = BootstrapParams::new(2, 11.0).unwrap();
        assert!(seed_infection(&snap, &too_big, &mut rng).is_err());
    }

    #[test]
    fn seed_count_is_binomial() {
        let snap = path(1_000);
        let params = BootstrapParams::new(2, 10.0).unwrap();
        let trials = 10_000;
        let mut rng = replica_rng(2, 0);
        let sizes: Vec<f64> = (0..trials)
            .map(|_| seed_infection(&snap, &params, &mut rng).unwrap().infected_count() as f64)
            .collect();
        let mean = stats::mean(&sizes);
        let se = (10.0 * 0.99 / trials as f64).sqrt();
        assert!((mean - 10.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn multiplicity_reaches_threshold() {
        // v=2 connects to u=1 with r parallel edges: one infected neighbor
        // suffices when the multiplicity is there.
        let snap = GraphSnapshot::from_edges(3, &[(1, 2), (1, 2), (2, 3)]).unwrap();
        let result = run_with_seeds(&snap, &[1], 2);
        assert!(result.infected[1], "multiplicity 2 must infect");
        assert!(!result.infected[2], "single edge must not infect at r=2");

        // r−1 copies are not enough.
        let snap = GraphSnapshot::from_edges(2, &[(1, 2), (1, 2)]).unwrap();
        let result = run_with_seeds(&snap, &[1], 3);
        assert_eq!(result.final_infected, 1);
    }

    #[test]
    fn loops_never_help_uninfected_vertices() {
        // Vertex 2 carries three loops and one edge to the infected vertex:
        // still below r=2 because its own loops do not count.
        let snap =
            GraphSnapshot::from_edges(2, &[(1, 2), (2, 2), (2, 2), (2, 2)]).unwrap();
        let result = run_with_seeds(&snap, &[1], 2);
        assert_eq!(result.final_infected, 1);
    }

    #[test]
    fn path_spread_requires_two_infected_neighbors() {
        // On a path with r=2, a vertex is added exactly when both its
        // neighbors are already infected; seeds {1,3} infect vertex 2 and
        // nothing else.
        let snap = path(5);
        let result = run_with_seeds(&snap, &[1, 3], 2);
        assert_eq!(result.infected, vec![true, true, true, false, false]);
        assert_eq!(result.rounds, 1);

        // Adjacent seeds cannot spread at all.
        let result = run_with_seeds(&snap, &[1, 2], 2);
        assert_eq!(result.final_infected, 2);
        assert_eq!(result.rounds, 0);
    }

    #[test]
    fn star_center_infects_but_leaves_stay() {
        let snap = star(5);
        let result = run_with_seeds(&snap, &[2, 3], 2);
        assert!(result.infected[0], "center sees two infected leaves");
        assert_eq!(result.final_infected, 3);
        assert_eq!(result.rounds, 1);
    }

    #[test]
    fn complete_graph_infects_in_one_round() {
        let result = run_with_seeds(&complete(4), &[1, 2], 2);
        assert_eq!(result.final_infected, 4);
        assert_eq!(result.rounds, 1);
        // The two seeds already cover half of the final set.
        assert_eq!(result.rounds_to_half_final, 0);
    }

    #[test]
    fn matches_brute_force_closure_on_all_seeds() {
        let f = EdgeStepFunction::constant(0.5).unwrap();
        let mut g = crate::generator::Multigraph::init();
        let mut rng = replica_rng(42, 0);
        for _ in 0..11 {
            g.step(&f, &mut rng);
        }
        let generated = g.to_snapshot();
        assert!(generated.vertex_count() <= 12);

        let with_parallels =
            GraphSnapshot::from_edges(5, &[(1, 2), (1, 2), (2, 3), (3, 3), (4, 5), (2, 4), (2, 4), (1, 5)])
                .unwrap();
        let fixtures = [path(5), complete(4), star(5), with_parallels, generated];
        for snap in &fixtures {
            let n = snap.vertex_count();
            let map = NeighborMap::build(snap);
            for r in [2u32, 3] {
                let params = BootstrapParams::new(r, 0.0).unwrap();
                for mask in 0u32..(1 << n) {
                    let seeds: Vec<u32> =
                        (1..=n).filter(|v| mask & (1 << (v - 1)) != 0).collect();
                    let ours =
                        run_from_state(&map, &params, seed_from_set(snap, &seeds).unwrap());
                    let reference = brute_force_closure(snap, &seeds, r);
                    assert_eq!(
                        ours.infected, reference,
                        "V={n}, r={r}, seeds {seeds:?}"
                    );
                    assert!(!ours.hit_round_cap);
                }
            }
        }
    }

    #[test]
    fn infection_is_monotone_in_rate() {
        // Nested seeds via shared uniforms: larger a seeds a superset, and
        // the dynamics preserve the inclusion.
        let f = EdgeStepFunction::power_law(1.0, 0.5).unwrap();
        let mut g = crate::generator::Multigraph::init();
        let mut rng = replica_rng(7, 0);
        for _ in 0..499 {
            g.step(&f, &mut rng);
        }
        let snap = g.to_snapshot();
        let n = snap.vertex_count();
        let map = NeighborMap::build(&snap);
        let mut seed_rng = stream_rng(7, 0, 1);
        let uniforms: Vec<f64> = (0..n).map(|_| seed_rng.random()).collect();
        let mut previous: Option<Vec<bool>> = None;
        for a in [2.0, 5.0, 20.0, 60.0] {
            let p = a / n as f64;
            let seeds: Vec<u32> = (1..=n).filter(|&v| uniforms[v as usize - 1] < p).collect();
            let params = BootstrapParams::new(2, a).unwrap();
            let result =
                run_from_state(&map, &params, seed_from_set(&snap, &seeds).unwrap());
            if let Some(prev) = &previous {
                for v in 0..n as usize {
                    assert!(result.infected[v] || !prev[v], "lost vertex {} at a={a}", v + 1);
                }
            }
            previous = Some(result.infected);
        }
    }

    #[test]
    fn fixed_point_is_stable() {
        let snap = complete(6);
        let map = NeighborMap::build(&snap);
        let params = BootstrapParams::new(2, 0.0).unwrap();
        let mut state = seed_from_set(&snap, &[1, 2]).unwrap();
        while infection_round(&map, params.r, &mut state) > 0 {}
        let before = state.clone();
        assert_eq!(infection_round(&map, params.r, &mut state), 0);
        assert_eq!(state, before);
    }

    #[test]
    fn determinism_given_seed() {
        let snap = complete(20);
        let params = BootstrapParams::new(2, 3.0).unwrap();
        let a = run_to_stabilization(&snap, &params, &mut replica_rng(9, 3)).unwrap();
        let b = run_to_stabilization(&snap, &params, &mut replica_rng(9, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn round_cap_is_reported_not_hidden() {
        // A chain of doubled edges crawls one vertex per round.
        let mut edges = Vec::new();
        for v in 1..10u32 {
            edges.push((v, v + 1));
            edges.push((v, v + 1));
        }
        let snap = GraphSnapshot::from_edges(10, &edges).unwrap();
        let map = NeighborMap::build(&snap);

        let full = BootstrapParams::new(2, 0.0).unwrap();
        let result = run_from_state(&map, &full, seed_from_set(&snap, &[1]).unwrap());
        assert_eq!(result.final_infected, 10);
        assert_eq!(result.rounds, 9);
        assert!(!result.hit_round_cap);
        // |I_s| = s+1; half of the final 10 is first reached at round 4.
        assert_eq!(result.rounds_to_half_final, 4);

        let mut capped = full;
        capped.round_cap = 5;
        let result = run_from_state(&map, &capped, seed_from_set(&snap, &[1]).unwrap());
        assert!(result.hit_round_cap);
        assert_eq!(result.rounds, 5);
        assert_eq!(result.final_infected, 6);
    }

    #[test]
    fn structure_report_hand_values() {
        // Degrees: 1→3, 2→4, 3→3, 4→1, 5→1 on t=6 edges.
        let snap =
            GraphSnapshot::from_edges(5, &[(1, 2), (1, 2), (2, 3), (3, 3), (1, 4), (2, 5)])
                .unwrap();
        let f = EdgeStepFunction::power_law(1.0, 0.5).unwrap();
        let report = structure_report(&snap, &f, 4.0, 2).unwrap();
        assert_eq!(report.star_vertex, 2);
        assert_eq!(report.star_degree, 4);
        // 2·r²·t·f(4)·ln 4 = 2·4·6·0.5·ln 4 = 24·ln 4.
        assert!((report.star_threshold - 24.0 * 4f64.ln()).abs() < 1e-12);
        assert!(!report.star_meets_threshold);
        // g(6) = 1/f(6) = √6 ≈ 2.449: the core is every vertex of degree ≥ 3.
        assert!((report.degree_threshold_g - 6f64.sqrt()).abs() < 1e-12);
        assert_eq!(report.core_size, 3);
        assert_eq!(report.core_degree_sum, 10);
        assert!(report.core_meets_half);
        assert!(report.classification_warning.is_none());

        // Constant f fails the summability condition: warned, not an error.
        let constant = EdgeStepFunction::constant(0.5).unwrap();
        let report = structure_report(&snap, &constant, 4.0, 2).unwrap();
        assert!(report.classification_warning.is_some());

        assert!(structure_report(&snap, &f, 1.0, 2).is_err());
        assert!(structure_report(&snap, &f, 4.0, 1).is_err());
    }

    #[test]
    fn empty_core_is_reported_without_error() {
        // f tiny at t: g(t) = 1/f(t) far above every degree.
        let snap = path(4);
        let f = EdgeStepFunction::tabulated(vec![0.01], crate::edge_step::TailRule::HoldLast)
            .unwrap();
        let report = structure_report(&snap, &f, 2.0, 2).unwrap();
        assert_eq!(report.core_size, 0);
        assert_eq!(report.core_degree_sum, 0);
        assert!(!report.core_meets_half);
    }
}
