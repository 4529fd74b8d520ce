//! Exact finite-horizon laws by exhaustive enumeration with rational
//! arithmetic.
//!
//! For small t the process has few enough outcomes to enumerate every
//! branch of {vertex-step, edge-step} × endpoint choices and carry exact
//! `BigRational` probabilities. These distributions are the oracles the
//! Monte-Carlo samplers are checked against: no simulation, no rounding,
//! and the probabilities sum to exactly 1.
//!
//! Edge-step probabilities enter as exact rationals via a caller-supplied
//! closure, so constant f = p with rational p is represented without any
//! floating-point round-off.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact probability type used throughout the enumerations.
pub type Rational = BigRational;

/// Convenience constructor for small rationals.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

fn add_mass(map: &mut BTreeMap<u64, Rational>, key: u64, mass: Rational) {
    if !mass.is_zero() {
        *map.entry(key).or_insert_with(Rational::zero) += mass;
    }
}

/// The exact law of `d_t(1)`, the degree of the initial vertex at time t.
///
/// Given the past, the one-step distribution of the increment depends only
/// on the current degree d and the time t (the total degree is the
/// deterministic 2t), so the degree is a Markov chain on the integers:
/// with q = f(t+1) and x = d/2t,
///
/// * +1 with probability q·x + (1−q)·2x(1−x),
/// * +2 with probability (1−q)·x²,
/// * 0 otherwise.
///
/// `f(s)` must return the exact edge-step probability at step s.
pub fn degree_of_one_distribution(
    f: impl Fn(u64) -> Rational,
    t_max: u64,
) -> BTreeMap<u64, Rational> {
    let mut dist = BTreeMap::from([(2u64, Rational::one())]);
    for t in 1..t_max {
        let q = f(t + 1);
        let total = ratio(2 * t as i64, 1);
        let mut next = BTreeMap::new();
        for (&d, p) in &dist {
            let x = ratio(d as i64, 1) / &total;
            let up_one = &q * &x + (Rational::one() - &q) * ratio(2, 1) * &x * (Rational::one() - &x);
            let up_two = (Rational::one() - &q) * &x * &x;
            let stay = Rational::one() - &up_one - &up_two;
            add_mass(&mut next, d + 1, p * up_one);
            add_mass(&mut next, d + 2, p * up_two);
            add_mass(&mut next, d, p * stay);
        }
        dist = next;
    }
    dist
}

/// Canonical labeled multigraph: edges as (min, max) pairs, sorted.
/// Vertices are labeled by birth order, so two runs produce the same key
/// exactly when they built the same graph.
pub type EdgeMultiset = Vec<(u32, u32)>;

fn canonical_push(edges: &EdgeMultiset, u: u32, v: u32) -> EdgeMultiset {
    let mut next = edges.clone();
    next.push((u.min(v), u.max(v)));
    next.sort_unstable();
    next
}

/// Degree sequence (by vertex id) of a canonical edge multiset.
pub fn degrees_of(edges: &EdgeMultiset) -> Vec<u64> {
    // Pairs are stored (min, max), so the largest second component is the
    // largest vertex id; every vertex of this process carries an edge.
    let max_vertex = edges.iter().map(|&(_, v)| v).max().unwrap_or(1);
    let mut degrees = vec![0u64; max_vertex as usize];
    for &(u, v) in edges {
        degrees[u as usize - 1] += 1;
        degrees[v as usize - 1] += 1;
    }
    degrees
}

/// The exact law of the whole labeled multigraph at time t: every sequence
/// of step types and endpoint choices is expanded, and outcomes are merged
/// by their canonical edge multiset. Feasible for t ≤ 5 or so; the oracle
/// use case is t ≤ 4.
pub fn multigraph_distribution(
    f: impl Fn(u64) -> Rational,
    t_max: u64,
) -> BTreeMap<EdgeMultiset, Rational> {
    let mut dist = BTreeMap::from([(vec![(1u32, 1u32)], Rational::one())]);
    for t in 1..t_max {
        let q = f(t + 1);
        let not_q = Rational::one() - &q;
        let total = ratio(2 * t as i64, 1);
        let mut next: BTreeMap<EdgeMultiset, Rational> = BTreeMap::new();
        for (edges, p) in &dist {
            let degrees = degrees_of(edges);
            let new_vertex = degrees.len() as u32 + 1;
            for (idx, &du) in degrees.iter().enumerate() {
                if du == 0 {
                    continue;
                }
                let u = idx as u32 + 1;
                let pu = ratio(du as i64, 1) / &total;
                // Vertex-step: newcomer attaches to u.
                let key = canonical_push(edges, u, new_vertex);
                *next.entry(key).or_insert_with(Rational::zero) += p * &q * &pu;
                // Edge-step: ordered endpoint pairs (u, v).
                for (jdx, &dv) in degrees.iter().enumerate() {
                    if dv == 0 {
                        continue;
                    }
                    let v = jdx as u32 + 1;
                    let pv = ratio(dv as i64, 1) / &total;
                    let key = canonical_push(edges, u, v);
                    *next.entry(key).or_insert_with(Rational::zero) += p * &not_q * &pu * &pv;
                }
            }
        }
        dist = next;
    }
    dist
}

/// Marginal law of `d_t(1)` implied by a full multigraph distribution.
pub fn marginal_degree_of_one(
    dist: &BTreeMap<EdgeMultiset, Rational>,
) -> BTreeMap<u64, Rational> {
    let mut out = BTreeMap::new();
    for (edges, p) in dist {
        add_mass(&mut out, degrees_of(edges)[0], p.clone());
    }
    out
}

/// The exact law of the red count in the immigrated Pólya urn after running
/// from `(red, blue)` at time `t0` to time `t_max`.
///
/// One urn step at time t, with immigration probability q = f(t+1):
///
/// * immigration: one draw against the current composition; the drawn
///   color's ball is added, plus one blue (the newcomer);
/// * otherwise: two draws, each adding a ball of its drawn color. With
///   `sequential` unset both draws see the pre-step composition; set, the
///   second draw sees the first added ball.
pub fn urn_distribution(
    f: impl Fn(u64) -> Rational,
    start: (u64, u64),
    t0: u64,
    t_max: u64,
    sequential: bool,
) -> BTreeMap<u64, Rational> {
    assert!(start.0 + start.1 > 0, "urn must start with at least one ball");
    assert!(t0 >= 1 && t_max >= t0);
    let mut dist = BTreeMap::from([(start.0, Rational::one())]);
    let mut total = start.0 + start.1;
    for t in t0..t_max {
        let q = f(t + 1);
        let not_q = Rational::one() - &q;
        let mut next = BTreeMap::new();
        for (&red, p) in &dist {
            let x = ratio(red as i64, total as i64);
            // Immigration: red +1 iff a red ball is drawn.
            add_mass(&mut next, red + 1, p * &q * &x);
            add_mass(&mut next, red, p * &q * (Rational::one() - &x));
            if sequential {
                // First draw, then the urn grows by that ball.
                let second = |r: u64| ratio(r as i64, total as i64 + 1);
                let red_then = &x * second(red + 1);
                let red_blue = &x * (Rational::one() - second(red + 1));
                let blue_red = (Rational::one() - &x) * second(red);
                let blue_blue =
                    (Rational::one() - &x) * (Rational::one() - second(red));
                add_mass(&mut next, red + 2, p * &not_q * red_then);
                add_mass(&mut next, red + 1, p * &not_q * (red_blue + blue_red));
                add_mass(&mut next, red, p * &not_q * blue_blue);
            } else {
                // Two independent draws against the pre-step composition:
                // the same kernel as the graph's edge-step.
                let up_two = &x * &x;
                let up_one = ratio(2, 1) * &x * (Rational::one() - &x);
                let stay = (Rational::one() - &x) * (Rational::one() - &x);
                add_mass(&mut next, red + 2, p * &not_q * up_two);
                add_mass(&mut next, red + 1, p * &not_q * up_one);
                add_mass(&mut next, red, p * &not_q * stay);
            }
        }
        dist = next;
        total += 2;
    }
    dist
}

/// Mean of a scalar exact distribution.
pub fn mean(dist: &BTreeMap<u64, Rational>) -> Rational {
    dist.iter()
        .map(|(&k, p)| ratio(k as i64, 1) * p)
        .fold(Rational::zero(), |acc, x| acc + x)
}

/// Total probability mass; exactly 1 for any correct enumeration.
pub fn total_mass<K>(dist: &BTreeMap<K, Rational>) -> Rational {
    dist.values().fold(Rational::zero(), |acc, p| acc + p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half(_: u64) -> Rational {
        ratio(1, 2)
    }

    #[test]
    fn degree_law_at_small_times() {
        // One step from d=2 at t=1: the single draw hits vertex 1 surely,
        // so d → 3 under a vertex-step, d → 4 under an edge-step.
        let dist = degree_of_one_distribution(half, 2);
        assert_eq!(dist[&3], ratio(1, 2));
        assert_eq!(dist[&4], ratio(1, 2));
        assert!(total_mass(&dist).is_one());

        // Two steps: condition on the t=2 outcome.
        // From d=3 (total 4): +1 w.p. 1/2·3/4 + 1/2·2·(3/4)(1/4) = 9/16,
        //   +2 w.p. 1/2·9/16 = 9/32, stay 5/32.
        // From d=4 (total 4): x=1 → +1 w.p. 1/2, +2 w.p. 1/2.
        let dist = degree_of_one_distribution(half, 3);
        assert_eq!(dist[&3], ratio(5, 64)); // 1/2 · 5/32
        assert_eq!(dist[&4], ratio(9, 32)); // 1/2 · 9/16
        assert_eq!(dist[&5], ratio(1, 2) * ratio(9, 32) + ratio(1, 2) * ratio(1, 2));
        assert_eq!(dist[&6], ratio(1, 4));
        assert!(total_mass(&dist).is_one());
    }

    #[test]
    fn multigraph_law_one_step() {
        let dist = multigraph_distribution(half, 2);
        // Vertex-step: loop at 1 plus pendant edge to vertex 2.
        assert_eq!(dist[&vec![(1, 1), (1, 2)]], ratio(1, 2));
        // Edge-step: both endpoints must be vertex 1 — a double loop.
        assert_eq!(dist[&vec![(1, 1), (1, 1)]], ratio(1, 2));
        assert_eq!(dist.len(), 2);
        assert!(total_mass(&dist).is_one());
    }

    #[test]
    fn multigraph_marginal_agrees_with_scalar_chain() {
        // Two independently coded enumerations of the same model must give
        // identical d_t(1) laws, exactly.
        for t in 2..=4u64 {
            let via_graph = marginal_degree_of_one(&multigraph_distribution(half, t));
            let via_chain = degree_of_one_distribution(half, t);
            assert_eq!(via_graph, via_chain, "t={t}");
        }
        let third = |_: u64| ratio(1, 3);
        assert_eq!(
            marginal_degree_of_one(&multigraph_distribution(third, 4)),
            degree_of_one_distribution(third, 4)
        );
    }

    #[test]
    fn multigraph_masses_sum_to_one_exactly() {
        let dist = multigraph_distribution(half, 4);
        assert!(total_mass(&dist).is_one());
        assert!(dist.len() > 5, "t=4 supports several outcomes");
    }

    #[test]
    fn urn_without_immigration_preserves_red_fraction() {
        // A pure Pólya urn from (1, 1): the expected red fraction stays 1/2.
        let never = |_: u64| ratio(0, 1);
        for sequential in [false, true] {
            let dist = urn_distribution(never, (1, 1), 1, 6, sequential);
            assert!(total_mass(&dist).is_one());
            let expected_total = 2 + 2 * 5; // (1+1) plus two balls per step
            assert_eq!(mean(&dist), ratio(expected_total / 2, 1));
        }
    }

    #[test]
    fn urn_matches_degree_chain_from_graph_start() {
        // Started at (2, 0) — mirroring the initial loop — the parallel-draw
        // urn has exactly the degree chain's law.
        let dist_urn = urn_distribution(half, (2, 0), 1, 5, false);
        let dist_deg = degree_of_one_distribution(half, 5);
        assert_eq!(dist_urn, dist_deg);
    }

    #[test]
    fn sequential_variant_differs_from_parallel() {
        let parallel = urn_distribution(half, (2, 0), 1, 3, false);
        let sequential = urn_distribution(half, (2, 0), 1, 3, true);
        assert_ne!(parallel, sequential);
        assert!(total_mass(&sequential).is_one());
    }
}
