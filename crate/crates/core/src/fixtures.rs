//! Seeded random instances and a small built-in catalogue.

use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::Result;
use crate::polytope::Polytope;
use crate::rng;
use crate::setfn::{hardness_instance, Coverage, GraphCut, HypergraphCut, Oracle, WithModular};

const TAG_FIXTURE: u64 = 0xf1;

fn weight(r: &mut rng::StreamRng) -> f64 {
    r.random_range(0.25..2.0)
}

/// Graph on `n` vertices, each pair an edge with probability `density`.
pub fn random_graph_cut(n: usize, density: f64, seed: u64) -> Result<Oracle> {
    let mut r = rng::stream(seed, &[TAG_FIXTURE, 0, n as u64]);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.random::<f64>() < density {
                edges.push((u, v, weight(&mut r)));
            }
        }
    }
    Ok(Oracle::new(GraphCut::new(n, edges)?))
}

/// `n` hyperedges of size 2 to 4.
pub fn random_hypergraph_cut(n: usize, seed: u64) -> Result<Oracle> {
    let mut r = rng::stream(seed, &[TAG_FIXTURE, 1, n as u64]);
    let hyperedges = (0..n)
        .map(|_| {
            let size = r.random_range(2..=4.min(n.max(2)));
            let e: Vec<usize> = index::sample(&mut r, n, size.min(n)).into_vec();
            (e, weight(&mut r))
        })
        .collect();
    Ok(Oracle::new(HypergraphCut::new(n, hyperedges)?))
}

/// Weighted coverage: `2n` universe items, each element covering each item
/// with probability 0.3.
pub fn random_coverage(n: usize, seed: u64) -> Result<Oracle> {
    let mut r = rng::stream(seed, &[TAG_FIXTURE, 2, n as u64]);
    let m = 2 * n;
    let weights = (0..m).map(|_| weight(&mut r)).collect();
    let membership = (0..n)
        .map(|_| (0..m).filter(|_| r.random::<f64>() < 0.3).collect())
        .collect();
    Ok(Oracle::new(Coverage::new(n, weights, membership)?))
}

/// Graph cut plus a random non-negative modular term: submodular, not
/// symmetric.
pub fn random_offset_cut(n: usize, seed: u64) -> Result<Oracle> {
    let cut = random_graph_cut(n, 0.5, rng::derive_seed(seed, &[TAG_FIXTURE, 3]))?;
    let mut r = rng::stream(seed, &[TAG_FIXTURE, 3, n as u64]);
    let offsets = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
    Ok(Oracle::new(WithModular::new(cut.function().clone(), offsets)?))
}

/// A symmetric instance: graph cut for even seeds, hypergraph cut for odd.
pub fn random_symmetric(n: usize, seed: u64) -> Result<Oracle> {
    if seed.is_multiple_of(2) {
        random_graph_cut(n, 0.5, seed)
    } else {
        random_hypergraph_cut(n, seed)
    }
}

/// A non-symmetric instance: coverage for even seeds, offset cut for odd.
pub fn random_general(n: usize, seed: u64) -> Result<Oracle> {
    if seed.is_multiple_of(2) {
        random_coverage(n, seed)
    } else {
        random_offset_cut(n, seed)
    }
}

/// Cardinality polytope for even seeds, otherwise a partition matroid with
/// two or three parts and some free elements.
pub fn random_matroid_polytope(n: usize, seed: u64) -> Result<Polytope> {
    let mut r = rng::stream(seed, &[TAG_FIXTURE, 4, n as u64]);
    if seed.is_multiple_of(2) || n < 3 {
        return Polytope::cardinality(n, r.random_range(1..=n.div_ceil(2)));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let count = if n >= 6 { 3 } else { 2 };
    let used = n - r.random_range(0..=n / 4);
    let mut parts = vec![Vec::new(); count];
    for (i, &u) in order[..used].iter().enumerate() {
        parts[i % count].push(u);
    }
    let bounds = parts.iter().map(|p| r.random_range(1..=p.len().max(1))).collect();
    Polytope::partition(n, parts, bounds)
}

/// Named small instances used by the self-check and the docs.
pub fn builtin() -> Vec<(&'static str, Oracle)> {
    let cut = |n, edges| Oracle::new(GraphCut::new(n, edges).expect("valid fixture"));
    vec![
        ("single_edge", cut(2, vec![(0, 1, 1.0)])),
        ("triangle", cut(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])),
        (
            "path5",
            cut(5, vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.5), (3, 4, 0.5)]),
        ),
        ("star6", cut(6, (1..6).map(|v| (0, v, 1.0)).collect())),
        (
            "hyper_square",
            Oracle::new(
                HypergraphCut::new(4, vec![(vec![0, 1, 2], 1.0), (vec![1, 2, 3], 2.0), (vec![0, 3], 1.0)])
                    .expect("valid fixture"),
            ),
        ),
        ("hardness_1_2", hardness_instance(1, 2).expect("valid fixture")),
        (
            "coverage5",
            Oracle::new(
                Coverage::new(
                    5,
                    vec![1.0, 2.0, 1.5, 0.5, 1.0, 3.0],
                    vec![vec![0, 1], vec![1, 2, 3], vec![3, 4], vec![0, 5], vec![2, 5]],
                )
                .expect("valid fixture"),
            ),
        ),
        (
            "offset_path4",
            Oracle::new(
                WithModular::new(
                    Arc::new(GraphCut::new(4, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).expect("valid fixture")),
                    vec![0.5, 0.0, 0.25, 1.0],
                )
                .expect("valid fixture"),
            ),
        ),
    ]
}
