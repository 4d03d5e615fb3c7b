//! Down-monotone solvable polytopes: cardinality, partition matroid and a
//! single knapsack constraint.
//!
//! ```json
//! {"type": "cardinality", "k": 2}
//! {"type": "partition", "parts": [[0, 1], [2, 3, 4]], "bounds": [1, 2]}
//! {"type": "knapsack", "a": [1.0, 2.0], "b": 2.0}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilinear::Point;
use crate::setfn::GroundSet;

pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolytopeSpec {
    Cardinality { k: usize },
    Partition { parts: Vec<Vec<usize>>, bounds: Vec<usize> },
    Knapsack { a: Vec<f64>, b: f64 },
}

impl PolytopeSpec {
    pub fn build(&self, n: usize) -> Result<Polytope> {
        match self.clone() {
            PolytopeSpec::Cardinality { k } => Polytope::cardinality(n, k),
            PolytopeSpec::Partition { parts, bounds } => Polytope::partition(n, parts, bounds),
            PolytopeSpec::Knapsack { a, b } => Polytope::knapsack(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Cardinality { k: usize },
    Partition { parts: Vec<Vec<usize>>, bounds: Vec<usize> },
    Knapsack { a: Vec<f64>, b: f64 },
}

/// A down-monotone polytope over `[0,1]^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    n: usize,
    kind: Kind,
}

/// A constraint along which pipage rounding moves mass: the elements it
/// covers and the integer bound on their sum (`None` for an unconstrained
/// singleton).
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub elements: Vec<usize>,
    pub bound: Option<usize>,
}

impl Polytope {
    /// `{x : Σ x_u <= k}`.
    pub fn cardinality(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidInstance(format!("cardinality bound {k} exceeds n = {n}")));
        }
        Ok(Polytope {
            n,
            kind: Kind::Cardinality { k },
        })
    }

    /// `{x : Σ_{u ∈ part_i} x_u <= b_i}`. Elements outside every part are free.
    pub fn partition(n: usize, parts: Vec<Vec<usize>>, bounds: Vec<usize>) -> Result<Self> {
        if parts.len() != bounds.len() {
            return Err(Error::InvalidInstance(format!(
                "{} parts but {} bounds",
                parts.len(),
                bounds.len()
            )));
        }
        let mut seen = vec![false; n];
        for part in &parts {
            if part.is_empty() {
                return Err(Error::InvalidInstance("empty part".into()));
            }
            for &u in part {
                if u >= n {
                    return Err(Error::InvalidInstance(format!(
                        "element {u} outside ground set of size {n}"
                    )));
                }
                if std::mem::replace(&mut seen[u], true) {
                    return Err(Error::InvalidInstance(format!("element {u} in two parts")));
                }
            }
        }
        let parts = parts
            .into_iter()
            .map(|mut p| {
                p.sort_unstable();
                p
            })
            .collect();
        Ok(Polytope {
            n,
            kind: Kind::Partition { parts, bounds },
        })
    }

    /// `{x : a·x <= b}` with `a >= 0`, `b >= 0`.
    pub fn knapsack(a: Vec<f64>, b: f64) -> Result<Self> {
        if a.iter().any(|&c| !(c.is_finite() && c >= 0.0)) || !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidInstance(
                "knapsack coefficients must be finite and non-negative".into(),
            ));
        }
        Ok(Polytope {
            n: a.len(),
            kind: Kind::Knapsack { a, b },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Cardinality { .. } => "cardinality",
            Kind::Partition { .. } => "partition",
            Kind::Knapsack { .. } => "knapsack",
        }
    }

    /// The cardinality bound, for cardinality polytopes.
    pub fn cardinality_bound(&self) -> Option<usize> {
        match self.kind {
            Kind::Cardinality { k } => Some(k),
            _ => None,
        }
    }

    pub fn spec(&self) -> PolytopeSpec {
        match &self.kind {
            Kind::Cardinality { k } => PolytopeSpec::Cardinality { k: *k },
            Kind::Partition { parts, bounds } => PolytopeSpec::Partition {
                parts: parts.clone(),
                bounds: bounds.clone(),
            },
            Kind::Knapsack { a, b } => PolytopeSpec::Knapsack { a: a.clone(), b: *b },
        }
    }

    /// `d(P) = min_i b_i / Σ_u a_{i,u}` over the kind's constraints, at most 1.
    pub fn density(&self) -> f64 {
        let d = match &self.kind {
            Kind::Cardinality { k } => {
                if self.n == 0 {
                    1.0
                } else {
                    *k as f64 / self.n as f64
                }
            }
            Kind::Partition { parts, bounds } => parts
                .iter()
                .zip(bounds)
                .map(|(p, &b)| b as f64 / p.len() as f64)
                .fold(f64::INFINITY, f64::min),
            Kind::Knapsack { a, b } => {
                let total: f64 = a.iter().sum();
                if total > 0.0 {
                    b / total
                } else {
                    f64::INFINITY
                }
            }
        };
        d.min(1.0)
    }

    /// `T_P = -ln(1 - d(P) + n^-4) / d(P)`; zero when `d(P) = 0`.
    pub fn horizon(&self) -> f64 {
        horizon_for(self.density(), self.n)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.n
            || x.iter()
                .any(|&v| !(-MEMBERSHIP_TOL..=1.0 + MEMBERSHIP_TOL).contains(&v))
        {
            return false;
        }
        match &self.kind {
            Kind::Cardinality { k } => x.iter().sum::<f64>() <= *k as f64 + MEMBERSHIP_TOL,
            Kind::Partition { parts, bounds } => parts
                .iter()
                .zip(bounds)
                .all(|(p, &b)| p.iter().map(|&u| x[u]).sum::<f64>() <= b as f64 + MEMBERSHIP_TOL),
            Kind::Knapsack { a, b } => a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() <= b + MEMBERSHIP_TOL,
        }
    }

    /// Smallest slack over all constraints, box bounds included; negative
    /// when `x` violates one.
    pub fn slack(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        let boxed = x.iter().map(|&v| v.min(1.0 - v)).fold(f64::INFINITY, f64::min);
        let own = match &self.kind {
            Kind::Cardinality { k } => *k as f64 - x.iter().sum::<f64>(),
            Kind::Partition { parts, bounds } => parts
                .iter()
                .zip(bounds)
                .map(|(p, &b)| b as f64 - p.iter().map(|&u| x[u]).sum::<f64>())
                .fold(f64::INFINITY, f64::min),
            Kind::Knapsack { a, b } => b - a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>(),
        };
        boxed.min(own)
    }

    /// Membership of `1_S` for a bitmask `S` (`n <= 64`).
    pub fn admits_mask(&self, mask: u64) -> bool {
        match &self.kind {
            Kind::Cardinality { k } => mask.count_ones() as usize <= *k,
            Kind::Partition { parts, bounds } => parts
                .iter()
                .zip(bounds)
                .all(|(p, &b)| p.iter().filter(|&&u| mask >> u & 1 == 1).count() <= b),
            Kind::Knapsack { a, b } => {
                (0..self.n).filter(|&u| mask >> u & 1 == 1).map(|u| a[u]).sum::<f64>() <= b + MEMBERSHIP_TOL
            }
        }
    }

    /// `argmax_{I ∈ P} I·w`. Only positive weights are selected; ties go
    /// to the lowest index.
    pub fn linear_maximize(&self, w: &[f64]) -> Point {
        assert_eq!(w.len(), self.n);
        let mut out = vec![0.0; self.n];
        match &self.kind {
            Kind::Cardinality { k } => {
                for u in top_positive(w, (0..self.n).collect(), *k) {
                    out[u] = 1.0;
                }
            }
            Kind::Partition { parts, bounds } => {
                let mut free = vec![true; self.n];
                for (p, &b) in parts.iter().zip(bounds) {
                    for &u in p {
                        free[u] = false;
                    }
                    for u in top_positive(w, p.clone(), b) {
                        out[u] = 1.0;
                    }
                }
                for u in 0..self.n {
                    if free[u] && w[u] > 0.0 {
                        out[u] = 1.0;
                    }
                }
            }
            Kind::Knapsack { a, b } => {
                let mut order: Vec<usize> = (0..self.n).filter(|&u| w[u] > 0.0).collect();
                // zero-cost items first, then by value density
                order.sort_by(|&u, &v| {
                    let du = if a[u] == 0.0 { f64::INFINITY } else { w[u] / a[u] };
                    let dv = if a[v] == 0.0 { f64::INFINITY } else { w[v] / a[v] };
                    dv.partial_cmp(&du).unwrap().then(u.cmp(&v))
                });
                let mut room = *b;
                for u in order {
                    if a[u] == 0.0 {
                        out[u] = 1.0;
                    } else if room > 0.0 {
                        let take = (room / a[u]).min(1.0);
                        out[u] = take;
                        room -= take * a[u];
                    }
                }
            }
        }
        Point::new(out).expect("coordinates in [0,1]")
    }

    /// Constraint groups for pipage rounding. Knapsack is not supported.
    pub fn groups(&self) -> Result<Vec<Group>> {
        match &self.kind {
            Kind::Cardinality { k } => Ok(vec![Group {
                elements: (0..self.n).collect(),
                bound: Some(*k),
            }]),
            Kind::Partition { parts, bounds } => {
                let mut free = vec![true; self.n];
                let mut groups: Vec<Group> = parts
                    .iter()
                    .zip(bounds)
                    .map(|(p, &b)| {
                        for &u in p {
                            free[u] = false;
                        }
                        Group {
                            elements: p.clone(),
                            bound: Some(b),
                        }
                    })
                    .collect();
                groups.extend((0..self.n).filter(|&u| free[u]).map(|u| Group {
                    elements: vec![u],
                    bound: None,
                }));
                Ok(groups)
            }
            Kind::Knapsack { .. } => Err(Error::UnsupportedPolytope("pipage rounding")),
        }
    }

    /// The polytope over the kept elements only, re-indexed `0..kept.len()`.
    pub fn restrict(&self, kept: &[usize]) -> Polytope {
        let mut index = vec![usize::MAX; self.n];
        for (i, &u) in kept.iter().enumerate() {
            index[u] = i;
        }
        let m = kept.len();
        let kind = match &self.kind {
            Kind::Cardinality { k } => Kind::Cardinality { k: (*k).min(m) },
            Kind::Partition { parts, bounds } => {
                let (mut ps, mut bs) = (Vec::new(), Vec::new());
                for (p, &b) in parts.iter().zip(bounds) {
                    let q: Vec<usize> = p
                        .iter()
                        .filter(|&&u| index[u] != usize::MAX)
                        .map(|&u| index[u])
                        .collect();
                    if !q.is_empty() {
                        ps.push(q);
                        bs.push(b);
                    }
                }
                Kind::Partition { parts: ps, bounds: bs }
            }
            Kind::Knapsack { a, b } => Kind::Knapsack {
                a: kept.iter().map(|&u| a[u]).collect(),
                b: *b,
            },
        };
        Polytope { n: m, kind }
    }
}

/// `T_P` from a density and ground-set size.
pub fn horizon_for(d: f64, n: usize) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    let eps = (n.max(1) as f64).powi(-4);
    -(1.0 - d + eps).ln() / d
}

fn top_positive(w: &[f64], mut candidates: Vec<usize>, k: usize) -> Vec<usize> {
    candidates.retain(|&u| w[u] > 0.0);
    candidates.sort_by(|&u, &v| w[v].partial_cmp(&w[u]).unwrap().then(u.cmp(&v)));
    candidates.truncate(k);
    candidates
}

/// Output of [`preprocess_reduction1`].
#[derive(Debug, Clone)]
pub struct Reduction1 {
    pub polytope: Polytope,
    /// `None` when every singleton was infeasible.
    pub ground: Option<GroundSet>,
    /// `kept[i]` is the original index of reduced element `i`.
    pub kept: Vec<usize>,
    pub warning: Option<String>,
}

impl Reduction1 {
    /// Lifts a point over the kept elements back to the original ground set.
    pub fn lift(&self, y: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (i, &u) in self.kept.iter().enumerate() {
            out[u] = y[i];
        }
        out
    }
}

/// Drops every element `u` with `1_u ∉ P`.
pub fn preprocess_reduction1(p: &Polytope, gs: &GroundSet) -> Reduction1 {
    assert_eq!(p.n(), gs.len());
    let kept: Vec<usize> = (0..p.n())
        .filter(|&u| {
            let mut e = vec![0.0; p.n()];
            e[u] = 1.0;
            p.contains(&e)
        })
        .collect();
    let ground = if kept.is_empty() {
        None
    } else {
        let labels: Vec<String> = kept.iter().map(|&u| gs.label(u)).collect();
        Some(GroundSet::with_labels(labels).expect("non-empty"))
    };
    let warning = kept
        .is_empty()
        .then(|| "no singleton is feasible; ground set is empty".to_string());
    Reduction1 {
        polytope: p.restrict(&kept),
        ground,
        kept,
        warning,
    }
}
