//! Set functions behind a counted value oracle.
//!
//! Concrete instances implement [`SetFunction`]; algorithms only ever see an
//! [`Oracle`], which forwards to the instance and counts queries atomically.

mod instances;
pub mod io;

pub use io::SetFnSpec;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

pub use instances::{
    Complement, Coverage, FromFn, GraphCut, HardnessInstance, HypergraphCut, Restriction, WithModular,
};

use crate::error::{Error, Result};
use crate::rng;
use crate::subset::Subset;

/// Equality tolerance for audits on float weights.
pub const AUDIT_TOL: f64 = 1e-9;

/// A ground set `{0, .., n-1}` with optional display labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundSet {
    n: usize,
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("ground set must be non-empty".into()));
        }
        Ok(GroundSet { n, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut gs = Self::new(labels.len())?;
        gs.labels = Some(labels);
        Ok(gs)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn label(&self, u: usize) -> String {
        match &self.labels {
            Some(l) => l[u].clone(),
            None => u.to_string(),
        }
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.n)
    }
}

/// A value oracle `f: 2^N -> R`.
///
/// `is_symmetric` is a claim, not a check; use [`audit_symmetry`] to verify
/// it on a concrete instance.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;

    fn value(&self, s: &Subset) -> f64;

    fn is_symmetric(&self) -> bool {
        false
    }

    /// Short human-readable kind, used in reports.
    fn kind(&self) -> &'static str {
        "custom"
    }

    /// An evaluator that follows single-element toggles in O(degree).
    fn incremental(&self) -> Option<Box<dyn IncrementalValue + '_>> {
        None
    }
}

/// Tracks `f(S)` while `S` changes one element at a time.
pub trait IncrementalValue {
    fn reset(&mut self, s: &Subset) -> f64;
    fn toggle(&mut self, u: usize) -> f64;
}

/// A set function plus a monotone query counter.
pub struct Oracle {
    f: Arc<dyn SetFunction>,
    queries: AtomicU64,
}

impl Oracle {
    pub fn new<F: SetFunction + 'static>(f: F) -> Self {
        Self::from_arc(Arc::new(f))
    }

    pub fn from_arc(f: Arc<dyn SetFunction>) -> Self {
        Oracle {
            f,
            queries: AtomicU64::new(0),
        }
    }

    #[inline]
    pub fn eval(&self, s: &Subset) -> f64 {
        debug_assert_eq!(s.ground_size(), self.f.ground_size());
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.f.value(s)
    }

    /// Records `k` queries answered outside [`Oracle::eval`], e.g. by an
    /// incremental walker.
    pub fn charge(&self, k: u64) {
        self.queries.fetch_add(k, Ordering::Relaxed);
    }

    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn n(&self) -> usize {
        self.f.ground_size()
    }

    pub fn is_symmetric(&self) -> bool {
        self.f.is_symmetric()
    }

    pub fn function(&self) -> &Arc<dyn SetFunction> {
        &self.f
    }

    /// Fresh oracle (own counter) for the same function.
    pub fn fresh(&self) -> Oracle {
        Oracle::from_arc(self.f.clone())
    }

    /// Oracle for `S -> f(N \ S)`.
    pub fn complement(&self) -> Oracle {
        Oracle::new(Complement::new(self.f.clone()))
    }

    /// Full value table indexed by bitmask; costs `2^n` queries.
    pub fn table(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n > TABLE_LIMIT {
            return Err(Error::TooLarge {
                what: "value table",
                n,
                limit: TABLE_LIMIT,
            });
        }
        Ok(crate::par::map_range(1usize << n, |m| {
            self.eval(&Subset::from_mask(n, m as u64))
        }))
    }
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle")
            .field("kind", &self.f.kind())
            .field("n", &self.n())
            .field("symmetric", &self.is_symmetric())
            .field("queries", &self.query_count())
            .finish()
    }
}

/// Largest ground set for which full value tables are built.
pub const TABLE_LIMIT: usize = 24;

/// `S -> f(N \ S)` as a new oracle. Symmetry and submodularity carry over.
pub fn complement_function(f: &Oracle) -> Oracle {
    f.complement()
}

/// Worst violation found by an audit (`0` when none).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditOutcome {
    pub passed: bool,
    pub worst_violation: f64,
    pub checked: u64,
}

/// Largest ground set audited exhaustively.
pub const EXHAUSTIVE_AUDIT_LIMIT: usize = 14;
const SAMPLED_AUDIT_PAIRS: usize = 20_000;
const AUDIT_SEED: u64 = 0x5EED_A0D1;

/// Whether `f(A) + f(B) >= f(A ∪ B) + f(A ∩ B)` holds within [`AUDIT_TOL`].
///
/// For `n <= 14` this checks the equivalent local form
/// `f(S+u) + f(S+v) >= f(S+u+v) + f(S)` for every `S` and `u, v ∉ S`, which
/// covers all pairs. Larger ground sets are audited on random pairs.
pub fn audit_submodularity(f: &Oracle, gs: &GroundSet) -> bool {
    submodularity_audit(f, gs).passed
}

pub fn submodularity_audit(f: &Oracle, gs: &GroundSet) -> AuditOutcome {
    let n = gs.len();
    assert_eq!(n, f.n(), "ground set does not match oracle");
    if n <= EXHAUSTIVE_AUDIT_LIMIT {
        let table = f.table().expect("n within table limit");
        let worst = crate::par::map_range(1usize << n, |s| {
            let mut worst = 0.0f64;
            for u in 0..n {
                if s >> u & 1 == 1 {
                    continue;
                }
                for v in u + 1..n {
                    if s >> v & 1 == 1 {
                        continue;
                    }
                    let lhs = table[s | 1 << u] + table[s | 1 << v];
                    let rhs = table[s | 1 << u | 1 << v] + table[s];
                    worst = worst.max(rhs - lhs);
                }
            }
            worst
        })
        .into_iter()
        .fold(0.0, f64::max);
        let checked = (1u64 << n) * (n * n.saturating_sub(1) / 2) as u64;
        AuditOutcome {
            passed: worst <= AUDIT_TOL,
            worst_violation: worst,
            checked,
        }
    } else {
        let mut rng = rng::stream(AUDIT_SEED, &[n as u64]);
        let mut worst = 0.0f64;
        for _ in 0..SAMPLED_AUDIT_PAIRS {
            let a = Subset::from_indices(n, (0..n).filter(|_| rng.random_bool(0.5)));
            let b = Subset::from_indices(n, (0..n).filter(|_| rng.random_bool(0.5)));
            let lhs = f.eval(&a) + f.eval(&b);
            let rhs = f.eval(&a.union(&b)) + f.eval(&a.intersection(&b));
            worst = worst.max(rhs - lhs);
        }
        AuditOutcome {
            passed: worst <= AUDIT_TOL,
            worst_violation: worst,
            checked: SAMPLED_AUDIT_PAIRS as u64,
        }
    }
}

fn audit_sets(n: usize) -> Box<dyn Iterator<Item = Subset>> {
    if n <= EXHAUSTIVE_AUDIT_LIMIT {
        Box::new((0..1u64 << n).map(move |m| Subset::from_mask(n, m)))
    } else {
        let mut rng = rng::stream(AUDIT_SEED, &[n as u64, 1]);
        Box::new(
            (0..SAMPLED_AUDIT_PAIRS).map(move |_| Subset::from_indices(n, (0..n).filter(|_| rng.random_bool(0.5)))),
        )
    }
}

/// Checks `f(S) = f(N \ S)` on every set (exhaustive up to n = 14).
pub fn audit_symmetry(f: &Oracle) -> AuditOutcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for s in audit_sets(f.n()) {
        worst = worst.max((f.eval(&s) - f.eval(&s.complement())).abs());
        checked += 1;
    }
    AuditOutcome {
        passed: worst <= AUDIT_TOL,
        worst_violation: worst,
        checked,
    }
}

/// Checks `f(S) >= 0` on every set (exhaustive up to n = 14).
pub fn audit_nonnegative(f: &Oracle) -> AuditOutcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for s in audit_sets(f.n()) {
        worst = worst.max(-f.eval(&s));
        checked += 1;
    }
    AuditOutcome {
        passed: worst <= AUDIT_TOL,
        worst_violation: worst.max(0.0),
        checked,
    }
}

/// Graph cut value of `s`.
pub fn cut_eval(instance: &GraphCut, s: &Subset) -> f64 {
    instance.value(s)
}

/// The two-point instance `f_{p,q}` on `2q` elements: value 1 exactly when
/// one of the two end elements is in the set.
pub fn hardness_instance(p: usize, q: usize) -> Result<Oracle> {
    Ok(Oracle::new(HardnessInstance::new(p, q)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> GraphCut {
        GraphCut::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn cut_examples() {
        let t = triangle();
        assert_eq!(cut_eval(&t, &Subset::empty(3)), 0.0);
        assert_eq!(cut_eval(&t, &Subset::from_indices(3, [0])), 2.0);
        let e = GraphCut::new(2, vec![(0, 1, 1.0)]).unwrap();
        assert_eq!(cut_eval(&e, &Subset::from_indices(2, [0])), 1.0);
        assert_eq!(cut_eval(&e, &Subset::from_indices(2, [0, 1])), 0.0);
        assert_eq!(cut_eval(&e, &Subset::from_indices(2, [1])), 1.0);
        assert_eq!(cut_eval(&e, &Subset::empty(2)), 0.0);
    }

    #[test]
    fn complement_examples() {
        let f = Oracle::new(triangle());
        let fc = complement_function(&f);
        assert!(fc.is_symmetric());
        for m in 0..8 {
            let s = Subset::from_mask(3, m);
            assert_eq!(fc.eval(&s), f.eval(&s));
        }
        let cov = Oracle::new(Coverage::new(3, vec![1.0, 2.0, 4.0], vec![vec![0], vec![1], vec![1, 2]]).unwrap());
        let cc = cov.complement();
        assert_eq!(
            cc.eval(&Subset::from_indices(3, [0])),
            cov.eval(&Subset::from_indices(3, [1, 2]))
        );
        let ccc = cc.complement();
        for n in 1..=4usize {
            let cov = Oracle::new(Coverage::new(n, vec![1.0, 3.0], (0..n).map(|i| vec![i % 2]).collect()).unwrap());
            let back = cov.complement().complement();
            for m in 0..1u64 << n {
                let s = Subset::from_mask(n, m);
                assert_eq!(back.eval(&s), cov.eval(&s));
            }
        }
        assert!(!ccc.is_symmetric());
    }

    #[test]
    fn hardness_examples() {
        let f = hardness_instance(1, 2).unwrap();
        assert_eq!(f.n(), 4);
        assert!(f.is_symmetric());
        assert_eq!(f.eval(&Subset::from_indices(4, [0])), 1.0);
        assert_eq!(f.eval(&Subset::from_indices(4, [0, 3])), 0.0);
        assert_eq!(f.eval(&Subset::from_indices(4, [0, 1])), 1.0);
        assert!(hardness_instance(2, 2).is_err());
        assert!(hardness_instance(3, 2).is_err());
        assert!(hardness_instance(0, 2).is_err());
    }

    #[test]
    fn audit_examples() {
        let gs = GroundSet::new(3).unwrap();
        assert!(audit_submodularity(&Oracle::new(triangle()), &gs));
        let sq = Oracle::new(FromFn::new(2, false, |s: &Subset| (s.len() * s.len()) as f64));
        let outcome = submodularity_audit(&sq, &GroundSet::new(2).unwrap());
        assert!(!outcome.passed);
        assert_eq!(outcome.worst_violation, 2.0);
        let h = hardness_instance(1, 2).unwrap();
        assert!(audit_submodularity(&h, &GroundSet::new(4).unwrap()));
    }

    #[test]
    fn sampled_audit_on_large_cut() {
        let n = 20;
        let edges = (0..n).map(|u| (u, (u + 1) % n, 1.0 + u as f64)).collect();
        let f = Oracle::new(GraphCut::new(n, edges).unwrap());
        let gs = GroundSet::new(n).unwrap();
        let out = submodularity_audit(&f, &gs);
        assert!(out.passed);
        assert_eq!(out.checked, 20_000);
        assert!(audit_symmetry(&f).passed);
    }

    #[test]
    fn query_counter_counts_each_call() {
        let f = Oracle::new(triangle());
        assert_eq!(f.query_count(), 0);
        let s = Subset::from_indices(3, [1]);
        for i in 1..=5 {
            f.eval(&s);
            assert_eq!(f.query_count(), i);
        }
    }

    #[test]
    fn ground_set_invariants() {
        assert!(GroundSet::new(0).is_err());
        let gs = GroundSet::with_labels(vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(gs.len(), 2);
        assert_eq!(gs.label(1), "b");
    }
}
