use std::sync::Arc;

use super::{IncrementalValue, SetFunction};
use crate::error::{Error, Result};
use crate::subset::Subset;

fn check_weight(w: f64, what: &str) -> Result<()> {
    if !(w.is_finite() && w >= 0.0) {
        return Err(Error::InvalidInstance(format!(
            "{what} weight {w} must be finite and non-negative"
        )));
    }
    Ok(())
}

/// Cut function of an undirected weighted graph.
#[derive(Debug, Clone)]
pub struct GraphCut {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl GraphCut {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("graph needs at least one node".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInstance(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            if u == v {
                return Err(Error::InvalidInstance(format!("self loop on node {u}")));
            }
            check_weight(w, "edge")?;
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        Ok(GraphCut { n, edges, adjacency })
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn degree(&self, u: usize) -> f64 {
        self.adjacency[u].iter().map(|&(_, w)| w).sum()
    }
}

impl SetFunction for GraphCut {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, s: &Subset) -> f64 {
        self.edges
            .iter()
            .filter(|&&(u, v, _)| s.contains(u) != s.contains(v))
            .map(|&(_, _, w)| w)
            .sum()
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn kind(&self) -> &'static str {
        "graph_cut"
    }

    fn incremental(&self) -> Option<Box<dyn IncrementalValue + '_>> {
        Some(Box::new(CutWalker {
            g: self,
            inside: vec![false; self.n],
            value: 0.0,
        }))
    }
}

struct CutWalker<'a> {
    g: &'a GraphCut,
    inside: Vec<bool>,
    value: f64,
}

impl IncrementalValue for CutWalker<'_> {
    fn reset(&mut self, s: &Subset) -> f64 {
        for (u, slot) in self.inside.iter_mut().enumerate() {
            *slot = s.contains(u);
        }
        self.value = self.g.value(s);
        self.value
    }

    fn toggle(&mut self, u: usize) -> f64 {
        // Edges to the same side start crossing, edges across stop crossing.
        let side = self.inside[u];
        for &(v, w) in &self.g.adjacency[u] {
            if self.inside[v] == side {
                self.value += w;
            } else {
                self.value -= w;
            }
        }
        self.inside[u] = !side;
        self.value
    }
}

/// Hypergraph cut: total weight of hyperedges with vertices on both sides.
#[derive(Debug, Clone)]
pub struct HypergraphCut {
    n: usize,
    hyperedges: Vec<(Vec<usize>, f64)>,
}

impl HypergraphCut {
    pub fn new(n: usize, hyperedges: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("hypergraph needs at least one node".into()));
        }
        let mut cleaned = Vec::with_capacity(hyperedges.len());
        for (mut vs, w) in hyperedges {
            check_weight(w, "hyperedge")?;
            if let Some(&bad) = vs.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidInstance(format!("hyperedge vertex {bad} outside 0..{n}")));
            }
            vs.sort_unstable();
            let before = vs.len();
            vs.dedup();
            if vs.len() != before {
                return Err(Error::InvalidInstance("hyperedge repeats a vertex".into()));
            }
            if vs.len() < 2 {
                return Err(Error::InvalidInstance("hyperedge needs at least two vertices".into()));
            }
            cleaned.push((vs, w));
        }
        Ok(HypergraphCut { n, hyperedges: cleaned })
    }

    pub fn hyperedges(&self) -> &[(Vec<usize>, f64)] {
        &self.hyperedges
    }
}

impl SetFunction for HypergraphCut {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, s: &Subset) -> f64 {
        self.hyperedges
            .iter()
            .filter(|(vs, _)| {
                let inside = vs.iter().filter(|&&v| s.contains(v)).count();
                inside > 0 && inside < vs.len()
            })
            .map(|(_, w)| w)
            .sum()
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn kind(&self) -> &'static str {
        "hypergraph_cut"
    }
}

/// Weighted coverage: `n` sets over a weighted universe; `f(S)` is the
/// weight of the universe items covered by the chosen sets.
#[derive(Debug, Clone)]
pub struct Coverage {
    n: usize,
    weights: Vec<f64>,
    membership: Vec<Vec<usize>>,
}

impl Coverage {
    pub fn new(n: usize, weights: Vec<f64>, membership: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("coverage needs at least one set".into()));
        }
        if membership.len() != n {
            return Err(Error::InvalidInstance(format!(
                "coverage has {} membership lists for {n} sets",
                membership.len()
            )));
        }
        for &w in &weights {
            check_weight(w, "universe")?;
        }
        for items in &membership {
            if let Some(&bad) = items.iter().find(|&&i| i >= weights.len()) {
                return Err(Error::InvalidInstance(format!(
                    "coverage item {bad} outside universe of size {}",
                    weights.len()
                )));
            }
        }
        Ok(Coverage { n, weights, membership })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn membership(&self) -> &[Vec<usize>] {
        &self.membership
    }
}

impl SetFunction for Coverage {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, s: &Subset) -> f64 {
        let mut covered = vec![false; self.weights.len()];
        for u in s.iter() {
            for &i in &self.membership[u] {
                covered[i] = true;
            }
        }
        covered
            .iter()
            .zip(&self.weights)
            .filter(|(c, _)| **c)
            .map(|(_, w)| w)
            .sum()
    }

    fn kind(&self) -> &'static str {
        "coverage"
    }
}

/// `f_{p,q}`: a single-edge cut between the first and last of `2q` elements.
#[derive(Debug, Clone)]
pub struct HardnessInstance {
    p: usize,
    q: usize,
    cut: GraphCut,
}

impl HardnessInstance {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidInstance("p and q must be positive".into()));
        }
        if p >= q {
            return Err(Error::InvalidInstance(format!("need p < q, got p = {p}, q = {q}")));
        }
        let n = 2 * q;
        Ok(HardnessInstance {
            p,
            q,
            cut: GraphCut::new(n, vec![(0, n - 1, 1.0)])?,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }
}

impl SetFunction for HardnessInstance {
    fn ground_size(&self) -> usize {
        2 * self.q
    }

    fn value(&self, s: &Subset) -> f64 {
        self.cut.value(s)
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn kind(&self) -> &'static str {
        "hardness"
    }

    fn incremental(&self) -> Option<Box<dyn IncrementalValue + '_>> {
        self.cut.incremental()
    }
}

/// `f(S) = base(S) + Σ_{u ∈ S} offsets[u]` with non-negative offsets.
/// Stays submodular and non-negative; not symmetric unless all offsets vanish.
pub struct WithModular {
    base: Arc<dyn SetFunction>,
    offsets: Vec<f64>,
}

impl WithModular {
    pub fn new(base: Arc<dyn SetFunction>, offsets: Vec<f64>) -> Result<Self> {
        if offsets.len() != base.ground_size() {
            return Err(Error::InvalidInstance("offset vector length mismatch".into()));
        }
        for &c in &offsets {
            check_weight(c, "offset")?;
        }
        Ok(WithModular { base, offsets })
    }
}

impl SetFunction for WithModular {
    fn ground_size(&self) -> usize {
        self.offsets.len()
    }

    fn value(&self, s: &Subset) -> f64 {
        self.base.value(s) + s.iter().map(|u| self.offsets[u]).sum::<f64>()
    }

    fn is_symmetric(&self) -> bool {
        self.base.is_symmetric() && self.offsets.iter().all(|&c| c == 0.0)
    }

    fn kind(&self) -> &'static str {
        "offset"
    }
}

/// `S -> f(N \ S)`.
pub struct Complement {
    inner: Arc<dyn SetFunction>,
}

impl Complement {
    pub fn new(inner: Arc<dyn SetFunction>) -> Self {
        Complement { inner }
    }
}

impl SetFunction for Complement {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn value(&self, s: &Subset) -> f64 {
        self.inner.value(&s.complement())
    }

    fn is_symmetric(&self) -> bool {
        self.inner.is_symmetric()
    }

    fn kind(&self) -> &'static str {
        "complement"
    }
}

/// `f` seen through a subset of its ground set: element `i` of the new
/// ground set is element `kept[i]` of the original. Symmetry is not
/// preserved in general, so the claim is dropped.
pub struct Restriction {
    inner: Arc<dyn SetFunction>,
    kept: Vec<usize>,
}

impl Restriction {
    pub fn new(inner: Arc<dyn SetFunction>, kept: Vec<usize>) -> Result<Self> {
        let n = inner.ground_size();
        if kept.iter().any(|&u| u >= n) {
            return Err(Error::InvalidArgument("restriction index out of range".into()));
        }
        Ok(Restriction { inner, kept })
    }
}

impl SetFunction for Restriction {
    fn ground_size(&self) -> usize {
        self.kept.len()
    }

    fn value(&self, s: &Subset) -> f64 {
        let lifted = Subset::from_indices(self.inner.ground_size(), s.iter().map(|i| self.kept[i]));
        self.inner.value(&lifted)
    }

    fn kind(&self) -> &'static str {
        "restriction"
    }
}

type ValueFn = dyn Fn(&Subset) -> f64 + Send + Sync;

/// A set function from a closure.
pub struct FromFn {
    n: usize,
    symmetric: bool,
    f: Box<ValueFn>,
}

impl FromFn {
    pub fn new<F>(n: usize, symmetric: bool, f: F) -> Self
    where
        F: Fn(&Subset) -> f64 + Send + Sync + 'static,
    {
        FromFn {
            n,
            symmetric,
            f: Box::new(f),
        }
    }
}

impl SetFunction for FromFn {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, s: &Subset) -> f64 {
        (self.f)(s)
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}
