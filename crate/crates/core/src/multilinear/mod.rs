//! The multilinear extension `F(x) = E[f(R(x))]`, where `R(x)` contains each
//! element `u` independently with probability `x_u`.
//!
//! Two evaluation engines sit behind [`Extension`]:
//!
//! * **exact**: the full value table of `f` is read once (`2^n` oracle
//!   queries) and every evaluation is an exact weighted sum over all subsets;
//! * **sampled**: seeded Monte-Carlo averages. Every coupled quantity
//!   (a derivative, a pair of endpoint values) is driven by one threshold
//!   vector `t ∈ [0,1]^N`: element `v` is in the set iff `t_v < x_v`.
//!
//! Random streams are addressed by a tag path supplied by the caller (step
//! index, purpose, element) so results do not depend on scheduling.

mod checks;
mod point;

pub use checks::{
    check_equal_prob_bound, check_lemma_general_properties, check_linearization, check_max_probability_damage,
    check_union_bound_symmetric, downward_max_violation,
};
pub use point::Point;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::check::MeanEstimate;
use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::setfn::Oracle;
use crate::subset::Subset;

/// Largest ground set evaluated by full enumeration by default.
pub const DEFAULT_EXACT_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Sampled,
}

/// How `F` and its derivatives are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimator {
    pub mode: Mode,
    pub samples: usize,
    pub seed: u64,
    pub exact_limit: usize,
}

impl Estimator {
    pub fn exact() -> Self {
        Estimator {
            mode: Mode::Exact,
            samples: 1,
            seed: 0,
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }

    pub fn sampled(samples: usize, seed: u64) -> Self {
        Estimator {
            mode: Mode::Sampled,
            samples: samples.max(1),
            seed,
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }

    /// Default sample count per evaluation: `10 n^2`.
    pub fn default_samples(n: usize) -> usize {
        (10 * n * n).max(1)
    }

    /// Exact when `n` is within the exact limit, sampled with the default
    /// count otherwise.
    pub fn auto(n: usize, seed: u64) -> Self {
        if n <= DEFAULT_EXACT_LIMIT {
            Estimator { seed, ..Self::exact() }
        } else {
            Self::sampled(Self::default_samples(n), seed)
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("estimator needs at least one sample".into()));
        }
        if self.mode == Mode::Exact && n > self.exact_limit {
            return Err(Error::TooLarge {
                what: "exact multilinear evaluation",
                n,
                limit: self.exact_limit,
            });
        }
        Ok(())
    }
}

/// Draws `R(x)`: each element independently with probability `x_u`.
pub fn sample_set<R: Rng + ?Sized>(x: &Point, rng: &mut R) -> Subset {
    let n = x.len();
    let mut s = Subset::empty(n);
    for u in 0..n {
        if rng.random::<f64>() < x[u] {
            s.insert(u);
        }
    }
    s
}

/// Probability of every subset (by bitmask) under `R(x)`, with coordinate
/// `skip` (if any) treated as 0.
fn subset_probabilities(x: &[f64], skip: Option<usize>, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(1 << x.len());
    out.push(1.0);
    for (u, &xu) in x.iter().enumerate() {
        let xu = if Some(u) == skip { 0.0 } else { xu };
        let len = out.len();
        out.extend_from_within(..len);
        let (lo, hi) = out.split_at_mut(len);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            *b = *a * xu;
            *a *= 1.0 - xu;
        }
    }
}

fn table_value(table: &[f64], x: &[f64]) -> f64 {
    let mut p = Vec::new();
    subset_probabilities(x, None, &mut p);
    p.iter().zip(table).map(|(p, f)| p * f).sum()
}

fn table_partial(table: &[f64], x: &[f64], u: usize) -> f64 {
    let mut p = Vec::new();
    subset_probabilities(x, Some(u), &mut p);
    let bit = 1usize << u;
    p.iter()
        .enumerate()
        .filter(|(s, _)| s & bit == 0)
        .map(|(s, p)| p * (table[s | bit] - table[s]))
        .sum()
}

/// `F(x)` by full enumeration: `Σ_S f(S) Π_{u∈S} x_u Π_{u∉S} (1 - x_u)`.
pub fn eval_exact(f: &Oracle, x: &Point) -> Result<f64> {
    let n = f.n();
    if n > DEFAULT_EXACT_LIMIT {
        return Err(Error::TooLarge {
            what: "exact multilinear evaluation",
            n,
            limit: DEFAULT_EXACT_LIMIT,
        });
    }
    check_dims(n, x)?;
    Ok(table_value(&f.table()?, x.as_slice()))
}

/// `F(x)` under the given estimator. Integral points are answered by one
/// oracle call in either mode.
pub fn eval(f: &Oracle, x: &Point, est: &Estimator) -> Result<f64> {
    check_dims(f.n(), x)?;
    if let Some(s) = x.as_set() {
        return Ok(f.eval(&s));
    }
    match est.mode {
        Mode::Exact => {
            est.validate(f.n())?;
            eval_exact(f, x)
        }
        Mode::Sampled => Ok(Extension::new(f, est)?.value(x, &[]).mean),
    }
}

/// `∂_u F(x) = F(x ∨ 1_u) - F(x ∧ 1_{N-u})`.
pub fn partial_derivative(f: &Oracle, x: &Point, u: usize, est: &Estimator) -> Result<f64> {
    check_dims(f.n(), x)?;
    if u >= f.n() {
        return Err(Error::InvalidArgument(format!("element {u} outside ground set")));
    }
    Ok(Extension::new(f, est)?.partial(x, u, &[]).mean)
}

fn check_dims(n: usize, x: &Point) -> Result<()> {
    if x.len() != n {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates, ground set has {n}",
            x.len()
        )));
    }
    Ok(())
}

enum Engine {
    Exact(Vec<f64>),
    Sampled { samples: usize, seed: u64 },
}

/// A multilinear-extension evaluator bound to one oracle.
pub struct Extension<'a> {
    oracle: &'a Oracle,
    engine: Engine,
}

impl<'a> Extension<'a> {
    pub fn new(oracle: &'a Oracle, est: &Estimator) -> Result<Self> {
        est.validate(oracle.n())?;
        let engine = match est.mode {
            Mode::Exact => Engine::Exact(oracle.table()?),
            Mode::Sampled => Engine::Sampled {
                samples: est.samples,
                seed: est.seed,
            },
        };
        Ok(Extension { oracle, engine })
    }

    pub fn n(&self) -> usize {
        self.oracle.n()
    }

    pub fn oracle(&self) -> &'a Oracle {
        self.oracle
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.engine, Engine::Exact(_))
    }

    /// `f(S)` through the same source the extension uses.
    pub fn set_value(&self, s: &Subset) -> f64 {
        match &self.engine {
            Engine::Exact(t) if s.ground_size() <= 64 => t[s.mask() as usize],
            _ => self.oracle.eval(s),
        }
    }

    /// Monte-Carlo mean of `g(R)` with `R` drawn from thresholds against `x`
    /// (coordinate `skip` excluded from the draw).
    fn sampled<G>(&self, x: &[f64], skip: Option<usize>, key: &[u64], g: G) -> MeanEstimate
    where
        G: Fn(&Subset) -> f64 + Sync + Send,
    {
        let Engine::Sampled { samples, seed } = self.engine else {
            unreachable!("sampled path on exact engine")
        };
        let n = x.len();
        let (sum, sum_sq) = par::batched_sums(samples, |batch, count| {
            let mut tags = key.to_vec();
            tags.push(batch);
            let mut rng = rng::stream(seed, &tags);
            let (mut s1, mut s2) = (0.0, 0.0);
            let mut set = Subset::empty(n);
            for _ in 0..count {
                for (v, &xv) in x.iter().enumerate() {
                    let t: f64 = rng.random();
                    if Some(v) != skip && t < xv {
                        set.insert(v);
                    } else {
                        set.remove(v);
                    }
                }
                let val = g(&set);
                s1 += val;
                s2 += val * val;
            }
            (s1, s2)
        });
        MeanEstimate::from_sums(sum, sum_sq, samples)
    }

    pub fn value(&self, x: &Point, key: &[u64]) -> MeanEstimate {
        self.value_slice(x.as_slice(), key)
    }

    pub fn value_slice(&self, x: &[f64], key: &[u64]) -> MeanEstimate {
        if x.iter().all(|&v| v == 0.0 || v == 1.0) {
            let s = Subset::from_indices(x.len(), (0..x.len()).filter(|&u| x[u] == 1.0));
            return MeanEstimate::exact(self.set_value(&s));
        }
        match &self.engine {
            Engine::Exact(t) => MeanEstimate::exact(table_value(t, x)),
            Engine::Sampled { .. } => self.sampled(x, None, key, |s| self.oracle.eval(s)),
        }
    }

    /// `∂_u F(x)`; sampled mode evaluates both sides on the same draw.
    pub fn partial(&self, x: &Point, u: usize, key: &[u64]) -> MeanEstimate {
        self.partial_slice(x.as_slice(), u, key)
    }

    pub fn partial_slice(&self, x: &[f64], u: usize, key: &[u64]) -> MeanEstimate {
        match &self.engine {
            Engine::Exact(t) => MeanEstimate::exact(table_partial(t, x, u)),
            Engine::Sampled { .. } => {
                let mut tags = key.to_vec();
                tags.push(u as u64);
                self.sampled(x, Some(u), &tags, |s| {
                    self.oracle.eval(&s.with(u)) - self.oracle.eval(s)
                })
            }
        }
    }

    /// All partial derivatives, evaluated in parallel.
    pub fn gradient(&self, x: &[f64], key: &[u64]) -> Vec<MeanEstimate> {
        par::map_range(x.len(), |u| self.partial_slice(x, u, key))
    }

    /// `w_u = F(x ∨ 1_u) - F(x) = (1 - x_u) ∂_u F(x)` for every `u`.
    pub fn up_weights(&self, x: &[f64], key: &[u64]) -> Vec<f64> {
        self.gradient(x, key)
            .iter()
            .zip(x)
            .map(|(d, &xu)| (1.0 - xu) * d.mean)
            .collect()
    }

    /// `w_u = F(x ∧ 1_{N-u}) - F(x) = -x_u ∂_u F(x)` for every `u`.
    pub fn down_weights(&self, x: &[f64], key: &[u64]) -> Vec<f64> {
        self.gradient(x, key)
            .iter()
            .zip(x)
            .map(|(d, &xu)| -xu * d.mean)
            .collect()
    }

    /// `F(a)` and `F(b)` from one common draw (sampled) or exactly.
    pub fn value_pair(&self, a: &[f64], b: &[f64], key: &[u64]) -> (f64, f64) {
        match &self.engine {
            Engine::Exact(t) => (table_value(t, a), table_value(t, b)),
            Engine::Sampled { samples, seed } => {
                let n = a.len();
                let (samples, seed) = (*samples, *seed);
                let parts = par::map_range(samples.div_ceil(par::BATCH), |batch| {
                    let count = par::BATCH.min(samples - batch * par::BATCH);
                    let mut tags = key.to_vec();
                    tags.push(batch as u64);
                    let mut rng = rng::stream(seed, &tags);
                    let (mut sa, mut sb) = (0.0, 0.0);
                    for _ in 0..count {
                        let mut ra = Subset::empty(n);
                        let mut rb = Subset::empty(n);
                        for u in 0..n {
                            let t: f64 = rng.random();
                            if t < a[u] {
                                ra.insert(u);
                            }
                            if t < b[u] {
                                rb.insert(u);
                            }
                        }
                        sa += self.oracle.eval(&ra);
                        sb += self.oracle.eval(&rb);
                    }
                    (sa, sb)
                });
                let (sa, sb) = parts.into_iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
                (sa / samples as f64, sb / samples as f64)
            }
        }
    }
}
