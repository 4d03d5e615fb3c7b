//! Executable forms of the multilinear-extension lemmas.

use rand::Rng;

use super::{Estimator, Extension, Point};
use crate::check::{Check, MeanEstimate, Report, Status};
use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::setfn::Oracle;
use crate::subset::Subset;

const TOL: f64 = 1e-9;

fn random_point<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Checks on random points, exact mode:
/// (a) the complement's extension at `x` equals `F(1_N - x)`;
/// (b) symmetric `f` has `F(x) = F̄(x)`;
/// (c) `F(x) - F(y) <= F(x - z) - F(y - z)` for `z <= y <= x`.
pub fn check_lemma_general_properties(f: &Oracle, trials: usize, seed: u64) -> Result<Report> {
    let n = f.n();
    let ext = Extension::new(f, &Estimator::exact())?;
    let bar = f.complement();
    let ext_bar = Extension::new(&bar, &Estimator::exact())?;
    let mut rng = rng::stream(seed, &[0x1e, n as u64]);

    let mut a = Check::new("complement_extension");
    let mut b = if f.is_symmetric() {
        Check::new("symmetric_extension")
    } else {
        Check::skipped("symmetric_extension", "function not symmetric")
    };
    let mut c = Check::new("shifted_differences");

    let mut cases = vec![(vec![0.0; n], vec![0.0; n], vec![0.0; n])];
    for _ in 0..trials {
        let x = random_point(n, &mut rng);
        let y: Vec<f64> = x.iter().map(|&v| v * rng.random::<f64>()).collect();
        let z: Vec<f64> = y.iter().map(|&v| v * rng.random::<f64>()).collect();
        cases.push((x, y, z));
    }
    for (x, y, z) in &cases {
        general_properties_at(&ext, &ext_bar, x, y, z, &mut a, &mut b, &mut c);
    }

    let mut report = Report::new("multilinear general properties");
    report.push(a);
    report.push(b);
    report.push(c);
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn general_properties_at(
    ext: &Extension,
    ext_bar: &Extension,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    a: &mut Check,
    b: &mut Check,
    c: &mut Check,
) {
    let fx = ext.value_slice(x, &[]).mean;
    let one_minus: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
    let fbar_x = ext_bar.value_slice(x, &[]).mean;
    a.record(-(fbar_x - ext.value_slice(&one_minus, &[]).mean).abs(), 0.0, TOL);
    if b.status != Status::Skipped {
        b.record(-(fx - fbar_x).abs(), 0.0, TOL);
    }
    let xz: Vec<f64> = x.iter().zip(z).map(|(a, b)| (a - b).max(0.0)).collect();
    let yz: Vec<f64> = y.iter().zip(z).map(|(a, b)| (a - b).max(0.0)).collect();
    let lhs = ext.value_slice(&xz, &[]).mean - ext.value_slice(&yz, &[]).mean;
    let rhs = fx - ext.value_slice(y, &[]).mean;
    c.record(lhs, rhs, TOL);
}

/// Largest `F(v) - F(y)` over the vertices `v` of the box `{v : 0 <= v <= y}`.
/// The extension is multilinear, so the box maximum sits at a vertex.
pub fn downward_max_violation(ext: &Extension, y: &[f64]) -> f64 {
    let support: Vec<usize> = (0..y.len()).filter(|&u| y[u] > 0.0).collect();
    let fy = ext.value_slice(y, &[]).mean;
    let k = support.len();
    assert!(k <= 24, "vertex enumeration over {k} coordinates");
    par::map_range(1usize << k, |m| {
        let mut v = y.to_vec();
        for (i, &u) in support.iter().enumerate() {
            if m >> i & 1 == 0 {
                v[u] = 0.0;
            }
        }
        ext.value_slice(&v, &[]).mean - fy
    })
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max)
}

/// `F(1_S ∨ x) >= f(S) - F(x)` for symmetric `f`, provided no point below
/// `x` has a larger extension value. When that precondition fails the check
/// reports it instead of asserting the inequality.
pub fn check_union_bound_symmetric(f: &Oracle, x: &Point, s: &Subset) -> Result<Check> {
    if !f.is_symmetric() {
        return Err(Error::InvalidArgument("union bound needs a symmetric function".into()));
    }
    let ext = Extension::new(f, &Estimator::exact())?;
    Ok(union_bound_with(&ext, x.as_slice(), s))
}

pub(crate) fn union_bound_with(ext: &Extension, x: &[f64], s: &Subset) -> Check {
    let mut check = Check::new("union_bound_symmetric");
    let worst = downward_max_violation(ext, x);
    if worst > TOL {
        check.status = Status::PreconditionUnmet;
        check.note = format!("a point below x exceeds F(x) by {worst:.3e}");
        return check;
    }
    let mut joined = x.to_vec();
    for u in s.iter() {
        joined[u] = 1.0;
    }
    let lhs = ext.value_slice(&joined, &[]).mean;
    let rhs = ext.set_value(s) - ext.value_slice(x, &[]).mean;
    check.record(lhs, rhs, TOL);
    check
}

/// Linearization bound: for `|x'_u - x_u| <= δ`,
/// `F(x') - F(x) >= Σ_u (x'_u - x_u) ∂_u F(x) - c n³ δ² max_u f({u})`.
/// Asserts `c = 1` and reports the measured constant in `estimate`.
pub fn check_linearization(f: &Oracle, trials: usize, delta: f64, seed: u64) -> Result<Check> {
    let n = f.n();
    let ext = Extension::new(f, &Estimator::exact())?;
    let max_single = (0..n)
        .map(|u| ext.set_value(&Subset::from_indices(n, [u])))
        .fold(0.0, f64::max);
    let scale = (n as f64).powi(3) * delta * delta * max_single;
    let mut rng = rng::stream(seed, &[0x13, n as u64]);
    let mut check = Check::new("linearization");
    let mut measured = 0.0f64;
    for _ in 0..trials {
        let x = random_point(n, &mut rng);
        let xp: Vec<f64> = x
            .iter()
            .map(|&v| (v + delta * (2.0 * rng.random::<f64>() - 1.0)).clamp(0.0, 1.0))
            .collect();
        let grad = ext.gradient(&x, &[]);
        let linear: f64 = (0..n).map(|u| (xp[u] - x[u]) * grad[u].mean).sum();
        let actual = ext.value_slice(&xp, &[]).mean - ext.value_slice(&x, &[]).mean;
        if scale > 0.0 {
            measured = measured.max((linear - actual) / scale);
        }
        check.record(actual, linear - scale, TOL);
    }
    check.estimate = Some(measured);
    check.note = format!("measured constant c = {measured:.4}");
    Ok(check)
}

/// Monte-Carlo mean of `g(draw)` over `trials` seeded draws.
pub(crate) fn monte_carlo<G>(trials: usize, seed: u64, tags: &[u64], g: G) -> MeanEstimate
where
    G: Fn(&mut rng::StreamRng) -> f64 + Sync + Send,
{
    let (s, q) = par::batched_sums(trials, |batch, count| {
        let mut t = tags.to_vec();
        t.push(batch);
        let mut r = rng::stream(seed, &t);
        let (mut s, mut q) = (0.0, 0.0);
        for _ in 0..count {
            let v = g(&mut r);
            s += v;
            q += v * v;
        }
        (s, q)
    });
    MeanEstimate::from_sums(s, q, trials)
}

/// `E[f(A(p))] >= (1 - p) f(∅) + p f(A)`, where `A(p)` keeps each element
/// of `A` independently with probability `p`.
pub fn check_equal_prob_bound(f: &Oracle, a: &Subset, p: f64, trials: usize, seed: u64) -> Check {
    let n = f.n();
    let members = a.to_vec();
    let est = monte_carlo(trials, seed, &[0xe9, n as u64], |r| {
        let s = Subset::from_indices(n, members.iter().copied().filter(|_| r.random::<f64>() < p));
        f.eval(&s)
    });
    let bound = (1.0 - p) * f.eval(&Subset::empty(n)) + p * f.eval(a);
    let mut check = Check::new("equal_prob_bound");
    check.record_stat(&est, bound, TOL);
    check
}

/// `E[f(R)] >= (1 - p) f(∅)` for a correlated `R` whose elements each
/// appear with probability at most `p`: the ground set is split into
/// `ceil(1/p)` random blocks and `R` is one block chosen uniformly.
pub fn check_max_probability_damage(f: &Oracle, p: f64, trials: usize, seed: u64) -> Check {
    let n = f.n();
    let blocks = (1.0 / p).ceil().max(1.0) as usize;
    let mut r = rng::stream(seed, &[0xda, n as u64, 0]);
    let block_of: Vec<usize> = (0..n).map(|_| r.random_range(0..blocks)).collect();
    let est = monte_carlo(trials, seed, &[0xda, n as u64, 1], |r| {
        let b = r.random_range(0..blocks);
        f.eval(&Subset::from_indices(n, (0..n).filter(|&u| block_of[u] == b)))
    });
    let bound = (1.0 - p) * f.eval(&Subset::empty(n));
    let mut check = Check::new("max_probability_damage");
    check.record_stat(&est, bound, TOL);
    check.note = format!("{blocks} blocks, marginal {:.4}", 1.0 / blocks as f64);
    check
}
