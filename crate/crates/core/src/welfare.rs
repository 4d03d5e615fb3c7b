//! Submodular Welfare with `k` players sharing one utility.
//!
//! [`random_assign`] sends every item to a uniformly random player. Its
//! expected total is at least `1 - (1 - 1/k)^{k-1}` times the optimum, with
//! equality on [`tight_instance`].

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::check::{Check, MeanEstimate, Report};
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{self, StreamRng};
use crate::setfn::{FromFn, Oracle, SetFnSpec};
use crate::subset::Subset;

const TOL: f64 = 1e-9;
pub const SEARCH_LIMIT: usize = 10_000_000;
pub const FAMILY_LEMMA_LIMIT: usize = 12;

const TAG_ASSIGN: u64 = 0x5a;
const TAG_PARTIAL: u64 = 0x5b;
const TAG_DISJOINT: u64 = 0x5c;
const TAG_REPEATED: u64 = 0x5d;

pub struct WelfareInstance {
    pub k: usize,
    pub utility: Oracle,
}

impl WelfareInstance {
    pub fn new(k: usize, utility: Oracle) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance(
                "a welfare instance needs at least one player".into(),
            ));
        }
        Ok(WelfareInstance { k, utility })
    }

    pub fn items(&self) -> usize {
        self.utility.n()
    }
}

/// `{"type": "welfare", "k": 3, "utility": {...}}` or
/// `{"type": "welfare_tight", "k": 3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WelfareSpec {
    Welfare { k: usize, utility: SetFnSpec },
    WelfareTight { k: usize },
}

impl WelfareSpec {
    pub fn build(&self) -> Result<WelfareInstance> {
        match self {
            WelfareSpec::Welfare { k, utility } => WelfareInstance::new(*k, utility.build()?),
            WelfareSpec::WelfareTight { k } => tight_instance(*k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    pub parts: Vec<Subset>,
    /// `assignment[u]` is the player holding item `u`.
    pub assignment: Vec<usize>,
}

impl Allocation {
    pub fn from_assignment(k: usize, assignment: Vec<usize>) -> Result<Self> {
        let n = assignment.len();
        let mut parts = vec![Subset::empty(n); k];
        for (u, &p) in assignment.iter().enumerate() {
            if p >= k {
                return Err(Error::InvalidArgument(format!(
                    "item {u} assigned to player {p} of {k}"
                )));
            }
            parts[p].insert(u);
        }
        Ok(Allocation { parts, assignment })
    }

    /// `Σ_i f(S_i)`.
    pub fn total(&self, f: &Oracle) -> f64 {
        self.parts.iter().map(|s| f.eval(s)).sum()
    }
}

/// `1 - (1 - 1/k)^{k-1}`.
pub fn ratio_floor(k: usize) -> f64 {
    let k = k as f64;
    1.0 - (1.0 - 1.0 / k).powf(k - 1.0)
}

fn assign_with(k: usize, n: usize, r: &mut StreamRng) -> Vec<usize> {
    (0..n).map(|_| r.random_range(0..k)).collect()
}

pub fn random_assign(inst: &WelfareInstance, seed: u64) -> Allocation {
    let mut r = rng::stream(seed, &[TAG_ASSIGN]);
    let assignment = assign_with(inst.k, inst.items(), &mut r);
    Allocation::from_assignment(inst.k, assignment).expect("players drawn in range")
}

/// Mean total of `trials` runs of [`random_assign`], run `t` using seed
/// `derive_seed(seed, [t])`.
pub fn mean_random_total(inst: &WelfareInstance, trials: usize, seed: u64) -> MeanEstimate {
    assert!(trials > 0);
    let (s, q) = par::batched_sums(trials, |batch, count| {
        let (mut s, mut q) = (0.0, 0.0);
        for j in 0..count {
            let t = batch * par::BATCH as u64 + j as u64;
            let v = random_assign(inst, rng::derive_seed(seed, &[t])).total(&inst.utility);
            s += v;
            q += v * v;
        }
        (s, q)
    });
    MeanEstimate::from_sums(s, q, trials)
}

/// `k` items with `f(S) = 1 - (|S| - 1)/(k - 1)` for `S ≠ ∅` and `f(∅) = 0`.
pub fn tight_instance(k: usize) -> Result<WelfareInstance> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "the tight instance needs k >= 2, got {k}"
        )));
    }
    let km1 = (k - 1) as f64;
    let f = FromFn::new(k, k == 2, move |s: &Subset| {
        if s.is_empty() {
            0.0
        } else {
            1.0 - (s.len() as f64 - 1.0) / km1
        }
    });
    WelfareInstance::new(k, Oracle::new(f))
}

/// Exhaustive search over all `k^n` assignments. Ties go to the
/// lexicographically smallest assignment (item 0 most significant).
pub fn brute_force_welfare(inst: &WelfareInstance) -> Result<(Allocation, f64)> {
    let (k, n) = (inst.k, inst.items());
    let space = (k as f64).powi(n as i32);
    if space > SEARCH_LIMIT as f64 {
        return Err(Error::TooLarge {
            what: "welfare search (k^n assignments)",
            n: space.min(usize::MAX as f64) as usize,
            limit: SEARCH_LIMIT,
        });
    }
    let table = inst.utility.table()?;
    if n == 0 {
        let a = Allocation::from_assignment(k, vec![])?;
        let v = a.total(&inst.utility);
        return Ok((a, v));
    }
    // Split on the first item's player (and the second one if there is
    // one); each chunk walks the rest in base-k order.
    let head = if n >= 2 { 2 } else { 1 };
    let chunks = k.pow(head as u32);
    let tail = n - head;
    let per_chunk = k.pow(tail as u32);
    let best = par::map_range(chunks, |c| {
        let mut digits = vec![0usize; n];
        digits[0] = if head == 2 { c / k } else { c };
        if head == 2 {
            digits[1] = c % k;
        }
        let mut best = (f64::NEG_INFINITY, 0usize);
        for idx in 0..per_chunk {
            let mut rest = idx;
            for u in (head..n).rev() {
                digits[u] = rest % k;
                rest /= k;
            }
            let mut masks = vec![0u64; k];
            for (u, &p) in digits.iter().enumerate() {
                masks[p] |= 1 << u;
            }
            let v: f64 = masks.iter().map(|&m| table[m as usize]).sum();
            if v > best.0 + TOL {
                best = (v, c * per_chunk + idx);
            }
        }
        best
    });
    let (_, code) = best
        .into_iter()
        .fold((f64::NEG_INFINITY, 0), |acc, b| if b.0 > acc.0 + TOL { b } else { acc });
    let mut assignment = vec![0; n];
    let mut rest = code;
    for u in (0..n).rev() {
        assignment[u] = rest % k;
        rest /= k;
    }
    let alloc = Allocation::from_assignment(k, assignment)?;
    let v = alloc.total(&inst.utility);
    Ok((alloc, v))
}

/// Monte-Carlo means of `width` quantities drawn together per trial.
fn joint_monte_carlo<G>(trials: usize, seed: u64, tags: &[u64], width: usize, g: G) -> Vec<MeanEstimate>
where
    G: Fn(&mut StreamRng, &mut [f64]) + Sync + Send,
{
    let parts = par::map_range(trials.div_ceil(par::BATCH), |b| {
        let count = par::BATCH.min(trials - b * par::BATCH);
        let mut t = tags.to_vec();
        t.push(b as u64);
        let mut r = rng::stream(seed, &t);
        let mut sums = vec![(0.0, 0.0); width];
        let mut out = vec![0.0; width];
        for _ in 0..count {
            g(&mut r, &mut out);
            for (s, &v) in sums.iter_mut().zip(&out) {
                s.0 += v;
                s.1 += v * v;
            }
        }
        sums
    });
    (0..width)
        .map(|i| {
            let (s, q) = parts.iter().fold((0.0, 0.0), |(s, q), p| (s + p[i].0, q + p[i].1));
            MeanEstimate::from_sums(s, q, trials)
        })
        .collect()
}

/// Two-sided `|estimate - expected| <= 4σ + tol`.
fn record_two_sided(check: &mut Check, est: &MeanEstimate, expected: f64) {
    check.record_stat(est, expected, TOL);
    check.record_stat(&est.scale(-1.0), -expected, TOL);
}

/// Checks, for `0 <= i <= k`, the closed-form bound
/// `E[f(T_i(1/k))] >= [(k² - i)/(k(k-1)) - (1 - 1/k)^{i-1}]·opt/k` and the
/// recursive step
/// `E[f(T_i(1/k))] >= (1 - 1/k) E[f(T_{i-1}(1/k))] + (1 - (i-1)/(k(k-1)))·opt/k²`,
/// where `T_i` is the union of the optimal parts of the first `i` players
/// of a random order.
pub fn check_partial_union_bounds(
    inst: &WelfareInstance,
    optimal: &Allocation,
    trials: usize,
    seed: u64,
) -> Result<Report> {
    let (k, n, f) = (inst.k, inst.items(), &inst.utility);
    if optimal.parts.len() != k || optimal.assignment.len() != n {
        return Err(Error::InvalidArgument("allocation does not match the instance".into()));
    }
    let mut report = Report::new("partial unions");
    if k < 2 {
        report.push(Check::skipped("partial_union_closed", "needs k >= 2"));
        report.push(Check::skipped("partial_union_recursive", "needs k >= 2"));
        report.push(Check::skipped("random_assign_floor", "needs k >= 2"));
        return Ok(report);
    }
    let opt = optimal.total(f);
    let kf = k as f64;
    let q = 1.0 / kf;
    // Slots 0..=k hold f(T_i(1/k)); slots k+1..=2k hold the recursive
    // differences for i = 1..=k.
    let est = joint_monte_carlo(trials, seed, &[TAG_PARTIAL, k as u64], 2 * k + 1, |r, out| {
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(r);
        let kept = Subset::from_indices(n, (0..n).filter(|_| r.random::<f64>() < q));
        let mut t = Subset::empty(n);
        out[0] = f.eval(&t);
        for i in 1..=k {
            t = t.union(&optimal.parts[order[i - 1]].intersection(&kept));
            out[i] = f.eval(&t);
            out[k + i] = out[i] - (1.0 - q) * out[i - 1];
        }
    });
    let mut closed = Check::new("partial_union_closed");
    let mut recursive = Check::new("partial_union_recursive");
    for i in 0..=k {
        let fi = i as f64;
        let bound = ((kf * kf - fi) / (kf * (kf - 1.0)) - (1.0 - q).powf(fi - 1.0)) * opt / kf;
        closed.record_stat(&est[i], bound, TOL);
        if i >= 1 {
            let step = (1.0 - (fi - 1.0) / (kf * (kf - 1.0))) * opt / (kf * kf);
            recursive.record_stat(&est[k + i], step, TOL);
        }
    }
    let mut floor = Check::new("random_assign_floor");
    floor.record_stat(&est[k].scale(kf), ratio_floor(k) * opt, TOL);
    report.push(closed);
    report.push(recursive);
    report.push(floor);
    Ok(report)
}

/// Mean total of random assignment against `ratio_floor(k)·opt`.
pub fn check_random_assign_ratio(inst: &WelfareInstance, opt: f64, trials: usize, seed: u64) -> Check {
    let est = mean_random_total(inst, trials, seed);
    let mut c = Check::new("random_assign_ratio");
    if opt > 0.0 {
        c.record_stat(&est.scale(1.0 / opt), ratio_floor(inst.k), TOL);
    } else {
        c.record_stat(&est, 0.0, TOL);
    }
    c
}

/// Mean total on `tight_instance(k)` equals `k·ratio_floor(k)` within 4σ.
pub fn check_tight_expectation(k: usize, trials: usize, seed: u64) -> Result<Check> {
    let inst = tight_instance(k)?;
    let est = mean_random_total(&inst, trials, seed);
    let mut c = Check::new(format!("tight_expectation_k{k}"));
    record_two_sided(&mut c, &est, k as f64 * ratio_floor(k));
    Ok(c)
}

/// For disjoint `A_1..A_ℓ` and `1 <= h <= ℓ`, the union `R(A, h)` of `h`
/// distinct members chosen uniformly satisfies
/// `E[f(R(A, h))] >= (1 - (h-1)/(ℓ-1))·avg f(A_i)`.
pub fn check_disjoint_unions(f: &Oracle, family: &[Subset], trials: usize, seed: u64) -> Result<Check> {
    let l = family.len();
    if l < 2 {
        return Err(Error::InvalidArgument("the family needs at least two sets".into()));
    }
    for (i, a) in family.iter().enumerate() {
        if family[i + 1..].iter().any(|b| !a.is_disjoint(b)) {
            return Err(Error::InvalidArgument("family members must be disjoint".into()));
        }
    }
    let n = f.n();
    let avg = family.iter().map(|a| f.eval(a)).sum::<f64>() / l as f64;
    let mut c = Check::new("disjoint_unions");
    let est = joint_monte_carlo(trials, seed, &[TAG_DISJOINT, l as u64], l, |r, out| {
        for h in 1..=l {
            let picked = index::sample(r, l, h);
            let u = picked.iter().fold(Subset::empty(n), |acc, i| acc.union(&family[i]));
            out[h - 1] = f.eval(&u);
        }
    });
    for h in 1..=l {
        let coeff = 1.0 - (h as f64 - 1.0) / (l as f64 - 1.0);
        c.record_stat(&est[h - 1], coeff * avg, TOL);
    }
    Ok(c)
}

/// `E[f(∪ A_i(p))] >= Σ_{I ⊆ [ℓ]} p^{|I|}(1-p)^{ℓ-|I|} f(∪_{i∈I} A_i)` with
/// the `A_i(p)` independent.
pub fn check_equal_prob_repeated(f: &Oracle, family: &[Subset], p: f64, trials: usize, seed: u64) -> Result<Check> {
    let l = family.len();
    if l > 16 {
        return Err(Error::TooLarge {
            what: "repeated-union family",
            n: l,
            limit: 16,
        });
    }
    let n = f.n();
    let rhs: f64 = (0..1usize << l)
        .map(|m| {
            let size = m.count_ones() as i32;
            let u = (0..l)
                .filter(|i| m >> i & 1 == 1)
                .fold(Subset::empty(n), |acc, i| acc.union(&family[i]));
            p.powi(size) * (1.0 - p).powi(l as i32 - size) * f.eval(&u)
        })
        .sum();
    let members: Vec<Vec<usize>> = family.iter().map(Subset::to_vec).collect();
    let est = joint_monte_carlo(trials, seed, &[TAG_REPEATED, l as u64], 1, |r, out| {
        let mut s = Subset::empty(n);
        for a in &members {
            for &u in a {
                if r.random::<f64>() < p {
                    s.insert(u);
                }
            }
        }
        out[0] = f.eval(&s);
    });
    let mut c = Check::new("equal_prob_repeated_bound");
    c.record_stat(&est[0], rhs, TOL);
    Ok(c)
}

/// The disjoint-union and repeated equal-probability lemmas on seeded
/// random families over `f`'s ground set: disjoint families with `ℓ ∈ {2, 3, 4}` and overlapping families with
/// `ℓ ∈ {1, 2, 3}` at `p ∈ {0.25, 0.5}`.
pub fn check_appendix_c_lemmas(f: &Oracle, trials: usize, seed: u64) -> Result<Report> {
    let n = f.n();
    if n > FAMILY_LEMMA_LIMIT {
        return Err(Error::TooLarge {
            what: "union-family lemma checks",
            n,
            limit: FAMILY_LEMMA_LIMIT,
        });
    }
    let mut r = rng::stream(seed, &[TAG_DISJOINT, TAG_REPEATED]);
    let mut disjoint = Check::new("disjoint_unions");
    let mut repeated = Check::new("equal_prob_repeated_bound");
    let mut case = 0u64;
    for l in 2..=4usize {
        for _ in 0..2 {
            // Bucket `l` leaves an item out of every set.
            let mut family = vec![Subset::empty(n); l];
            for u in 0..n {
                let b = r.random_range(0..=l);
                if b < l {
                    family[b].insert(u);
                }
            }
            let c = check_disjoint_unions(f, &family, trials, rng::derive_seed(seed, &[case]))?;
            disjoint.absorb(c);
            case += 1;
        }
    }
    for l in 1..=3usize {
        for _ in 0..2 {
            let family: Vec<Subset> = (0..l)
                .map(|_| Subset::from_indices(n, (0..n).filter(|_| r.random::<f64>() < 0.5)))
                .collect();
            for p in [0.25, 0.5] {
                let c = check_equal_prob_repeated(f, &family, p, trials, rng::derive_seed(seed, &[case]))?;
                repeated.absorb(c);
                case += 1;
            }
        }
    }
    let mut report = Report::new("union-family lemmas");
    report.push(disjoint);
    report.push(repeated);
    Ok(report)
}
