//! The full lemma and property suite, run against the built-in fixtures.

use rand::Rng;
use serde::Serialize;

use crate::check::{Check, Report, Status};
use crate::dmcg::{self, DmcgConfig, Variant};
use crate::error::Result;
use crate::fixtures;
use crate::mcg::{self, McgConfig};
use crate::multilinear::{
    check_equal_prob_bound, check_lemma_general_properties, check_linearization, check_max_probability_damage,
    check_union_bound_symmetric,
};
use crate::multilinear::{Estimator, Point};
use crate::oracle::{brute_cardinality, brute_polytope_integral, brute_unconstrained, CardinalityMode};
use crate::polytope::Polytope;
use crate::rng;
use crate::setfn::Oracle;
use crate::subset::Subset;
use crate::twosided::{check_loss_gain, natural_order, run_two_sided};
use crate::welfare::{self, WelfareInstance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfCheckConfig {
    /// Monte-Carlo trials per statistical check.
    pub trials: usize,
    /// Discretization steps for the continuous algorithms; `None` uses
    /// `ceil(n^5 T)`, so that `δ <= n^-5`.
    pub steps: Option<usize>,
    pub seed: u64,
}

impl Default for SelfCheckConfig {
    fn default() -> Self {
        SelfCheckConfig {
            trials: 100_000,
            steps: None,
            seed: 0,
        }
    }
}

/// Accumulates checks by name, in first-seen order.
struct Suite {
    report: Report,
}

impl Suite {
    fn add(&mut self, section: &str, c: Check) {
        let name = format!("{section}/{}", c.name);
        match self.report.checks.iter_mut().find(|x| x.name == name) {
            Some(existing) => existing.absorb(c),
            None => {
                let mut c = c;
                c.name = name;
                self.report.push(c);
            }
        }
    }

    fn add_report(&mut self, section: &str, r: Report) {
        for c in r.checks {
            self.add(section, c);
        }
    }
}

pub fn run_self_check(cfg: &SelfCheckConfig) -> Result<Report> {
    let mut suite = Suite {
        report: Report::new("self-check"),
    };
    let seed = |tags: &[u64]| rng::derive_seed(cfg.seed, tags);
    let fixtures = fixtures::builtin();

    for (i, (_, f)) in fixtures.iter().enumerate() {
        let i = i as u64;
        suite.add_report("multilinear", check_lemma_general_properties(f, 40, seed(&[1, i]))?);
        suite.add("multilinear", check_linearization(f, 40, 0.02, seed(&[2, i]))?);
        let a = Subset::from_indices(f.n(), (0..f.n()).filter(|u| u % 2 == 0));
        suite.add(
            "multilinear",
            check_equal_prob_bound(f, &a, 0.5, cfg.trials, seed(&[3, i])),
        );
        suite.add(
            "multilinear",
            check_max_probability_damage(f, 0.3, cfg.trials, seed(&[4, i])),
        );
        if f.is_symmetric() {
            union_bounds(&mut suite, f, seed(&[5, i]))?;
            two_sided(&mut suite, f)?;
        }
        if f.n() >= 2 {
            continuous(&mut suite, f, cfg)?;
        }
    }

    for k in 2..=5 {
        suite.add(
            "welfare",
            welfare::check_tight_expectation(k, cfg.trials, seed(&[6, k as u64]))?,
        );
    }
    let partial_cases = [
        welfare::tight_instance(3)?,
        WelfareInstance::new(3, fixtures[2].1.fresh())?,
        WelfareInstance::new(2, fixtures[6].1.fresh())?,
    ];
    for (j, inst) in partial_cases.iter().enumerate() {
        let (opt_alloc, opt) = welfare::brute_force_welfare(inst)?;
        let j = j as u64;
        suite.add_report(
            "welfare",
            welfare::check_partial_union_bounds(inst, &opt_alloc, cfg.trials, seed(&[7, j]))?,
        );
        suite.add(
            "welfare",
            welfare::check_random_assign_ratio(inst, opt, cfg.trials, seed(&[8, j])),
        );
    }
    for (j, name) in ["path5", "star6", "coverage5"].iter().enumerate() {
        let f = &fixtures.iter().find(|(n, _)| n == name).expect("known fixture").1;
        suite.add_report(
            "welfare",
            welfare::check_appendix_c_lemmas(f, cfg.trials, seed(&[9, j as u64]))?,
        );
    }
    Ok(suite.report)
}

/// `F(1_S ∨ x) >= f(S) - F(x)` on the final point of a measured-greedy run
/// (which satisfies the precondition) and on random points, over every `S`. Points whose
/// precondition fails are counted in the note, not asserted.
fn union_bounds(suite: &mut Suite, f: &Oracle, seed: u64) -> Result<()> {
    let n = f.n();
    let p = Polytope::cardinality(n, n.div_ceil(2))?;
    let (y, _) = mcg::run_mcg(f, &p, &McgConfig::new(1.0, 100, Estimator::exact()))?;
    let mut r = rng::stream(seed, &[]);
    let mut points = vec![y];
    for _ in 0..4 {
        points.push(Point::new((0..n).map(|_| r.random::<f64>()).collect())?);
    }
    let mut check = Check::new("union_bound_symmetric");
    let mut unmet = 0;
    for x in &points {
        for m in 0..1u64 << n {
            let c = check_union_bound_symmetric(f, x, &Subset::from_mask(n, m))?;
            if c.status == Status::PreconditionUnmet {
                unmet += 1;
                break;
            }
            check.absorb(c);
        }
    }
    if unmet > 0 {
        check.note = format!("{unmet} random point(s) skipped: precondition unmet");
    }
    suite.add("union_bound", check);
    Ok(())
}

fn two_sided(suite: &mut Suite, f: &Oracle) -> Result<()> {
    let (opt, _) = brute_unconstrained(f)?;
    let (_, trace) = run_two_sided(f, &natural_order(f.n()))?;
    suite.add_report("twosided", check_loss_gain(f, &trace, &opt)?);
    Ok(())
}

fn continuous(suite: &mut Suite, f: &Oracle, cfg: &SelfCheckConfig) -> Result<()> {
    let n = f.n();
    let k = n / 2;
    let est = Estimator::exact();
    let steps = |t: f64| cfg.steps.unwrap_or(((n as f64).powi(5) * t).ceil().max(1.0) as usize);

    if f.is_symmetric() {
        let p = Polytope::cardinality(n, k)?;
        let mc = McgConfig::default_for(&p, est);
        let mc = McgConfig::new(mc.t, steps(mc.t), est);
        let (_, traj) = mcg::run_mcg(f, &p, &mc)?;
        let (opt, _) = brute_polytope_integral(f, &p)?;
        suite.add_report("mcg", mcg::check_feasibility_invariants(&traj, &p, mc.t));
        suite.add("mcg", mcg::check_step_bound(f, &traj, &opt)?);
        suite.add("mcg", mcg::check_downward_max(f, &traj)?);
    }

    let variant = if f.is_symmetric() {
        Variant::Symmetric
    } else {
        Variant::General
    };
    let t = DmcgConfig::new(variant, 1, est).horizon(n, k);
    let (_, traj) = dmcg::run_dmcg(f, k, &DmcgConfig::new(variant, steps(t), est))?;
    suite.add_report("dmcg", dmcg::check_y_properties(&traj));
    suite.add("dmcg", dmcg::check_max_y(&traj));
    if variant == Variant::Symmetric {
        let (_, opt) = brute_cardinality(f, k, CardinalityMode::Eq)?;
        suite.add("dmcg", dmcg::check_step_bound(f, &traj, opt)?);
        let last = traj.last();
        let (y1, y2) = (Point::new(last.y1.clone())?, Point::new(last.y2.clone())?);
        if y1.le(&y2, 1e-9) {
            suite.add_report("dmcg", dmcg::check_concave_segment(f, &y1, &y2)?);
        } else {
            suite.add(
                "dmcg",
                Check::skipped("segment_concave", "final y1 not below y2; see y1_below_y2"),
            );
        }
    }
    Ok(())
}
