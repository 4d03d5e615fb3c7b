//! Deterministic two-sided greedy for unconstrained maximization.
//!
//! `X` grows from `∅` and `Y` shrinks from `N`. Element `u_i` joins `X`
//! when `a_i = f(X + u_i) - f(X)` is at least `b_i = f(Y - u_i) - f(Y)`,
//! and leaves `Y` otherwise. A half-approximation for symmetric `f`.

use std::io::Write;

use serde::Serialize;

use crate::check::{Check, Report};
use crate::error::{Error, Result};
use crate::mcg::csv_err;
use crate::setfn::Oracle;
use crate::subset::Subset;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyStep {
    /// 1-based iteration index.
    pub i: usize,
    pub u: usize,
    pub a: f64,
    pub b: f64,
    pub branch: Branch,
    pub x: Subset,
    pub y: Subset,
    pub fx: f64,
    pub fy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyTrace {
    pub n: usize,
    pub f_empty: f64,
    pub f_full: f64,
    pub steps: Vec<GreedyStep>,
}

impl GreedyTrace {
    /// `X_i` for `0 <= i <= n`.
    pub fn x(&self, i: usize) -> Subset {
        if i == 0 {
            Subset::empty(self.n)
        } else {
            self.steps[i - 1].x.clone()
        }
    }

    /// `Y_i` for `0 <= i <= n`.
    pub fn y(&self, i: usize) -> Subset {
        if i == 0 {
            Subset::full(self.n)
        } else {
            self.steps[i - 1].y.clone()
        }
    }

    /// Columns `i, a_i, b_i, branch`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "a_i", "b_i", "branch"]).map_err(csv_err)?;
        for s in &self.steps {
            let branch = match s.branch {
                Branch::X => "X",
                Branch::Y => "Y",
            };
            w.write_record([s.i.to_string(), s.a.to_string(), s.b.to_string(), branch.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn natural_order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Runs the greedy over `order` (a permutation of the ground set). Uses
/// `2n + 2` oracle calls.
pub fn run_two_sided(f: &Oracle, order: &[usize]) -> Result<(Subset, GreedyTrace)> {
    let n = f.n();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&u| u >= n || std::mem::replace(&mut seen[u], true)) {
        return Err(Error::InvalidArgument(
            "order must be a permutation of the ground set".into(),
        ));
    }
    let mut x = Subset::empty(n);
    let mut y = Subset::full(n);
    let mut fx = f.eval(&x);
    let mut fy = f.eval(&y);
    let mut trace = GreedyTrace {
        n,
        f_empty: fx,
        f_full: fy,
        steps: Vec::with_capacity(n),
    };
    for (i, &u) in order.iter().enumerate() {
        let xu = x.with(u);
        let yu = y.without(u);
        let (fxu, fyu) = (f.eval(&xu), f.eval(&yu));
        let (a, b) = (fxu - fx, fyu - fy);
        let branch = if a >= b {
            x = xu;
            fx = fxu;
            Branch::X
        } else {
            y = yu;
            fy = fyu;
            Branch::Y
        };
        trace.steps.push(GreedyStep {
            i: i + 1,
            u,
            a,
            b,
            branch,
            x: x.clone(),
            y: y.clone(),
            fx,
            fy,
        });
    }
    Ok((x, trace))
}

/// Per-iteration loss-gain inequality
/// `[f(OPT_{i-1}) - f(OPT_i)] + [f(OPT̄_{i-1}) - f(OPT̄_i)] <= [f(X_i) - f(X_{i-1})] + [f(Y_i) - f(Y_{i-1})]`
/// with `OPT_i = (OPT ∪ X_i) ∩ Y_i`, plus the endpoint identities and
/// `X_i ⊆ Y_i`.
pub fn check_loss_gain(f: &Oracle, trace: &GreedyTrace, opt: &Subset) -> Result<Report> {
    if !f.is_symmetric() {
        return Err(Error::InvalidArgument(
            "the loss-gain ledger needs a symmetric function".into(),
        ));
    }
    let n = trace.n;
    let opt_bar = opt.complement();
    let hybrid = |base: &Subset, i: usize| base.union(&trace.x(i)).intersection(&trace.y(i));
    let mut ledger = Check::new("loss_gain");
    let mut nested = Check::new("x_inside_y");
    let mut ends = Check::new("endpoints");

    let (mut prev_o, mut prev_ob) = (f.eval(opt), f.eval(&opt_bar));
    let (mut prev_x, mut prev_y) = (trace.f_empty, trace.f_full);
    for i in 1..=n {
        let (xi, yi) = (trace.x(i), trace.y(i));
        nested.record(if xi.is_subset_of(&yi) { 0.0 } else { -1.0 }, 0.0, 0.0);
        let (o, ob) = (f.eval(&hybrid(opt, i)), f.eval(&hybrid(&opt_bar, i)));
        let (fx, fy) = (f.eval(&xi), f.eval(&yi));
        let loss = (prev_o - o) + (prev_ob - ob);
        let gain = (fx - prev_x) + (fy - prev_y);
        ledger.record(gain, loss, TOL);
        (prev_o, prev_ob, prev_x, prev_y) = (o, ob, fx, fy);
    }
    let same = |a: &Subset, b: &Subset| if a == b { 0.0 } else { -1.0 };
    ends.record(same(&hybrid(opt, 0), opt), 0.0, 0.0);
    ends.record(same(&hybrid(opt, n), &trace.x(n)), 0.0, 0.0);
    ends.record(same(&trace.x(n), &trace.y(n)), 0.0, 0.0);

    let mut report = Report::new("two-sided greedy ledger");
    report.push(ledger);
    report.push(nested);
    report.push(ends);
    Ok(report)
}
