//! Double measured continuous greedy for `max{F(y) : |y| = k}`.
//!
//! Two points move toward each other: `y¹` grows from `1_∅` and `y²`
//! shrinks from `1_N`. Each step splits `1_N` into `I¹ + I²` with
//! `|I¹| = k` so as to maximize the smaller of the two guaranteed gains.
//! The output is the point on the segment `[y¹(T), y²(T)]` of size `k`.
//!
//! The symmetric variant runs to `T = -(n/k) ln(1 - k/n + n^-4)` and
//! cleans up coordinates with the wrong derivative sign after every step;
//! the general variant runs to `T = 1` without cleanup.

mod direction;

pub use direction::{solve_direction, Direction};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::check::{Check, Report};
use crate::error::{Error, Result};
use crate::mcg::{csv_err, is_negative, is_positive};
use crate::multilinear::{Estimator, Extension, Point};
use crate::setfn::Oracle;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Symmetric,
    General,
}

impl Variant {
    /// Weight of `F(y^i)` in the direction objective.
    pub fn coefficient(self) -> f64 {
        match self {
            Variant::Symmetric => 2.0,
            Variant::General => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DmcgConfig {
    pub variant: Variant,
    pub steps: usize,
    pub estimator: Estimator,
    /// Overrides the variant's horizon.
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub record_trajectory: bool,
}

impl DmcgConfig {
    pub fn new(variant: Variant, steps: usize, estimator: Estimator) -> Self {
        DmcgConfig {
            variant,
            steps,
            estimator,
            t: None,
            record_trajectory: true,
        }
    }

    /// Horizon for a (reduced) instance with parameters `n`, `k`.
    pub fn horizon(&self, n: usize, k: usize) -> f64 {
        if let Some(t) = self.t {
            return t;
        }
        match self.variant {
            Variant::Symmetric => symmetric_horizon(n, k),
            Variant::General => 1.0,
        }
    }
}

/// `-(n/k) ln(1 - k/n + n^-4)`.
pub fn symmetric_horizon(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let (n, k) = (n as f64, k as f64);
    -(n / k) * (1.0 - k / n + n.powi(-4)).ln()
}

/// `½[1 - (1 - k/n)^{2n/k}]`.
pub fn symmetric_ratio(n: usize, k: usize) -> f64 {
    let (n, k) = (n as f64, k as f64);
    0.5 * (1.0 - (1.0 - k / n).powf(2.0 * n / k))
}

/// Output of [`reduction2`].
#[derive(Debug)]
pub struct Reduced {
    pub k: usize,
    pub f: Oracle,
    /// `f` was replaced by its complement (and `k` by `n - k`).
    pub complemented: bool,
    /// `k` was replaced by `n - k` with `f` kept, as allowed for symmetric `f`.
    pub mirrored: bool,
}

/// Ensures `2k <= n`: large `k` becomes `n - k`, solved on `f̄`, or on `f`
/// itself when `f` is symmetric.
pub fn reduction2(k: usize, n: usize, f: &Oracle) -> Result<Reduced> {
    if k > n || f.n() != n {
        return Err(Error::InvalidArgument(format!("k = {k} with n = {n}")));
    }
    if 2 * k <= n {
        return Ok(Reduced {
            k,
            f: f.fresh(),
            complemented: false,
            mirrored: false,
        });
    }
    if f.is_symmetric() {
        Ok(Reduced {
            k: n - k,
            f: f.fresh(),
            complemented: false,
            mirrored: true,
        })
    } else {
        Ok(Reduced {
            k: n - k,
            f: f.complement(),
            complemented: true,
            mirrored: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualRecord {
    pub t: f64,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub f1: f64,
    pub f2: f64,
    /// `λ*` and the direction objective of the step taken from this state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualTrajectory {
    pub variant: Variant,
    /// Cardinality actually solved for after the `2k <= n` reduction.
    pub k: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub delta: f64,
    pub steps: usize,
    pub theoretical_regime: bool,
    /// The output is `1_N` minus the solution of the reduced problem.
    pub mirrored: bool,
    pub records: Vec<DualRecord>,
}

impl DualTrajectory {
    pub fn last(&self) -> &DualRecord {
        self.records.last().expect("at least one record")
    }

    /// Columns `t, |y1|, |y2|, F(y1), F(y2), lambda, objective`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "|y1|", "|y2|", "F(y1)", "F(y2)", "lambda", "objective"])
            .map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                r.t.to_string(),
                compensated_sum(&r.y1).to_string(),
                compensated_sum(&r.y2).to_string(),
                r.f1.to_string(),
                r.f2.to_string(),
                opt(r.lambda),
                opt(r.objective),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

const TAG_W1: u64 = 0;
const TAG_W2: u64 = 1;
const TAG_VALUE1: u64 = 2;
const TAG_VALUE2: u64 = 3;
const TAG_CLEAN1: u64 = 4;
const TAG_CLEAN2: u64 = 5;

/// Point of size `k` on the segment from `y¹` to `y²`.
pub fn finish(y1: &[f64], y2: &[f64], k: usize) -> Result<Point> {
    let (a1, a2) = (compensated_sum(y1), compensated_sum(y2));
    let k = k as f64;
    if a2 == a1 {
        if (a1 - k).abs() > TOL {
            return Err(Error::Numerical(format!("|y1| = |y2| = {a1} but k = {k}")));
        }
        return Point::new(y1.to_vec());
    }
    if a1 > k + TOL || a2 < k - TOL {
        return Err(Error::Numerical(format!("k = {k} outside [|y1|, |y2|] = [{a1}, {a2}]")));
    }
    let theta = ((k - a1) / (a2 - a1)).clamp(0.0, 1.0);
    let y: Vec<f64> = y1
        .iter()
        .zip(y2)
        .map(|(&p, &q)| (p * (1.0 - theta) + q * theta).clamp(0.0, 1.0))
        .collect();
    let size = compensated_sum(&y);
    if (size - k).abs() > TOL {
        return Err(Error::Numerical(format!("combined point has size {size}, wanted {k}")));
    }
    Point::new(y)
}

/// Runs the algorithm for `|S| = k`; returns the fractional output and the
/// trajectory of the (possibly reduced) instance.
pub fn run_dmcg(f: &Oracle, k: usize, cfg: &DmcgConfig) -> Result<(Point, DualTrajectory)> {
    let n = f.n();
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    if cfg.steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if cfg.variant == Variant::Symmetric && !f.is_symmetric() {
        return Err(Error::InvalidArgument(
            "the symmetric variant needs a symmetric function".into(),
        ));
    }
    let mirrored = cfg.variant == Variant::Symmetric && 2 * k > n;
    let k_run = if mirrored { n - k } else { k };
    let t_max = cfg.horizon(n, k_run);
    let delta = t_max / cfg.steps as f64;
    let mut traj = DualTrajectory {
        variant: cfg.variant,
        k: k_run,
        t: t_max,
        delta,
        steps: cfg.steps,
        theoretical_regime: delta <= (n as f64).powi(-5),
        mirrored,
        records: Vec::new(),
    };
    let ext = Extension::new(f, &cfg.estimator)?;
    let exact = ext.is_exact();
    let coeff = cfg.variant.coefficient();

    let (mut y1, mut y2) = (vec![0.0; n], vec![1.0; n]);
    if k_run == 0 {
        // only the empty set is feasible; the loop would not move y¹
        y2 = vec![0.0; n];
    }
    let value = |y: &[f64], step: usize, tag: u64| ext.value_slice(y, &[step as u64, tag]).mean;
    for step in 0..cfg.steps {
        if k_run == 0 {
            break;
        }
        let t = step as f64 * delta;
        let w1 = ext.up_weights(&y1, &[step as u64, TAG_W1]);
        let w2 = ext.down_weights(&y2, &[step as u64, TAG_W2]);
        let (f1, f2) = (value(&y1, step, TAG_VALUE1), value(&y2, step, TAG_VALUE2));
        let dir = solve_direction(&w1, &w2, f1, f2, k_run, coeff)?;
        if cfg.record_trajectory {
            traj.records.push(DualRecord {
                t,
                y1: y1.clone(),
                y2: y2.clone(),
                f1,
                f2,
                lambda: Some(dir.lambda),
                objective: Some(dir.objective),
            });
        }
        for u in 0..n {
            y1[u] = (y1[u] + delta * dir.i1[u] * (1.0 - y1[u])).min(1.0);
            y2[u] = (y2[u] - delta * dir.i2[u] * y2[u]).max(0.0);
        }
        if cfg.variant == Variant::Symmetric {
            let key = |tag: u64| [step as u64, tag];
            for u in 0..n {
                let lower = y1[u] > 0.0 && is_negative(&ext.partial_slice(&y1, u, &key(TAG_CLEAN1)), exact);
                let raise = y2[u] < 1.0 && is_positive(&ext.partial_slice(&y2, u, &key(TAG_CLEAN2)), exact);
                if lower {
                    y1[u] = 0.0;
                }
                if raise {
                    y2[u] = 1.0;
                }
            }
        }
    }
    traj.records.push(DualRecord {
        t: t_max,
        y1: y1.clone(),
        y2: y2.clone(),
        f1: value(&y1, cfg.steps, TAG_VALUE1),
        f2: value(&y2, cfg.steps, TAG_VALUE2),
        lambda: None,
        objective: None,
    });
    let y = finish(&y1, &y2, k_run)?;
    let y = if mirrored { y.complement() } else { y };
    Ok((y, traj))
}

/// `y¹(t), y²(t) ∈ [0,1]^N`, `y¹(t) <= y²(t)` at every record, and
/// `|y¹(T)| <= k <= |y²(T)|`.
pub fn check_y_properties(traj: &DualTrajectory) -> Report {
    let mut unit = Check::new("y_in_unit_cube");
    let mut order = Check::new("y1_below_y2");
    let mut sizes = Check::new("sizes_bracket_k");
    for r in &traj.records {
        for (&a, &b) in r.y1.iter().zip(&r.y2) {
            unit.record(a.min(1.0 - a).min(b.min(1.0 - b)), 0.0, 0.0);
            order.record(b, a, TOL);
        }
    }
    let last = traj.last();
    let k = traj.k as f64;
    sizes.record(k, compensated_sum(&last.y1), TOL);
    sizes.record(compensated_sum(&last.y2), k, TOL);
    let mut report = Report::new("y_properties");
    report.push(unit);
    report.push(order);
    report.push(sizes);
    report
}

/// `max(y¹_u(t), 1 - y²_u(t)) <= 1 - (1 - δ)^{t/δ}` at every record.
pub fn check_max_y(traj: &DualTrajectory) -> Check {
    let mut check = Check::new("max_y");
    for (i, r) in traj.records.iter().enumerate() {
        let i = if r.lambda.is_none() { traj.steps } else { i };
        let cap = 1.0 - (1.0 - traj.delta).powi(i as i32);
        for (&a, &b) in r.y1.iter().zip(&r.y2) {
            check.record(cap, a.max(1.0 - b), TOL);
        }
    }
    check
}

/// `F(y^i(t+δ)) - F(y^i(t)) >= δ[f(OPT) - 2F(y^i(t))] - c n³ δ² f(OPT)`
/// for both points, with `c = 1`; the measured constant is `estimate`.
/// Symmetric variant, exact mode, every step recorded.
pub fn check_step_bound(f: &Oracle, traj: &DualTrajectory, opt_value: f64) -> Result<Check> {
    let ext = Extension::new(f, &Estimator::exact())?;
    let n = f.n() as f64;
    let delta = traj.delta;
    let scale = n.powi(3) * delta * delta * opt_value;
    let mut check = Check::new("dual_step_improvement");
    let mut measured = 0.0f64;
    for pair in traj.records.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        for (ya, yb) in [(&a.y1, &b.y1), (&a.y2, &b.y2)] {
            let fa = ext.value_slice(ya, &[]).mean;
            let gain = ext.value_slice(yb, &[]).mean - fa;
            let target = delta * (opt_value - 2.0 * fa);
            if scale > 0.0 {
                measured = measured.max((target - gain) / scale);
            }
            check.record(gain, target - scale, TOL);
        }
    }
    check.estimate = Some(measured);
    check.note = format!("measured constant c = {measured:.4}");
    Ok(check)
}

/// Concavity of `r(x) = F(y¹ + x(y² - y¹))` on a 101-point grid, and
/// `r(x) >= min(r(0), r(1))`. Exact mode.
pub fn check_concave_segment(f: &Oracle, y1: &Point, y2: &Point) -> Result<Report> {
    if !y1.le(y2, TOL) {
        return Err(Error::InvalidArgument("segment endpoints are not ordered".into()));
    }
    let ext = Extension::new(f, &Estimator::exact())?;
    let r: Vec<f64> = (0..=100)
        .map(|i| {
            let x = i as f64 / 100.0;
            let p: Vec<f64> = y1
                .as_slice()
                .iter()
                .zip(y2.as_slice())
                .map(|(a, b)| (a + x * (b - a)).clamp(0.0, 1.0))
                .collect();
            ext.value_slice(&p, &[]).mean
        })
        .collect();
    let mut concave = Check::new("segment_concave");
    for w in r.windows(3) {
        concave.record(0.0, w[0] - 2.0 * w[1] + w[2], TOL);
    }
    let mut floor = Check::new("segment_above_endpoints");
    let low = r[0].min(r[100]);
    for &v in &r {
        floor.record(v, low, TOL);
    }
    let mut nonneg = Check::new("segment_non_negative");
    for &v in &r {
        nonneg.record(v, 0.0, TOL);
    }
    let mut report = Report::new("concave_segment");
    report.push(concave);
    report.push(floor);
    report.push(nonneg);
    Ok(report)
}
