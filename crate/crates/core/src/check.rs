//! Pass/fail records shared by the property and lemma checks.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    PreconditionUnmet,
}

/// One checked inequality (or family of inequalities).
///
/// `margin` is the smallest observed `lhs - rhs` over all cases, where the
/// property asks for `lhs >= rhs` up to the stated tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub cases: usize,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::Pass,
            cases: 0,
            margin: f64::INFINITY,
            estimate: None,
            sigma: None,
            bound: None,
            note: String::new(),
        }
    }

    pub fn skipped(name: impl Into<String>, why: impl Into<String>) -> Self {
        let mut c = Check::new(name);
        c.status = Status::Skipped;
        c.note = why.into();
        c
    }

    /// Records one case of `lhs >= rhs - tol`.
    pub fn record(&mut self, lhs: f64, rhs: f64, tol: f64) -> bool {
        self.cases += 1;
        let m = lhs - rhs;
        if m < self.margin || self.margin.is_nan() {
            self.margin = m;
        }
        let ok = m >= -tol;
        if !ok && self.status == Status::Pass {
            self.status = Status::Fail;
        }
        ok
    }

    /// Records a statistical case: `estimate >= bound - 4 sigma`, with an
    /// exact tolerance floor for zero-variance estimates.
    pub fn record_stat(&mut self, est: &MeanEstimate, bound: f64, tol: f64) -> bool {
        let slack = 4.0 * est.std_err + tol;
        let ok = self.record(est.mean, bound, slack);
        let worst = self.estimate.is_none() || est.mean - bound <= self.margin;
        if worst {
            self.estimate = Some(est.mean);
            self.sigma = Some(est.std_err);
            self.bound = Some(bound);
        }
        ok
    }

    pub fn fail(&mut self, note: impl Into<String>) {
        self.status = Status::Fail;
        self.note = note.into();
    }

    pub fn passed(&self) -> bool {
        matches!(self.status, Status::Pass | Status::Skipped)
    }

    /// Folds the cases of `other` into `self`, keeping the worst margin.
    /// A skipped `other` contributes nothing.
    pub fn absorb(&mut self, other: Check) {
        if other.status == Status::Skipped {
            return;
        }
        if self.status == Status::Skipped {
            self.status = Status::Pass;
        }
        self.cases += other.cases;
        if other.margin < self.margin {
            self.margin = other.margin;
            self.estimate = other.estimate;
            self.sigma = other.sigma;
            self.bound = other.bound;
        }
        if !other.passed() && self.status == Status::Pass {
            self.status = other.status;
            self.note = other.note;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn exact(v: f64) -> Self {
        MeanEstimate {
            mean: v,
            std_err: 0.0,
            samples: 0,
        }
    }

    pub fn from_sums(sum: f64, sum_sq: f64, count: usize) -> Self {
        assert!(count > 0);
        let c = count as f64;
        let mean = sum / c;
        let var = if count > 1 {
            ((sum_sq - c * mean * mean) / (c - 1.0)).max(0.0)
        } else {
            0.0
        };
        MeanEstimate {
            mean,
            std_err: (var / c).sqrt(),
            samples: count,
        }
    }

    pub fn from_values(values: &[f64]) -> Self {
        let (s, q) = values.iter().fold((0.0, 0.0), |(s, q), v| (s + v, q + v * v));
        Self::from_sums(s, q, values.len())
    }

    pub fn scale(self, c: f64) -> Self {
        MeanEstimate {
            mean: self.mean * c,
            std_err: self.std_err * c.abs(),
            samples: self.samples,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_tracks_worst_margin() {
        let mut c = Check::new("x");
        assert!(c.record(1.0, 0.5, 1e-9));
        assert!(c.record(1.0, 1.0 + 1e-10, 1e-9));
        assert!(c.passed());
        assert!(!c.record(1.0, 2.0, 1e-9));
        assert_eq!(c.status, Status::Fail);
        assert_eq!(c.margin, -1.0);
        assert_eq!(c.cases, 3);
    }

    #[test]
    fn mean_estimate_of_constant_has_zero_error() {
        let e = MeanEstimate::from_values(&[2.0; 10]);
        assert_eq!(e.mean, 2.0);
        assert!(e.std_err < 1e-12);
        let e = MeanEstimate::from_values(&[0.0, 2.0]);
        assert_eq!(e.mean, 1.0);
        assert!((e.std_err - 1.0).abs() < 1e-12);
    }
}
