//! Pipage rounding over cardinality and partition-matroid polytopes.
//!
//! Within each constraint group the two lowest-indexed fractional
//! coordinates `u < v` are moved along `e_u - e_v` until one of them
//! becomes integral. `F` restricted to that line is a convex quadratic
//! for submodular `f`, so the better of the two endpoints is no worse than
//! the start. The curvature is measured at every move.

use crate::error::{Error, Result};
use crate::multilinear::{Estimator, Extension, Mode, Point};
use crate::polytope::Polytope;
use crate::rng;
use crate::setfn::Oracle;
use crate::subset::Subset;

const INTEGRAL_TOL: f64 = 1e-12;
const CURVATURE_TOL: f64 = 1e-9;
const GROUP_SUM_TOL: f64 = 1e-6;

fn is_fractional(v: f64) -> bool {
    v > INTEGRAL_TOL && v < 1.0 - INTEGRAL_TOL
}

fn snap(v: f64) -> f64 {
    if v <= INTEGRAL_TOL {
        0.0
    } else if v >= 1.0 - INTEGRAL_TOL {
        1.0
    } else {
        v
    }
}

/// Rounds `x ∈ P` to a set `S` with `1_S ∈ P` and, in exact mode,
/// `f(S) >= F(x)`.
pub fn pipage_round(f: &Oracle, x: &Point, p: &Polytope, est: &Estimator, seed: u64) -> Result<Subset> {
    let n = f.n();
    if x.len() != n || p.n() != n {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    if !p.contains(x.as_slice()) {
        return Err(Error::Infeasible);
    }
    let groups = p.groups()?;
    let est = match est.mode {
        Mode::Exact => *est,
        Mode::Sampled => Estimator {
            seed: rng::derive_seed(seed, &[0x919a6e]),
            ..*est
        },
    };
    let ext = Extension::new(f, &est)?;
    let exact = ext.is_exact();
    let mut y: Vec<f64> = x.as_slice().iter().map(|&v| snap(v)).collect();
    let mut moves = 0u64;

    for g in &groups {
        loop {
            let frac: Vec<usize> = g
                .elements
                .iter()
                .copied()
                .filter(|&u| is_fractional(y[u]))
                .take(2)
                .collect();
            match frac.as_slice() {
                [u, v] => {
                    let (u, v) = (*u, *v);
                    let up = (1.0 - y[u]).min(y[v]);
                    let down = y[u].min(1.0 - y[v]);
                    let mut plus = y.clone();
                    if up == 1.0 - y[u] {
                        plus[u] = 1.0;
                        plus[v] = snap(y[v] - up);
                    } else {
                        plus[u] = snap(y[u] + up);
                        plus[v] = 0.0;
                    }
                    let mut minus = y.clone();
                    if down == y[u] {
                        minus[u] = 0.0;
                        minus[v] = snap(y[v] + down);
                    } else {
                        minus[u] = snap(y[u] - down);
                        minus[v] = 1.0;
                    }
                    let (fp, fm) = ext.value_pair(&plus, &minus, &[moves]);
                    if exact {
                        let f0 = ext.value_slice(&y, &[]).mean;
                        let curvature = 2.0 * ((fp - f0) / up - (f0 - fm) / down) / (up + down);
                        if curvature < -CURVATURE_TOL {
                            return Err(Error::Numerical(format!(
                                "negative curvature {curvature:.3e} along e_{u} - e_{v}; is f submodular?"
                            )));
                        }
                    }
                    y = if fp >= fm { plus } else { minus };
                    moves += 1;
                }
                [u] => {
                    let u = *u;
                    let sum: f64 = g.elements.iter().map(|&w| y[w]).sum();
                    if (sum - sum.round()).abs() <= GROUP_SUM_TOL {
                        y[u] = y[u].round();
                    } else {
                        let mut hi = y.clone();
                        hi[u] = 1.0;
                        let mut lo = y.clone();
                        lo[u] = 0.0;
                        let (fh, fl) = ext.value_pair(&hi, &lo, &[moves]);
                        y = if fh >= fl && p.contains(&hi) { hi } else { lo };
                    }
                    moves += 1;
                }
                _ => break,
            }
        }
    }
    let s = Subset::from_indices(n, (0..n).filter(|&u| y[u] == 1.0));
    debug_assert!(p.contains(&s.indicator()));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multilinear::eval_exact;
    use crate::setfn::{FromFn, GraphCut};

    #[test]
    fn integral_input_is_unchanged() {
        let f = Oracle::new(GraphCut::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap());
        let x = Point::new(vec![1.0, 0.0, 1.0]).unwrap();
        let s = pipage_round(&f, &x, &Polytope::cardinality(3, 2).unwrap(), &Estimator::exact(), 0).unwrap();
        assert_eq!(s.to_vec(), vec![0, 2]);
    }

    #[test]
    fn single_edge_half_half() {
        let f = Oracle::new(GraphCut::new(2, vec![(0, 1, 1.0)]).unwrap());
        let x = Point::new(vec![0.5, 0.5]).unwrap();
        let s = pipage_round(&f, &x, &Polytope::cardinality(2, 1).unwrap(), &Estimator::exact(), 0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(f.eval(&s), 1.0);
    }

    #[test]
    fn triangle_two_thirds() {
        let f = Oracle::new(GraphCut::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap());
        let x = Point::new(vec![2.0 / 3.0; 3]).unwrap();
        let fx = eval_exact(&f, &x).unwrap();
        let s = pipage_round(&f, &x, &Polytope::cardinality(3, 2).unwrap(), &Estimator::exact(), 0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(f.eval(&s), 2.0);
        assert!(f.eval(&s) >= fx);
    }

    #[test]
    fn partition_and_free_elements() {
        let f = Oracle::new(
            GraphCut::new(5, vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 4, 0.5), (0, 4, 1.5)]).unwrap(),
        );
        let p = Polytope::partition(5, vec![vec![0, 1], vec![2, 3]], vec![1, 1]).unwrap();
        let x = Point::new(vec![0.3, 0.7, 0.5, 0.25, 0.4]).unwrap();
        let fx = eval_exact(&f, &x).unwrap();
        let s = pipage_round(&f, &x, &p, &Estimator::exact(), 0).unwrap();
        assert!(p.contains(&s.indicator()));
        assert!(f.eval(&s) >= fx - 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = Oracle::new(GraphCut::new(2, vec![(0, 1, 1.0)]).unwrap());
        let x = Point::new(vec![0.9, 0.9]).unwrap();
        assert!(matches!(
            pipage_round(&f, &x, &Polytope::cardinality(2, 1).unwrap(), &Estimator::exact(), 0),
            Err(Error::Infeasible)
        ));
        let ks = Polytope::knapsack(vec![1.0, 1.0], 2.0).unwrap();
        assert!(matches!(
            pipage_round(&f, &x, &ks, &Estimator::exact(), 0),
            Err(Error::UnsupportedPolytope(_))
        ));
    }

    #[test]
    fn flags_supermodular_input() {
        let sq = Oracle::new(FromFn::new(2, false, |s| (s.len() * s.len()) as f64));
        let x = Point::new(vec![0.5, 0.5]).unwrap();
        let r = pipage_round(&sq, &x, &Polytope::cardinality(2, 1).unwrap(), &Estimator::exact(), 0);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }

    #[test]
    fn sampled_mode_keeps_cardinality() {
        let f = Oracle::new(GraphCut::new(4, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap());
        let x = Point::new(vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        let s = pipage_round(
            &f,
            &x,
            &Polytope::cardinality(4, 2).unwrap(),
            &Estimator::sampled(2000, 1),
            9,
        )
        .unwrap();
        assert_eq!(s.len(), 2);
    }
}
