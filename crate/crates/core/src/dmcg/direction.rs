//! The per-step direction of the double continuous greedy:
//!
//! ```text
//! max  min{ w¹·I + c·F¹, w²·(1_N - I) + c·F² }   over I ∈ [0,1]^N, |I| = k
//! ```
//!
//! By minimax duality this equals `min_λ g(λ)` where `g(λ)` maximizes
//! `λ A(I) + (1-λ) B(I)`, attained by the top-`k` scores
//! `λ w¹_u - (1-λ) w²_u`. `A - B` at the maximizer is a subgradient of the
//! convex `g`, so bisection on its sign finds `λ*`; the two vertices
//! bracketing `λ*` are then mixed so that `A = B`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::multilinear::Point;

const LAMBDA_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Direction {
    pub i1: Point,
    pub i2: Point,
    pub lambda: f64,
    /// `min(w¹·I¹ + coeff·c¹, w²·I² + coeff·c²)`.
    pub objective: f64,
}

struct Side<'a> {
    w1: &'a [f64],
    w2: &'a [f64],
    a0: f64,
    b0: f64,
    k: usize,
}

impl Side<'_> {
    /// Top-`k` vertex for `λ`, ties to the lowest index.
    fn vertex(&self, lambda: f64) -> Vec<f64> {
        let n = self.w1.len();
        let score: Vec<f64> = (0..n)
            .map(|u| lambda * self.w1[u] - (1.0 - lambda) * self.w2[u])
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&u, &v| score[v].partial_cmp(&score[u]).unwrap().then(u.cmp(&v)));
        let mut x = vec![0.0; n];
        for &u in &order[..self.k] {
            x[u] = 1.0;
        }
        x
    }

    fn a(&self, x: &[f64]) -> f64 {
        self.a0 + x.iter().zip(self.w1).map(|(x, w)| x * w).sum::<f64>()
    }

    fn b(&self, x: &[f64]) -> f64 {
        self.b0 + x.iter().zip(self.w2).map(|(x, w)| (1.0 - x) * w).sum::<f64>()
    }
}

/// Solves the direction problem exactly.
pub fn solve_direction(w1: &[f64], w2: &[f64], c1: f64, c2: f64, k: usize, coeff: f64) -> Result<Direction> {
    let n = w1.len();
    if w2.len() != n {
        return Err(Error::InvalidArgument("weight vectors differ in length".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    let side = Side {
        w1,
        w2,
        a0: coeff * c1,
        b0: coeff * c2,
        k,
    };
    let finish = |x: Vec<f64>, lambda: f64| -> Result<Direction> {
        let objective = side.a(&x).min(side.b(&x));
        let i2: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
        Ok(Direction {
            i1: Point::new(x)?,
            i2: Point::new(i2)?,
            lambda,
            objective,
        })
    };
    let gap = |x: &[f64]| side.a(x) - side.b(x);

    let x0 = side.vertex(0.0);
    if gap(&x0) >= 0.0 {
        return finish(x0, 0.0);
    }
    let x1 = side.vertex(1.0);
    if gap(&x1) <= 0.0 {
        return finish(x1, 1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut x_lo, mut x_hi) = (x0, x1);
    while hi - lo > LAMBDA_GAP {
        let mid = 0.5 * (lo + hi);
        let x = side.vertex(mid);
        let d = gap(&x);
        if d == 0.0 {
            return finish(x, mid);
        }
        if d < 0.0 {
            lo = mid;
            x_lo = x;
        } else {
            hi = mid;
            x_hi = x;
        }
    }
    let (d_lo, d_hi) = (gap(&x_lo), gap(&x_hi));
    let theta = d_hi / (d_hi - d_lo);
    let mixed: Vec<f64> = x_lo
        .iter()
        .zip(&x_hi)
        .map(|(a, b)| (theta * a + (1.0 - theta) * b).clamp(0.0, 1.0))
        .collect();
    finish(mixed, 0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    /// Independent oracle: every pair of `k`-subset vertices, at both
    /// endpoints and at the mix where the two objectives cross.
    pub(crate) fn exhaustive(w1: &[f64], w2: &[f64], c1: f64, c2: f64, k: usize, coeff: f64) -> f64 {
        let n = w1.len();
        let verts: Vec<Vec<f64>> = (0..1u32 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (0..n).map(|u| ((m >> u) & 1) as f64).collect())
            .collect();
        let a = |x: &[f64]| coeff * c1 + x.iter().zip(w1).map(|(x, w)| x * w).sum::<f64>();
        let b = |x: &[f64]| coeff * c2 + x.iter().zip(w2).map(|(x, w)| (1.0 - x) * w).sum::<f64>();
        let mut best = f64::NEG_INFINITY;
        for p in &verts {
            best = best.max(a(p).min(b(p)));
            for q in &verts {
                let (dp, dq) = (a(p) - b(p), a(q) - b(q));
                if dp * dq < 0.0 {
                    let th = dq / (dq - dp);
                    let x: Vec<f64> = p.iter().zip(q).map(|(p, q)| th * p + (1.0 - th) * q).collect();
                    best = best.max(a(&x).min(b(&x)));
                }
            }
        }
        best
    }

    #[test]
    fn zero_weights() {
        let d = solve_direction(&[0.0; 3], &[0.0; 3], 0.4, 0.7, 1, 2.0).unwrap();
        assert_eq!(d.objective, 0.8);
        assert_eq!(d.i1.norm1(), 1.0);
    }

    #[test]
    fn small_examples() {
        let d = solve_direction(&[1.0, 0.0], &[0.0, 1.0], 0.0, 0.0, 1, 2.0).unwrap();
        assert_eq!(d.i1.as_slice(), &[1.0, 0.0]);
        assert_eq!(d.i2.as_slice(), &[0.0, 1.0]);
        assert_eq!(d.objective, 1.0);

        let d = solve_direction(&[2.0, 0.0, 0.0], &[0.0, 1.0, 1.0], 0.0, 0.0, 1, 2.0).unwrap();
        assert!((d.objective - 2.0).abs() < 1e-12);
        assert!((d.i1[0] - 1.0).abs() < 1e-9);
        assert_eq!(exhaustive(&[2.0, 0.0, 0.0], &[0.0, 1.0, 1.0], 0.0, 0.0, 1, 2.0), 2.0);
    }

    #[test]
    fn rejects_k_above_n() {
        assert!(solve_direction(&[0.0; 2], &[0.0; 2], 0.0, 0.0, 3, 1.0).is_err());
    }

    #[test]
    fn needs_a_fractional_mix() {
        // A alone favours element 0, B favours element 0 too: the balance
        // point is fractional.
        let (w1, w2) = ([1.0, 0.0], [1.0, 0.0]);
        let d = solve_direction(&w1, &w2, 0.0, 0.0, 1, 1.0).unwrap();
        assert!((d.objective - 0.5).abs() < 1e-9);
        assert!((d.i1[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn matches_exhaustive_oracle() {
        let mut r = rng::stream(5, &[]);
        for _ in 0..300 {
            let n = r.random_range(1..=6);
            let k = r.random_range(0..=n);
            let w1: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let w2: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let (c1, c2) = (r.random_range(0.0..1.0), r.random_range(0.0..1.0));
            let d = solve_direction(&w1, &w2, c1, c2, k, 2.0).unwrap();
            assert!((d.i1.norm1() - k as f64).abs() < 1e-9);
            let want = exhaustive(&w1, &w2, c1, c2, k, 2.0);
            assert!((d.objective - want).abs() < 1e-9, "{} vs {want}", d.objective);
        }
    }
}
