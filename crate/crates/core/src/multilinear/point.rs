use std::ops::Index;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::subset::Subset;

const CLAMP_TOL: f64 = 1e-12;

/// A fractional vector in `[0,1]^N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Coordinates within `1e-12` of `[0,1]` are clamped; anything further
    /// out (or NaN) is rejected.
    pub fn new(mut coords: Vec<f64>) -> Result<Self> {
        for c in coords.iter_mut() {
            if !(*c >= -CLAMP_TOL && *c <= 1.0 + CLAMP_TOL) {
                return Err(Error::InvalidArgument(format!("coordinate {c} outside [0,1]")));
            }
            *c = c.clamp(0.0, 1.0);
        }
        Ok(Point { coords })
    }

    pub fn zeros(n: usize) -> Self {
        Point { coords: vec![0.0; n] }
    }

    pub fn ones(n: usize) -> Self {
        Point { coords: vec![1.0; n] }
    }

    /// `1_S`.
    pub fn indicator(s: &Subset) -> Self {
        Point { coords: s.indicator() }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    pub fn set(&mut self, u: usize, v: f64) {
        assert!((0.0..=1.0).contains(&v), "coordinate {v} outside [0,1]");
        self.coords[u] = v;
    }

    /// `|x| = Σ_u x_u`.
    pub fn norm1(&self) -> f64 {
        self.coords.iter().sum()
    }

    /// Coordinate-wise maximum `x ∨ y`.
    pub fn join(&self, other: &Point) -> Point {
        self.zip(other, f64::max)
    }

    /// Coordinate-wise minimum `x ∧ y`.
    pub fn meet(&self, other: &Point) -> Point {
        self.zip(other, f64::min)
    }

    pub fn add(&self, other: &Point) -> Result<Point> {
        Point::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Result<Point> {
        Point::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> Result<Point> {
        Point::new(self.coords.iter().map(|a| a * c).collect())
    }

    /// `1_N - x`.
    pub fn complement(&self) -> Point {
        Point {
            coords: self.coords.iter().map(|a| 1.0 - a).collect(),
        }
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.coords.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    /// `x <= y` coordinate-wise, within `tol`.
    pub fn le(&self, other: &Point, tol: f64) -> bool {
        self.coords.iter().zip(&other.coords).all(|(a, b)| *a <= b + tol)
    }

    fn zip(&self, other: &Point, op: impl Fn(f64, f64) -> f64) -> Point {
        assert_eq!(self.len(), other.len());
        Point {
            coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| op(a, b)).collect(),
        }
    }

    /// `Some(S)` when `x = 1_S`.
    pub fn as_set(&self) -> Option<Subset> {
        if self.coords.iter().all(|&c| c == 0.0 || c == 1.0) {
            Some(self.support())
        } else {
            None
        }
    }

    /// Elements with a positive coordinate.
    pub fn support(&self) -> Subset {
        Subset::from_indices(self.len(), (0..self.len()).filter(|&u| self.coords[u] > 0.0))
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, u: usize) -> &f64 {
        &self.coords[u]
    }
}
