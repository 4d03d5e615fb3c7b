//! Maximization of symmetric and general non-negative submodular functions.
//!
//! * [`mcg`]: measured continuous greedy over a down-monotone polytope.
//! * [`dmcg`]: double measured continuous greedy for `|S| = k`.
//! * [`twosided`]: deterministic two-sided greedy, unconstrained.
//! * [`welfare`]: random assignment for welfare with identical utilities.
//!
//! Supporting pieces: value oracles ([`setfn`]), the multilinear extension
//! ([`multilinear`]), polytopes, pipage rounding and brute-force optima
//! ([`oracle`]) for checking every guarantee at small `n`.

pub mod check;
pub mod dmcg;
pub mod error;
pub mod fixtures;
pub mod instance;
pub mod mcg;
pub mod multilinear;
pub mod oracle;
pub mod par;
pub mod pipage;
pub mod polytope;
pub mod rng;
pub mod selfcheck;
pub mod setfn;
pub mod subset;
pub mod twosided;
pub mod welfare;

pub use check::{Check, MeanEstimate, Report, Status};
pub use error::{Error, Result};
pub use multilinear::{Estimator, Extension, Mode, Point};
pub use polytope::{Polytope, PolytopeSpec};
pub use setfn::{GroundSet, Oracle, SetFunction};
pub use subset::Subset;
