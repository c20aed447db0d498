//! Numerical laboratory for the fractional Gelfand problem
//! `(-Δ)^s u = λ f(u)` on `(-1, 1)` with zero exterior data.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: Gamma function, singular-solution coefficient, fractional
//!   Hardy constant and the critical thresholds built from them.
//! * [`operator1d`]: discretization of the fractional Laplacian on the
//!   interval, plus a quadrature point-evaluator for radial functions in `R^n`.
//! * [`gelfand`]: nonlinearities, monotone iteration, branch continuation and
//!   extremal-parameter bracketing.
//! * [`stability`]: smallest eigenpair of the linearized operator.
//! * [`identities`]: Pohozaev and weak-form residuals, `L^p` estimate checks.
//! * [`cli`]: the command-line front end.

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod gelfand;
pub mod identities;
pub mod operator1d;
pub mod quadrature;
pub mod specfun;
pub mod stability;

pub use error::{Error, Result};
pub use gelfand::{Branch, BranchPoint, Nonlinearity};
pub use operator1d::{FracOperator, GridFunction, RadialFunction};
