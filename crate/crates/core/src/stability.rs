//! Smallest eigenpair of `A - diag(V)` (the linearization at a branch point
//! when `V = λ f'(u)`) and the exponential stability-inequality chain.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gelfand::Nonlinearity;
use crate::operator1d::{FracOperator, GridFunction};

/// Matrices up to this size are diagonalized in full.
pub const DENSE_EIGEN_LIMIT: usize = 2048;

/// Absolute tolerance on `μ1` for semistability verdicts.
pub const TOL_EIG: f64 = 1e-8;

/// Smallest eigenvalue and its eigenvector, normalized in `L²(Ω)` with
/// nonnegative mean.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub mu1: f64,
    pub phi1: GridFunction,
    pub residual: f64,
}

fn shifted_matrix(op: &FracOperator, potential: Option<&GridFunction>) -> Result<DMatrix<f64>> {
    let mut m = op.matrix().clone();
    if let Some(v) = potential {
        if v.n_points() != op.n_points() {
            return Err(Error::DimensionMismatch {
                expected: op.n_points(),
                got: v.n_points(),
            });
        }
        for (i, &p) in v.values().iter().enumerate() {
            m[(i, i)] -= p;
        }
    }
    Ok(m)
}

pub fn smallest_eigenpair(op: &FracOperator, potential: Option<&GridFunction>) -> Result<EigenResult> {
    smallest_eigenpair_dense(&shifted_matrix(op, potential)?)
}

/// Smallest eigenpair of a raw symmetric matrix on the grid with
/// `matrix.nrows()` interior points.
pub fn smallest_eigenpair_dense(matrix: &DMatrix<f64>) -> Result<EigenResult> {
    let n = matrix.nrows();
    if n < 2 || matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n.max(2),
            got: matrix.ncols(),
        });
    }
    let (mu, v) = if n <= DENSE_EIGEN_LIMIT {
        dense_smallest(matrix)?
    } else {
        inverse_iteration(matrix)?
    };
    let h = 2.0 / (n + 1) as f64;
    let l2 = (h * v.norm_squared()).sqrt();
    let mut v = v / l2;
    if v.sum() < 0.0 {
        v = -v;
    }
    let residual = (h * (matrix * &v - &v * mu).norm_squared()).sqrt();
    Ok(EigenResult {
        mu1: mu,
        phi1: GridFunction::from_dvector(v)?,
        residual,
    })
}

fn dense_smallest(matrix: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let eig = SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::ConvergenceFailure("symmetric QR iteration".into()))?;
    let (idx, &mu) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::ConvergenceFailure("empty spectrum".into()))?;
    Ok((mu, eig.eigenvectors.column(idx).into_owned()))
}

/// Inverse iteration shifted below the Gershgorin lower bound, so the
/// dominant mode of the inverse is the smallest eigenvalue.
fn inverse_iteration(matrix: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = matrix.nrows();
    let lower = (0..n)
        .map(|i| {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| matrix[(i, j)].abs()).sum();
            matrix[(i, i)] - off
        })
        .fold(f64::INFINITY, f64::min);
    let shift = lower - 1e-3 * lower.abs().max(1.0);
    let mut shifted = matrix.clone();
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let chol = Cholesky::new(shifted).ok_or(Error::SingularMatrix)?;
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut mu = f64::NAN;
    for _ in 0..20_000 {
        let w = chol.solve(&v);
        let w = &w / w.norm();
        let next_mu = w.dot(&(matrix * &w));
        let res = (matrix * &w - &w * next_mu).norm();
        v = w;
        if res <= 1e-10 * next_mu.abs().max(1.0) && (next_mu - mu).abs() <= 1e-13 * next_mu.abs().max(1.0) {
            return Ok((next_mu, v));
        }
        mu = next_mu;
    }
    Err(Error::ConvergenceFailure("inverse iteration budget exhausted".into()))
}

/// `‖η‖²_{H^s} - ∫ V η²`.
pub fn rayleigh_quotient(op: &FracOperator, potential: Option<&GridFunction>, eta: &GridFunction) -> Result<f64> {
    if eta.values().iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroTestFunction);
    }
    let quad = op.hs_form(eta, eta)?;
    let pot = match potential {
        Some(v) => {
            let eta_sq = eta.map(|t| t * t);
            v.inner(&eta_sq)?
        }
        None => 0.0,
    };
    Ok(quad - pot)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpStabilityReport {
    pub alpha: f64,
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// With `η = e^{αu} - 1`, checks
/// `∫ λ e^u η² ≤ ‖η‖²_{H^s} ≤ (α/2) ∫ λ e^{(2α+1)u}` at a solution of the
/// exponential problem, each with slack `1e-6 · rhs`.
pub fn verify_exp_stability_inequality(
    op: &FracOperator,
    f: &Nonlinearity,
    u: &GridFunction,
    lambda: f64,
    alpha: f64,
) -> Result<ExpStabilityReport> {
    if !f.is_exponential() {
        return Err(Error::NotExponential(f.name().into()));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 2), got {alpha}"
        )));
    }
    let eta = u.map(|t| (alpha * t).exp_m1());
    let lhs = lambda * u.map(|t| t.exp() * (alpha * t).exp_m1().powi(2)).integral();
    let mid = op.hs_form(&eta, &eta)?;
    let rhs = 0.5 * alpha * lambda * u.map(|t| ((2.0 * alpha + 1.0) * t).exp()).integral();
    let tol = 1e-6 * rhs;
    Ok(ExpStabilityReport {
        alpha,
        lhs,
        mid,
        rhs,
        holds: lhs <= mid + tol && mid <= rhs + tol,
    })
}
