//! Residuals of identities satisfied by solutions (Pohozaev, weak form) and
//! refinement studies of the linear `L^p → L^r` estimates in one dimension.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gelfand::{self, Nonlinearity};
use crate::operator1d::{FracOperator, GridFunction};
use crate::specfun;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PohozaevReport {
    /// `s ‖u‖²_{H^s} - n E(u)` with `n = 1`.
    pub lhs: f64,
    /// `Γ(1+s)²/2 · (q_left² + q_right²)`; `x·ν = 1` at both endpoints.
    pub rhs: f64,
    pub residual: f64,
    pub relative: f64,
    pub q_left: f64,
    pub q_right: f64,
}

pub fn pohozaev_residual(op: &FracOperator, f: &Nonlinearity, u: &GridFunction, lambda: f64) -> Result<PohozaevReport> {
    let s = op.s();
    let hs = op.hs_form(u, u)?;
    let lhs = s * hs - gelfand::energy(op, f, u, lambda)?;
    let (q_left, q_right) = gelfand::solution_boundary_quotient(op, u)?;
    let rhs = 0.5 * specfun::gamma(1.0 + s)?.powi(2) * (q_left * q_left + q_right * q_right);
    let residual = (lhs - rhs).abs();
    Ok(PohozaevReport {
        lhs,
        rhs,
        residual,
        relative: residual / lhs.abs().max(rhs.abs()).max(1e-30),
        q_left,
        q_right,
    })
}

const WEAK_TEST_SEED: u64 = 0x5eed_f4ac;
const WEAK_TEST_MODES: usize = 6;

/// `max_ζ |∫ u (-Δ)^s ζ - λ ∫ f(u) ζ| / ‖ζ‖_{L²}` over `n_tests` smooth
/// random test functions (sine series vanishing at `±1`, fixed seed).
pub fn weak_solution_residual(
    op: &FracOperator,
    f: &Nonlinearity,
    u: &GridFunction,
    lambda: f64,
    n_tests: usize,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(WEAK_TEST_SEED);
    let fu = u.map(|t| f.value(t));
    let mut worst = 0.0_f64;
    for _ in 0..n_tests {
        let coeffs: Vec<f64> = (0..WEAK_TEST_MODES).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let zeta = GridFunction::from_fn(op.n_points(), |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| a * ((k + 1) as f64 * std::f64::consts::FRAC_PI_2 * (x + 1.0)).sin())
                .sum()
        })?;
        let norm = zeta.l2_norm();
        if norm == 0.0 {
            continue;
        }
        let a_zeta = op.apply(&zeta)?;
        let pairing = u.inner(&a_zeta)? - lambda * fu.inner(&zeta)?;
        worst = worst.max(pairing.abs() / norm);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpVerdict {
    Bounded,
    UnboundedTrend,
    Inconclusive,
}

/// Ratios `‖u‖_{L^r} / ‖g‖_{L^p}` along a refinement ladder for
/// `(-Δ)^s u = g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpEstimateReport {
    pub s: f64,
    pub n_list: Vec<usize>,
    pub p: f64,
    /// Target exponent; `f64::INFINITY` for the sup norm.
    pub r: f64,
    pub ratios: Vec<f64>,
    pub verdict: LpVerdict,
}

/// Growth of at least 1.5× from the coarsest to the finest grid reads as
/// blow-up; otherwise the ratios are bounded if they stay within a factor
/// of 2 or never rise above their coarsest value.
pub fn classify_ratios(ratios: &[f64]) -> LpVerdict {
    let (Some(&first), Some(&last)) = (ratios.first(), ratios.last()) else {
        return LpVerdict::Inconclusive;
    };
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    if last >= 1.5 * first {
        LpVerdict::UnboundedTrend
    } else if max <= 2.0 * min || max <= first {
        LpVerdict::Bounded
    } else {
        LpVerdict::Inconclusive
    }
}

/// Data for the refinement studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpData {
    /// Hat of width `4h` centred at 0 with unit integral: an approximate
    /// point mass that narrows with the grid.
    Bump,
    /// `g ≡ 1`.
    Constant,
}

pub fn source(data: LpData, n_points: usize) -> Result<GridFunction> {
    match data {
        LpData::Constant => GridFunction::from_fn(n_points, |_| 1.0),
        LpData::Bump => {
            let h = 2.0 / (n_points + 1) as f64;
            let hat = GridFunction::from_fn(n_points, |x| (1.0 - x.abs() / (2.0 * h)).max(0.0))?;
            let mass = hat.integral();
            Ok(hat.map(|v| v / mass))
        }
    }
}

fn check_ladder(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("empty grid ladder".into()));
    }
    if let Some(&bad) = n_list.iter().find(|&&n| n < 8) {
        return Err(Error::GridTooSmall { min: 8, got: bad });
    }
    Ok(())
}

fn refinement_ratios(s: f64, n_list: &[usize], data: LpData, p: f64, r: f64) -> Result<Vec<f64>> {
    n_list
        .iter()
        .map(|&n| {
            let op = FracOperator::assemble(s, n)?;
            let g = source(data, n)?;
            let u = op.solve_linear(&g)?;
            Ok(u.lp_norm(r) / g.lp_norm(p))
        })
        .collect()
}

/// `‖u‖_{L^r} ≤ C ‖g‖_{L^1}` for `r < 1/(1-2s)`, tested with narrowing bumps.
pub fn verify_l1_to_lr(s: f64, r: f64, n_list: &[usize]) -> Result<LpEstimateReport> {
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::InvalidRegime(format!(
            "s = {s}: L^1 -> L^r needs s < 1/2 (use the sup-norm check otherwise)"
        )));
    }
    if !(r >= 1.0) {
        return Err(Error::InvalidParameter(format!("r must be at least 1, got {r}")));
    }
    check_ladder(n_list)?;
    let ratios = refinement_ratios(s, n_list, LpData::Bump, 1.0, r)?;
    Ok(LpEstimateReport {
        s,
        n_list: n_list.to_vec(),
        p: 1.0,
        r,
        verdict: classify_ratios(&ratios),
        ratios,
    })
}

/// `‖u‖_{L^∞} ≤ C ‖g‖_{L^p}` in the regimes where it holds in one dimension:
/// `s > 1/2, p ≥ 1`; `s = 1/2, p > 1`; `s < 1/2, p > 1/(2s)`.
pub fn verify_linf_bound(s: f64, p: f64, n_list: &[usize], data: LpData) -> Result<LpEstimateReport> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidS(s));
    }
    let at_half = (s - 0.5).abs() < 1e-12;
    let admissible = if at_half {
        p > 1.0
    } else if s > 0.5 {
        p >= 1.0
    } else {
        p > 1.0 / (2.0 * s)
    };
    if !admissible {
        return Err(Error::InvalidRegime(format!(
            "no L^infinity bound from L^{p} at s = {s}"
        )));
    }
    check_ladder(n_list)?;
    let ratios = refinement_ratios(s, n_list, data, p, f64::INFINITY)?;
    Ok(LpEstimateReport {
        s,
        n_list: n_list.to_vec(),
        p,
        r: f64::INFINITY,
        verdict: classify_ratios(&ratios),
        ratios,
    })
}
