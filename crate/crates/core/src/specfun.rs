//! Gamma function and the closed-form quantities built on it: the coefficient
//! `λ0` of the singular solution `log(1/|x|^{2s})`, the fractional Hardy
//! constant `H_{n,s}`, and the dimension/order thresholds where they cross.

// Coefficients are kept at their published precision.
#![allow(clippy::excessive_precision)]

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gelfand::Nonlinearity;
use crate::quadrature;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_78;

/// Largest argument with a finite `Γ(x)` in f64.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaValue {
    pub x: f64,
    pub value: f64,
    pub log_value: f64,
}

fn lanczos_sum(z: f64) -> f64 {
    LANCZOS_COEFFS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS_COEFFS[0], |acc, (i, c)| acc + c / (z + (i + 1) as f64))
}

fn check_arg(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::NonPositiveArgument(x));
    }
    Ok(())
}

/// `ln Γ(x)` for `x > 0`. Finite for every positive finite argument.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_arg(x)?;
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(HALF_LN_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// `Γ(x)` for `x > 0` (Lanczos, g = 7, nine coefficients).
pub fn gamma(x: f64) -> Result<f64> {
    check_arg(x)?;
    if x > GAMMA_MAX_ARG {
        return Err(Error::Overflow(x));
    }
    if x < 0.5 {
        return Ok(gamma(x + 1.0)? / x);
    }
    if x == x.floor() && x <= 21.0 {
        return Ok((1..x as u64).map(|k| k as f64).product());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // t^(z+1/2) split in two halves so the intermediate stays finite up to GAMMA_MAX_ARG.
    let half_pow = t.powf(0.5 * (z + 0.5));
    let value = (2.0 * std::f64::consts::PI).sqrt() * half_pow * (half_pow * (-t).exp()) * lanczos_sum(z);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow(x))
    }
}

pub fn gamma_value(x: f64) -> Result<GammaValue> {
    Ok(GammaValue {
        x,
        value: gamma(x)?,
        log_value: ln_gamma(x)?,
    })
}

fn check_dimension(n: f64, s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 2.0) {
        return Err(Error::InvalidS(s));
    }
    if !(n > 2.0 * s) {
        return Err(Error::DimensionTooSmall { n, two_s: 2.0 * s });
    }
    Ok(())
}

/// `λ0` for a real dimension; used by the continuous-`n` root search.
pub fn lambda0_real(n: f64, s: f64) -> Result<f64> {
    check_dimension(n, s)?;
    let ln =
        2.0 * s * std::f64::consts::LN_2 + ln_gamma(0.5 * n)? + ln_gamma(1.0 + s)? - ln_gamma(0.5 * (n - 2.0 * s))?;
    Ok(ln.exp())
}

/// `H_{n,s}` for a real dimension.
pub fn hardy_constant_real(n: f64, s: f64) -> Result<f64> {
    check_dimension(n, s)?;
    let ln =
        2.0 * s * std::f64::consts::LN_2 + 2.0 * (ln_gamma(0.25 * (n + 2.0 * s))? - ln_gamma(0.25 * (n - 2.0 * s))?);
    Ok(ln.exp())
}

/// Coefficient `λ0 = 2^{2s} Γ(n/2) Γ(1+s) / Γ((n-2s)/2)` for which
/// `log(1/|x|^{2s})` solves `(-Δ)^s u = λ0 e^u` in `R^n`.
pub fn lambda0(n: u32, s: f64) -> Result<f64> {
    lambda0_real(n as f64, s)
}

/// Fractional Hardy constant `H_{n,s} = 2^{2s} Γ²((n+2s)/4) / Γ²((n-2s)/4)`.
pub fn hardy_constant(n: u32, s: f64) -> Result<f64> {
    hardy_constant_real(n as f64, s)
}

/// Stability margin `H_{n,s} - λ0`; nonnegative exactly when the singular
/// solution is semistable.
pub fn margin_real(n: f64, s: f64) -> Result<f64> {
    Ok(hardy_constant_real(n, s)? - lambda0_real(n, s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionReport {
    pub n: u32,
    pub s: f64,
    pub lambda0: f64,
    pub hardy: f64,
    pub semistable: bool,
    pub margin: f64,
}

pub fn semistable_singular(n: u32, s: f64) -> Result<CriterionReport> {
    let lambda0 = lambda0(n, s)?;
    let hardy = hardy_constant(n, s)?;
    Ok(CriterionReport {
        n,
        s,
        lambda0,
        hardy,
        semistable: lambda0 <= hardy,
        margin: hardy - lambda0,
    })
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First sign change of `f` on a uniform scan of `[lo, hi]`.
fn scan_sign_change<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, samples: usize) -> Option<(f64, f64)> {
    let mut prev_x = lo;
    let mut prev = f(lo);
    for k in 1..=samples {
        let x = lo + (hi - lo) * k as f64 / samples as f64;
        let v = f(x);
        if (v > 0.0) != (prev > 0.0) {
            return Some((prev_x, x));
        }
        prev_x = x;
        prev = v;
    }
    None
}

/// Order `s*` in `(0, min(1, n/2))` where the singular solution changes from
/// semistable to unstable, or `None` when the verdict is the same for every `s`.
pub fn critical_s(n: u32) -> Option<f64> {
    if n == 0 {
        return None;
    }
    let s_max = (0.5 * n as f64).min(1.0);
    let lo = 1e-4;
    let hi = s_max - 1e-9;
    let margin = |s: f64| margin_real(n as f64, s).unwrap_or(f64::NAN);
    let (a, b) = scan_sign_change(&margin, lo, hi, 400)?;
    Some(bisect(margin, a, b, 1e-9))
}

/// Real dimension `n*(s)` in `(2s, 64)` at which `λ0 = H_{n,s}`.
pub fn critical_dimension(s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 2.0) {
        return Err(Error::InvalidS(s));
    }
    let lo = 2.0 * s + 1e-6;
    let hi = 64.0;
    let margin = |n: f64| margin_real(n, s).unwrap_or(f64::NAN);
    let (a, b) = scan_sign_change(&margin, lo, hi, 2000).ok_or(Error::NoRootInBracket { lo, hi })?;
    Ok(bisect(margin, a, b, 1e-9))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Checks `(f̃(a)^γ - f̃(b)^γ)² ≤ γ² (g(a) - g(b)) (a - b)` with
/// `f̃ = f - f(0)` and `g(t) = ∫_0^t f̃^{2γ-2} f'²`, the difference of `g`
/// computed by composite Gauss-Kronrod over `quad_steps` panels.
/// The comparison allows ten times the quadrature error estimate.
pub fn lemma_po_check(f: &Nonlinearity, gamma_exp: f64, a: f64, b: f64, quad_steps: usize) -> Result<PoCheck> {
    if a < 0.0 || b < 0.0 {
        return Err(Error::NegativeInput(format!("a = {a}, b = {b}")));
    }
    if !(gamma_exp > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive, got {gamma_exp}"
        )));
    }
    let f0 = f.value(0.0);
    let shifted = |t: f64| (f.value(t) - f0).max(0.0);
    let lhs = (shifted(a).powf(gamma_exp) - shifted(b).powf(gamma_exp)).powi(2);
    if a == b {
        return Ok(PoCheck {
            lhs,
            rhs: 0.0,
            slack: 0.0,
            holds: lhs <= 0.0,
        });
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let integrand = |t: f64| shifted(t).powf(2.0 * gamma_exp - 2.0) * f.derivative(t).powi(2);
    let g_diff = quadrature::composite(integrand, lo, hi, quad_steps);
    let scale = gamma_exp * gamma_exp * (hi - lo);
    let rhs = scale * g_diff.value;
    let slack = 10.0 * scale * g_diff.error;
    Ok(PoCheck {
        lhs,
        rhs,
        slack,
        holds: lhs <= rhs + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Γ(x) = Γ(x + k) / ∏_{j<k} (x + j) with Γ(x + k) from Stirling's series.
    fn gamma_recursion_oracle(x: f64, k: usize) -> f64 {
        let y = x + k as f64;
        let inv = 1.0 / y;
        let inv2 = inv * inv;
        let series = inv
            * (1.0 / 12.0
                - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))));
        let ln_gamma_y = (y - 0.5) * y.ln() - y + HALF_LN_2PI + series;
        let ln_prod: f64 = (0..k).map(|j| (x + j as f64).ln()).sum();
        (ln_gamma_y - ln_prod).exp()
    }

    #[test]
    fn classical_values() {
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert!((gamma(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma(2.0).unwrap() - 1.0).abs() < 1e-14);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gamma(0.5).unwrap() / sqrt_pi - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_recursion_oracle() {
        let oracle = gamma_recursion_oracle(4.7, 50);
        assert!((gamma(4.7).unwrap() / oracle - 1.0).abs() < 1e-11);
        for &x in &[1e-3, 0.01, 0.3, 1.7, 9.25, 33.3, 99.9, 150.5, 170.0] {
            let oracle = gamma_recursion_oracle(x, 50);
            let rel = (gamma(x).unwrap() / oracle - 1.0).abs();
            assert!(rel < 1e-12, "x = {x}: rel {rel:e}");
        }
    }

    #[test]
    fn gamma_errors() {
        assert_eq!(gamma(0.0), Err(Error::NonPositiveArgument(0.0)));
        assert!(matches!(gamma(-1.5), Err(Error::NonPositiveArgument(_))));
        assert!(matches!(gamma(172.0), Err(Error::Overflow(_))));
        assert!(ln_gamma(500.0).unwrap().is_finite());
    }

    #[test]
    fn gamma_value_is_consistent() {
        let g = gamma_value(7.3).unwrap();
        assert!((g.value.ln() - g.log_value).abs() < 1e-13);
    }

    #[test]
    fn lambda0_and_hardy_hand_values() {
        assert!((lambda0(10, 1.0).unwrap() - 16.0).abs() < 1e-12);
        assert!((hardy_constant(10, 1.0).unwrap() - 16.0).abs() < 1e-12);
        let expected = 2f64.sqrt() * gamma(0.5).unwrap() * gamma(1.25).unwrap() / gamma(0.25).unwrap();
        assert!((lambda0(1, 0.25).unwrap() / expected - 1.0).abs() < 1e-13);
        assert!(matches!(lambda0(1, 0.5), Err(Error::DimensionTooSmall { .. })));
        assert!(matches!(hardy_constant(4, 2.0), Err(Error::DimensionTooSmall { .. })));
    }

    #[test]
    fn n9_half_is_semistable() {
        // λ0 = 2Γ(9/2)Γ(3/2)/Γ(4), H = 2Γ(5/2)².
        let r = semistable_singular(9, 0.5).unwrap();
        let pi = std::f64::consts::PI;
        let g45 = 105.0 / 16.0 * pi.sqrt();
        let g15 = 0.5 * pi.sqrt();
        let g25 = 0.75 * pi.sqrt();
        assert!((r.lambda0 - 2.0 * g45 * g15 / 6.0).abs() < 1e-12);
        assert!((r.hardy - 2.0 * g25 * g25).abs() < 1e-12);
        assert!(r.hardy > r.lambda0);
        assert!(r.semistable);
    }

    #[test]
    fn verdict_table() {
        for &s in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            assert!(!semistable_singular(7, s).unwrap().semistable, "n=7 s={s}");
            assert!(semistable_singular(10, s).unwrap().semistable, "n=10 s={s}");
        }
        assert!(semistable_singular(10, 0.5).unwrap().semistable);
        // Below the n = 8 threshold the singular solution is semistable.
        assert!(semistable_singular(8, 0.2).unwrap().semistable);
        assert!(!semistable_singular(8, 0.4).unwrap().semistable);
    }

    #[test]
    fn critical_orders() {
        assert!((critical_s(8).unwrap() - 0.28206).abs() < 1e-4);
        assert!((critical_s(9).unwrap() - 0.63237).abs() < 1e-4);
        assert_eq!(critical_s(7), None);
        assert_eq!(critical_s(10), None);
        assert_eq!(critical_s(1), None);
    }

    #[test]
    fn critical_dimensions() {
        assert!((critical_dimension(1.0).unwrap() - 10.0).abs() < 1e-3);
        assert!((critical_dimension(2.0).unwrap() - 12.5653).abs() < 1e-3);
        let half = critical_dimension(0.5).unwrap();
        assert!(half > 8.0 && half < 9.0, "{half}");
        let back = critical_dimension(critical_s(8).unwrap()).unwrap();
        assert!((back - 8.0).abs() < 1e-2);
        assert!(matches!(critical_dimension(0.0), Err(Error::InvalidS(_))));
    }

    #[test]
    fn lemma_po_degenerate_and_exponential() {
        let exp = Nonlinearity::exponential();
        let c = lemma_po_check(&exp, 1.0, 3.0, 3.0, 8).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        assert!(c.holds);

        // γ = 1 with f = e^t recovers (e^b - e^a)² ≤ ½(e^{2b} - e^{2a})(b - a).
        let c = lemma_po_check(&exp, 1.0, 0.0, 1.0, 16).unwrap();
        let e = std::f64::consts::E;
        assert!((c.lhs - (e - 1.0).powi(2)).abs() < 1e-14);
        assert!((c.rhs - 0.5 * (e * e - 1.0)).abs() < 1e-12);
        assert!(c.holds);
        assert!(matches!(
            lemma_po_check(&exp, 1.0, -1.0, 1.0, 4),
            Err(Error::NegativeInput(_))
        ));
    }
}
