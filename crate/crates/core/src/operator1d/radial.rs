//! Pointwise `(-Δ)^s u(x)` for radial `u` in `R^n` by nested adaptive
//! quadrature, used as an oracle independent of the grid discretization.
//!
//! With `ρ = |z|` and `θ` the angle between `z` and `x` (`|x| = r`),
//!
//! ```text
//! (-Δ)^s u(x) = -c_{n,s} |S^{n-2}| ∫_0^∞ ρ^{-1-2s} ∫_0^{π/2} sin^{n-2}θ
//!               [u(R₊) + u(R₋) - 2u(r)] dθ dρ,   R± = sqrt(r² + ρ² ± 2rρ cos θ)
//! ```
//!
//! (for `n = 1` the angular integral is replaced by the single pair `r ± ρ`).
//! The bracket is `O(ρ²)`, so `[0, ρ_min]` is integrated from a two-term
//! even expansion fitted at `ρ_min` and `ρ_min / 2`.

use std::fmt;
use std::sync::Arc;

use super::normalizing_constant;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, AdaptiveOptions, Estimate};
use crate::specfun;

/// Behaviour of the profile at large radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Growth {
    /// `u(ρ) = 0` for `ρ ≥ radius`.
    CompactSupport { radius: f64 },
    /// `|u(ρ)| ≤ a + b log ρ` for `ρ ≥ 1`.
    Logarithmic { a: f64, b: f64 },
    /// `|u| ≤ bound` everywhere.
    Bounded { bound: f64 },
}

/// A radial profile `ρ ↦ u(ρ)` together with its tail behaviour and the
/// radii where it fails to be smooth.
#[derive(Clone)]
pub struct RadialFunction {
    profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    growth: Growth,
    singular_radii: Vec<f64>,
    label: String,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("label", &self.label)
            .field("growth", &self.growth)
            .field("singular_radii", &self.singular_radii)
            .finish()
    }
}

impl RadialFunction {
    pub fn new<F>(label: impl Into<String>, profile: F, growth: Growth, singular_radii: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            profile: Arc::new(profile),
            growth,
            singular_radii,
            label: label.into(),
        }
    }

    /// `(1 - ρ²)^a_+`.
    pub fn bump(a: f64) -> Self {
        Self::new(
            format!("(1-r^2)^{a}"),
            move |r: f64| if r < 1.0 { (1.0 - r * r).powf(a) } else { 0.0 },
            Growth::CompactSupport { radius: 1.0 },
            vec![1.0],
        )
    }

    /// `log(1/ρ^{2s})`, the singular solution of the exponential problem.
    pub fn log_singular(s: f64) -> Self {
        Self::new(
            format!("log(1/r^{})", 2.0 * s),
            move |r: f64| -2.0 * s * r.ln(),
            Growth::Logarithmic { a: 0.0, b: 2.0 * s },
            vec![0.0],
        )
    }

    pub fn constant(c: f64) -> Self {
        Self::new(
            format!("{c}"),
            move |_| c,
            Growth::Bounded { bound: c.abs() },
            Vec::new(),
        )
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.profile)(r)
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialEvaluation {
    pub value: f64,
    pub error: f64,
}

fn sphere_area(dim_minus_one: u32) -> f64 {
    // |S^k| = 2 π^{(k+1)/2} / Γ((k+1)/2)
    let a = 0.5 * (dim_minus_one as f64 + 1.0);
    2.0 * std::f64::consts::PI.powf(a) / specfun::gamma(a).expect("positive argument")
}

struct Integrand<'a> {
    u: &'a RadialFunction,
    n: u32,
    r: f64,
    u_r: f64,
    sphere: f64,
    inner_tol: f64,
}

impl Integrand<'_> {
    /// Symmetrized second difference averaged over directions (times the
    /// angular measure).
    fn bracket(&self, rho: f64) -> f64 {
        let (r, u_r) = (self.r, self.u_r);
        if self.n == 1 {
            return self.u.value((r + rho).abs()) + self.u.value((r - rho).abs()) - 2.0 * u_r;
        }
        if r == 0.0 {
            let half_sphere = 0.5 * sphere_area(self.n - 1);
            return half_sphere * 2.0 * (self.u.value(rho) - u_r);
        }
        let power = (self.n - 2) as i32;
        let f = |theta: f64| {
            let c = theta.cos();
            let base = r * r + rho * rho;
            let plus = (base + 2.0 * r * rho * c).max(0.0).sqrt();
            let minus = (base - 2.0 * r * rho * c).max(0.0).sqrt();
            theta.sin().powi(power) * (self.u.value(plus) + self.u.value(minus) - 2.0 * u_r)
        };
        let mut cuts = Vec::new();
        for &sigma in &self.u.singular_radii {
            for cos_t in [
                (sigma * sigma - r * r - rho * rho) / (2.0 * r * rho),
                (r * r + rho * rho - sigma * sigma) / (2.0 * r * rho),
            ] {
                if cos_t > 0.0 && cos_t < 1.0 {
                    cuts.push(cos_t.acos());
                }
            }
        }
        let est = adaptive(
            f,
            0.0,
            std::f64::consts::FRAC_PI_2,
            &cuts,
            AdaptiveOptions {
                abs_tol: self.inner_tol * rho.min(1.0).powi(2),
                rel_tol: 1e-12,
                max_panels: 400,
            },
        );
        self.sphere * est.value
    }
}

/// `(-Δ)^s u` at radius `r` in `R^n`, with absolute error estimate ≤ `tol`.
pub fn radial_evaluate(n: u32, s: f64, u: &RadialFunction, r: f64, tol: f64) -> Result<RadialEvaluation> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let c = normalizing_constant(n, s)?;
    let local_scale = u
        .singular_radii
        .iter()
        .map(|&sigma| (r - sigma).abs())
        .fold(f64::INFINITY, f64::min)
        .min(r.max(1.0));
    if local_scale < 1e-12 {
        return Err(Error::SingularPoint(r));
    }
    let local_scale = if local_scale.is_finite() { local_scale } else { 1.0 };
    let sphere = if n >= 2 { sphere_area(n - 2) } else { 1.0 };

    // The integral is scaled by c at the end; budget the raw tolerance accordingly.
    let raw_tol = tol / c;
    let integrand = Integrand {
        u,
        n,
        r,
        u_r: u.value(r),
        sphere,
        inner_tol: 1e-3 * raw_tol,
    };
    let p = 2.0 * s;

    // [0, ρ_min]: bracket(ρ) ≈ a ρ² + b ρ⁴.
    let rho_min = 1e-2 * local_scale;
    let q1 = integrand.bracket(rho_min) / (rho_min * rho_min);
    let q2 = integrand.bracket(0.5 * rho_min) / (0.25 * rho_min * rho_min);
    let b = (q1 - q2) / (0.75 * rho_min * rho_min);
    let a = q1 - b * rho_min * rho_min;
    let quartic = b * rho_min.powf(4.0 - p) / (4.0 - p);
    let mut total = Estimate {
        value: a * rho_min.powf(2.0 - p) / (2.0 - p) + quartic,
        error: 1e-2 * quartic.abs(),
    };

    let mut cuts: Vec<f64> = Vec::new();
    for &sigma in &u.singular_radii {
        cuts.push((r - sigma).abs());
        cuts.push(r + sigma);
    }
    if let Growth::CompactSupport { radius } = u.growth {
        cuts.push(r + radius);
    }
    cuts.push(r);
    cuts.retain(|&x| x > rho_min);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * x.abs().max(1.0));

    let outer = |rho: f64| integrand.bracket(rho) * rho.powf(-1.0 - p);
    let opts = AdaptiveOptions {
        abs_tol: 0.25 * raw_tol,
        rel_tol: 1e-14,
        max_panels: 4000,
    };

    match u.growth {
        Growth::CompactSupport { radius } => {
            let end = r + radius;
            let est = adaptive(outer, rho_min, end, &cuts, opts);
            // Beyond r + radius both shifted points leave the support.
            let half_sphere = if n == 1 { 1.0 } else { 0.5 * sphere_area(n - 1) };
            let tail = 2.0 * integrand.u_r * half_sphere * end.powf(-p) / p;
            total.value += est.value - tail;
            total.error += est.error;
        }
        Growth::Bounded { bound } | Growth::Logarithmic { a: bound, b: 0.0 } => {
            let end = cuts.last().copied().unwrap_or(1.0).max(1.0) * 2.0;
            let est = adaptive(outer, rho_min, end, &cuts, opts);
            let half_sphere = if n == 1 { 1.0 } else { 0.5 * sphere_area(n - 1) };
            let (tail_end, tail_err) = log_tail(outer, end, 4.0 * bound * half_sphere, 0.0, p, 0.1 * raw_tol, opts);
            total.value += est.value + tail_end.value;
            total.error += est.error + tail_end.error + tail_err;
        }
        Growth::Logarithmic { a: coef_a, b: coef_b } => {
            let end = (cuts.last().copied().unwrap_or(1.0).max(1.0) + r) * 2.0;
            let est = adaptive(outer, rho_min, end, &cuts, opts);
            let half_sphere = if n == 1 { 1.0 } else { 0.5 * sphere_area(n - 1) };
            // |bracket| ≤ half_sphere (2(a + b log(ρ + r)) + 2|u(r)|) ≤ A' + B' log ρ for ρ ≥ r.
            let a_bound = half_sphere * 2.0 * (coef_a + coef_b * std::f64::consts::LN_2 + integrand.u_r.abs());
            let b_bound = half_sphere * 2.0 * coef_b;
            let (tail, tail_err) = log_tail(outer, end, a_bound, b_bound, p, 0.1 * raw_tol, opts);
            total.value += est.value + tail.value;
            total.error += est.error + tail.error + tail_err;
        }
    }

    let value = -c * total.value;
    let error = c * total.error;
    if !(error <= tol) {
        return Err(Error::ToleranceNotMet { estimate: error, tol });
    }
    Ok(RadialEvaluation { value, error })
}

/// Integrates `f` from `start` to a truncation radius chosen so that the
/// bound `∫_R^∞ ρ^{-1-p} (a + b log ρ) dρ` is below `budget`, substituting
/// `ρ = e^t`. Returns the integral and the truncation bound.
fn log_tail<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    a: f64,
    b: f64,
    p: f64,
    budget: f64,
    opts: AdaptiveOptions,
) -> (Estimate, f64) {
    let remainder = |big_r: f64| {
        let lr = big_r.ln();
        big_r.powf(-p) * (a / p + b * (lr / p + 1.0 / (p * p)))
    };
    let mut end = start.max(1.0) * 2.0;
    while remainder(end) > budget && end < 1e300 {
        end *= 2.0;
    }
    let (t0, t1) = (start.ln(), end.ln());
    let est = adaptive(
        |t: f64| {
            let rho = t.exp();
            f(rho) * rho
        },
        t0,
        t1,
        &[],
        opts,
    );
    (est, remainder(end))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator1d::torsion_constant;

    #[test]
    fn bump_is_constant_inside_the_ball() {
        for &s in &[0.25, 0.5, 0.75] {
            let u = RadialFunction::bump(s);
            let kappa = torsion_constant(1, s).unwrap();
            let vals: Vec<f64> = [0.0, 0.3, 0.6]
                .iter()
                .map(|&r| radial_evaluate(1, s, &u, r, 1e-8).unwrap().value)
                .collect();
            for v in &vals {
                assert!((v - kappa).abs() < 1e-6 * kappa, "s={s}: {v} vs {kappa}");
            }
            assert!((vals[0] - vals[1]).abs() < 1e-6);
            assert!((vals[1] - vals[2]).abs() < 1e-6);
        }
    }

    #[test]
    fn bump_in_three_dimensions() {
        let s = 0.6;
        let kappa = torsion_constant(3, s).unwrap();
        for &r in &[0.0, 0.4] {
            let v = radial_evaluate(3, s, &RadialFunction::bump(s), r, 1e-7).unwrap();
            assert!((v.value / kappa - 1.0).abs() < 1e-5, "r={r}: {} vs {kappa}", v.value);
        }
    }

    #[test]
    fn constant_has_zero_fractional_laplacian() {
        for &(n, s) in &[(1, 0.3), (2, 0.5), (5, 0.8)] {
            let v = radial_evaluate(n, s, &RadialFunction::constant(3.0), 0.7, 1e-8).unwrap();
            assert!(v.value.abs() < 1e-8, "{v:?}");
        }
    }

    #[test]
    fn singular_points_rejected() {
        let log = RadialFunction::log_singular(0.3);
        assert!(matches!(
            radial_evaluate(9, 0.3, &log, 0.0, 1e-6),
            Err(Error::SingularPoint(_))
        ));
        let bump = RadialFunction::bump(0.3);
        assert!(matches!(
            radial_evaluate(1, 0.3, &bump, 1.0, 1e-6),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn log_solution_matches_lambda0() {
        for &(n, s) in &[(9, 0.63237), (1, 0.25)] {
            let v = radial_evaluate(n, s, &RadialFunction::log_singular(s), 1.0, 1e-7).unwrap();
            let lambda0 = specfun::lambda0(n, s).unwrap();
            assert!(
                (v.value / lambda0 - 1.0).abs() < 1e-4,
                "n={n} s={s}: {} vs {lambda0}",
                v.value
            );
        }
    }

    #[test]
    fn tolerances_agree() {
        let u = RadialFunction::bump(0.4);
        let coarse = radial_evaluate(1, 0.4, &u, 0.2, 1e-6).unwrap();
        let fine = radial_evaluate(1, 0.4, &u, 0.2, 1e-8).unwrap();
        assert!((coarse.value - fine.value).abs() <= 1e-6);
    }
}
