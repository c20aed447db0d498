//! Nonlinearities, the monotone iteration for minimal solutions, first-order
//! continuation in `λ` along the minimal branch, and bracketing of the
//! extremal parameter `λ*`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::identities;
use crate::operator1d::{FracOperator, GridFunction};
use crate::stability;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityKind {
    /// `f(t) = e^t`.
    Exponential,
    /// `f(t) = (1 + t)^p`, `p > 1`.
    Power { p: f64 },
    /// `f ≡ 1`. Not superlinear; only for manufactured linear checks.
    Constant,
}

/// A nonlinearity `f` with derivative, antiderivative `F` (`F(0) = 0`) and
/// the asymptotic ratio `τ = lim f f'' / f'²` where known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
}

impl Nonlinearity {
    pub fn exponential() -> Self {
        Self {
            kind: NonlinearityKind::Exponential,
        }
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power exponent must exceed 1, got {p}"
            )));
        }
        Ok(Self {
            kind: NonlinearityKind::Power { p },
        })
    }

    pub fn constant() -> Self {
        Self {
            kind: NonlinearityKind::Constant,
        }
    }

    /// Looks up a nonlinearity by name (`exp`, `power`, `constant`).
    pub fn by_name(name: &str, p: Option<f64>) -> Result<Self> {
        match name {
            "exp" | "exponential" => Ok(Self::exponential()),
            "power" => Self::power(p.ok_or_else(|| Error::InvalidParameter("power needs exponent p".into()))?),
            "constant" => Ok(Self::constant()),
            other => Err(Error::InvalidParameter(format!("unknown nonlinearity `{other}`"))),
        }
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            NonlinearityKind::Exponential => "exp",
            NonlinearityKind::Power { .. } => "power",
            NonlinearityKind::Constant => "constant",
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.kind, NonlinearityKind::Exponential)
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Exponential => t.exp(),
            NonlinearityKind::Power { p } => (1.0 + t).powf(p),
            NonlinearityKind::Constant => 1.0,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Exponential => t.exp(),
            NonlinearityKind::Power { p } => p * (1.0 + t).powf(p - 1.0),
            NonlinearityKind::Constant => 0.0,
        }
    }

    pub fn antiderivative(&self, t: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Exponential => t.exp_m1(),
            NonlinearityKind::Power { p } => ((1.0 + t).powf(p + 1.0) - 1.0) / (p + 1.0),
            NonlinearityKind::Constant => t,
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match self.kind {
            NonlinearityKind::Exponential => Some(1.0),
            NonlinearityKind::Power { p } => Some((p - 1.0) / p),
            NonlinearityKind::Constant => None,
        }
    }

    /// Sup-norm beyond which the monotone iteration is declared divergent.
    pub fn default_sup_cap(&self) -> f64 {
        match self.kind {
            NonlinearityKind::Exponential => 50.0,
            NonlinearityKind::Power { .. } => 1e8,
            NonlinearityKind::Constant => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationOptions {
    pub sup_cap: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Newton steps applied after convergence to tighten the residual.
    pub newton_polish: usize,
}

impl IterationOptions {
    pub fn for_nonlinearity(f: &Nonlinearity) -> Self {
        Self {
            sup_cap: f.default_sup_cap(),
            ..Self::default()
        }
    }
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            sup_cap: 50.0,
            max_iter: 10_000,
            tol: 1e-10,
            newton_polish: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceReason {
    SupCapExceeded,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MinimalSolve {
    Converged {
        u: GridFunction,
        iterations: usize,
    },
    Diverged {
        reason: DivergenceReason,
        iterations: usize,
        sup: f64,
    },
}

impl MinimalSolve {
    pub fn is_converged(&self) -> bool {
        matches!(self, MinimalSolve::Converged { .. })
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(())
}

/// Monotone iteration `A u^{k+1} = λ f(u^k)` from a subsolution `start`
/// (zero, or a minimal solution at a smaller `λ`). Iterates are checked to be
/// nondecreasing at every step.
pub fn solve_minimal(
    op: &FracOperator,
    f: &Nonlinearity,
    lambda: f64,
    start: Option<&GridFunction>,
    opts: &IterationOptions,
) -> Result<MinimalSolve> {
    check_lambda(lambda)?;
    let n = op.n_points();
    let chol = op.cholesky()?;
    let mut u = match start {
        Some(s) if s.n_points() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.n_points(),
            })
        }
        Some(s) => s.as_dvector(),
        None => DVector::zeros(n),
    };
    for k in 1..=opts.max_iter {
        let rhs = u.map(|t| lambda * f.value(t));
        let next = chol.solve(&rhs);
        let mut step = 0.0_f64;
        let mut sup = f64::NEG_INFINITY;
        for (i, (&new, &old)) in next.iter().zip(u.iter()).enumerate() {
            let diff = new - old;
            if diff < -1e-12 * old.abs().max(1.0) {
                return Err(Error::MonotonicityViolated {
                    iteration: k,
                    node: i,
                    decrease: -diff,
                });
            }
            step = step.max(diff.abs());
            sup = sup.max(new);
        }
        if !(sup <= opts.sup_cap) {
            return Ok(MinimalSolve::Diverged {
                reason: DivergenceReason::SupCapExceeded,
                iterations: k,
                sup,
            });
        }
        u = next;
        if step <= opts.tol {
            let polished = newton_polish(op, f, lambda, u, opts.newton_polish);
            return Ok(MinimalSolve::Converged {
                u: GridFunction::from_dvector(polished)?,
                iterations: k,
            });
        }
    }
    Ok(MinimalSolve::Diverged {
        reason: DivergenceReason::MaxIterations,
        iterations: opts.max_iter,
        sup: u.max(),
    })
}

fn residual(op: &FracOperator, f: &Nonlinearity, lambda: f64, u: &DVector<f64>) -> DVector<f64> {
    op.matrix() * u - u.map(|t| lambda * f.value(t))
}

/// Newton steps on `A u - λ f(u) = 0`, each kept only if it lowers the
/// residual sup-norm.
fn newton_polish(op: &FracOperator, f: &Nonlinearity, lambda: f64, mut u: DVector<f64>, steps: usize) -> DVector<f64> {
    let mut res = residual(op, f, lambda, &u);
    for _ in 0..steps {
        let mut jac: DMatrix<f64> = op.matrix().clone();
        for i in 0..u.len() {
            jac[(i, i)] -= lambda * f.derivative(u[i]);
        }
        let Some(delta) = jac.lu().solve(&res) else {
            break;
        };
        let candidate = &u - delta;
        let cand_res = residual(op, f, lambda, &candidate);
        if cand_res.amax() < res.amax() {
            u = candidate;
            res = cand_res;
        } else {
            break;
        }
    }
    u
}

/// A converged point of the minimal branch with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub lambda: f64,
    pub u: GridFunction,
    pub sup_u: f64,
    pub energy: f64,
    pub hs_norm_sq: f64,
    pub mu1: f64,
    pub pohozaev_residual: f64,
    pub iterations: usize,
}

impl BranchPoint {
    pub fn evaluate(
        op: &FracOperator,
        f: &Nonlinearity,
        lambda: f64,
        u: GridFunction,
        iterations: usize,
    ) -> Result<Self> {
        let potential = u.map(|t| lambda * f.derivative(t));
        let eig = stability::smallest_eigenpair(op, Some(&potential))?;
        let pohozaev = identities::pohozaev_residual(op, f, &u, lambda)?;
        Ok(Self {
            lambda,
            sup_u: u.sup(),
            energy: energy(op, f, &u, lambda)?,
            hs_norm_sq: op.hs_form(&u, &u)?,
            mu1: eig.mu1,
            pohozaev_residual: pohozaev.relative,
            iterations,
            u,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IterateOutcome {
    Converged(Box<BranchPoint>),
    Diverged {
        reason: DivergenceReason,
        iterations: usize,
        sup: f64,
    },
}

/// Monotone iteration from zero, evaluated into a [`BranchPoint`] on success.
pub fn monotone_iterate(
    op: &FracOperator,
    f: &Nonlinearity,
    lambda: f64,
    opts: &IterationOptions,
) -> Result<IterateOutcome> {
    match solve_minimal(op, f, lambda, None, opts)? {
        MinimalSolve::Converged { u, iterations } => Ok(IterateOutcome::Converged(Box::new(BranchPoint::evaluate(
            op, f, lambda, u, iterations,
        )?))),
        MinimalSolve::Diverged {
            reason,
            iterations,
            sup,
        } => Ok(IterateOutcome::Diverged {
            reason,
            iterations,
            sup,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchOptions {
    pub lambda_step_init: f64,
    pub step_shrink: f64,
    pub stop_mu1: f64,
    pub max_points: usize,
    pub min_step: f64,
    /// Number of random test functions for the per-point weak-form check.
    pub weak_tests: usize,
    pub iteration: IterationOptions,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            lambda_step_init: 0.05,
            step_shrink: 0.5,
            stop_mu1: 1e-6,
            max_points: 200,
            min_step: 1e-8,
            weak_tests: 5,
            iteration: IterationOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    /// Largest converged and smallest diverged `λ`, once both are known.
    pub lambda_star_bracket: Option<(f64, f64)>,
}

/// Marches along the minimal branch in `λ`, warm-starting each solve from
/// the previous point and shrinking the step whenever the iteration
/// diverges.
pub fn compute_branch(op: &FracOperator, f: &Nonlinearity, opts: &BranchOptions) -> Result<Branch> {
    if !(opts.lambda_step_init > 0.0) {
        return Err(Error::InvalidParameter("lambda_step_init must be positive".into()));
    }
    if !(opts.step_shrink > 0.0 && opts.step_shrink < 1.0) {
        return Err(Error::InvalidParameter("step_shrink must lie in (0, 1)".into()));
    }
    let mut points: Vec<BranchPoint> = Vec::new();
    let mut lo: Option<f64> = None;
    let mut hi: Option<f64> = None;
    let mut step = opts.lambda_step_init;
    let mut lambda = opts.lambda_step_init;
    let weak_limit = 10.0 * opts.iteration.tol;

    while points.len() < opts.max_points && step >= opts.min_step {
        let start = points.last().map(|p| &p.u);
        match solve_minimal(op, f, lambda, start, &opts.iteration)? {
            MinimalSolve::Converged { u, iterations } => {
                let weak = identities::weak_solution_residual(op, f, &u, lambda, opts.weak_tests)?;
                if weak > weak_limit {
                    return Err(Error::WeakResidual {
                        lambda,
                        residual: weak,
                        limit: weak_limit,
                    });
                }
                let point = BranchPoint::evaluate(op, f, lambda, u, iterations)?;
                let stop = point.mu1 < opts.stop_mu1;
                points.push(point);
                lo = Some(lambda);
                if stop {
                    break;
                }
            }
            MinimalSolve::Diverged { .. } => {
                hi = Some(hi.map_or(lambda, |h: f64| h.min(lambda)));
                step *= opts.step_shrink;
            }
        }
        let base = lo.unwrap_or(0.0);
        if let Some(h) = hi {
            while step >= opts.min_step && base + step >= h {
                step *= opts.step_shrink;
            }
        }
        lambda = base + step;
    }
    Ok(Branch {
        lambda_star_bracket: lo.zip(hi),
        points,
    })
}

/// Brackets `λ*`: a doubling sweep from `λ = 1/64` locates the first
/// divergence, then bisection (warm-started from the converged side) narrows
/// the bracket to `tol_lambda`.
pub fn estimate_lambda_star(
    op: &FracOperator,
    f: &Nonlinearity,
    tol_lambda: f64,
    opts: &IterationOptions,
) -> Result<(f64, f64)> {
    if !(tol_lambda > 0.0) {
        return Err(Error::InvalidParameter("tol_lambda must be positive".into()));
    }
    const SWEEP_START: f64 = 1.0 / 64.0;
    const SWEEP_LIMIT: f64 = 1048576.0;
    let mut lo = 0.0;
    let mut lo_u: Option<GridFunction> = None;
    let mut lambda = SWEEP_START;
    let hi = loop {
        if lambda > SWEEP_LIMIT {
            return Err(Error::BracketNotFound(SWEEP_LIMIT));
        }
        match solve_minimal(op, f, lambda, lo_u.as_ref(), opts)? {
            MinimalSolve::Converged { u, .. } => {
                lo = lambda;
                lo_u = Some(u);
                lambda *= 2.0;
            }
            MinimalSolve::Diverged { .. } => break lambda,
        }
    };
    let mut hi = hi;
    while hi - lo > tol_lambda {
        let mid = 0.5 * (lo + hi);
        match solve_minimal(op, f, mid, lo_u.as_ref(), opts)? {
            MinimalSolve::Converged { u, .. } => {
                lo = mid;
                lo_u = Some(u);
            }
            MinimalSolve::Diverged { .. } => hi = mid,
        }
    }
    Ok((lo, hi))
}

/// Boundary values of `u / δ^s` at `x = -1` and `x = +1` for samples of a
/// function that is smooth up to the boundary after division by `δ^s`.
/// Quadratic extrapolation through the three nodes nearest each endpoint.
///
/// Discrete solutions of the collocation scheme carry a boundary layer this
/// estimate cannot see; use [`solution_boundary_quotient`] for those.
pub fn boundary_quotient(u: &GridFunction, s: f64) -> (f64, f64) {
    let v = u.values();
    let h = u.h();
    let side = |at: &dyn Fn(usize) -> f64| -> f64 {
        let q = |k: usize| at(k - 1) / (k as f64 * h).powf(s);
        if v.len() < 6 {
            return q(1);
        }
        3.0 * q(1) - 3.0 * q(2) + q(3)
    };
    let n = v.len();
    (side(&|i| v[i]), side(&|i| v[n - 1 - i]))
}

/// Boundary values of `u / δ^s` for a discrete solution of `A u = g`.
///
/// The discrete solution of `A w = κ` has boundary quotient `2^s` and
/// carries the same discrete boundary layer as `u`, so `2^s u / w` is smooth
/// up to the boundary. Each side is fitted by least squares with
/// `q + a δ^{2s} + b δ + c δ²` over nodes with `δ ≤ 0.35` and read off at
/// `δ = 0`. Grids with fewer than six such nodes use the nearest node.
pub fn solution_boundary_quotient(op: &FracOperator, u: &GridFunction) -> Result<(f64, f64)> {
    let n = op.n_points();
    if u.n_points() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.n_points(),
        });
    }
    let s = op.s();
    let kappa = crate::operator1d::torsion_constant(1, s)?;
    let w = op.solve_linear(&GridFunction::from_fn(n, |_| kappa)?)?;
    let scale = 2f64.powf(s);
    let ratio: Vec<f64> = u.values().iter().zip(w.values()).map(|(a, b)| scale * a / b).collect();
    let h = op.h();
    let reversed: Vec<f64> = ratio.iter().rev().copied().collect();
    Ok((side_quotient(&ratio, h, s), side_quotient(&reversed, h, s)))
}

const QUOTIENT_MAX_DELTA: f64 = 0.35;
const QUOTIENT_MIN_NODES: usize = 6;

/// `from_edge[k - 1]` is the ratio at distance `k h` from the endpoint.
fn side_quotient(from_edge: &[f64], h: f64, s: f64) -> f64 {
    let last = ((QUOTIENT_MAX_DELTA / h) as usize).min(from_edge.len() / 2);
    if last < QUOTIENT_MIN_NODES {
        return from_edge[0];
    }
    let design = DMatrix::from_fn(last, 4, |i, j| {
        let d = (i + 1) as f64 * h;
        [1.0, d.powf(2.0 * s), d, d * d][j]
    });
    let rhs = DVector::from_column_slice(&from_edge[..last]);
    match design.svd(true, true).solve(&rhs, 1e-12) {
        Ok(coef) => coef[0],
        Err(_) => from_edge[0],
    }
}

/// `E(u) = ½ ‖u‖²_{H^s} - λ ∫_Ω F(u)`.
pub fn energy(op: &FracOperator, f: &Nonlinearity, u: &GridFunction, lambda: f64) -> Result<f64> {
    let quadratic = op.hs_form(u, u)?;
    let potential = u.map(|t| f.antiderivative(t)).integral();
    Ok(0.5 * quadratic - lambda * potential)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonlinearity_attributes() {
        let e = Nonlinearity::exponential();
        assert_eq!(e.tau(), Some(1.0));
        assert_eq!(e.antiderivative(0.0), 0.0);
        let p = Nonlinearity::power(3.0).unwrap();
        assert!((p.tau().unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.antiderivative(0.0), 0.0);
        // F' = f by central difference.
        for nl in [e, p, Nonlinearity::constant()] {
            for &t in &[0.5, 2.0] {
                let h = 1e-6;
                let fd = (nl.antiderivative(t + h) - nl.antiderivative(t - h)) / (2.0 * h);
                assert!((fd - nl.value(t)).abs() < 1e-6 * nl.value(t).max(1.0));
                let fd = (nl.value(t + h) - nl.value(t - h)) / (2.0 * h);
                assert!((fd - nl.derivative(t)).abs() < 1e-5 * nl.derivative(t).max(1.0));
            }
        }
        assert!(Nonlinearity::power(1.0).is_err());
        assert!(Nonlinearity::by_name("cosh", None).is_err());
    }

    #[test]
    fn tiny_lambda_is_linear() {
        let op = FracOperator::assemble(0.75, 64).unwrap();
        let f = Nonlinearity::exponential();
        let MinimalSolve::Converged { u, .. } =
            solve_minimal(&op, &f, 1e-12, None, &IterationOptions::default()).unwrap()
        else {
            panic!("tiny lambda must converge");
        };
        let lin = op.solve_linear(&GridFunction::from_fn(64, |_| 1e-12).unwrap()).unwrap();
        for (a, b) in u.values().iter().zip(lin.values()) {
            assert!((a - b).abs() < 1e-20);
        }
        assert!(u.sup() < 1e-11);
        assert!(solve_minimal(&op, &f, 0.0, None, &IterationOptions::default()).is_err());
    }

    #[test]
    fn large_lambda_diverges() {
        let op = FracOperator::assemble(0.75, 64).unwrap();
        let out = monotone_iterate(&op, &Nonlinearity::exponential(), 100.0, &IterationOptions::default()).unwrap();
        assert!(matches!(
            out,
            IterateOutcome::Diverged {
                reason: DivergenceReason::SupCapExceeded,
                ..
            }
        ));
    }

    #[test]
    fn converged_residual_is_small() {
        let op = FracOperator::assemble(0.75, 256).unwrap();
        let f = Nonlinearity::exponential();
        let opts = IterationOptions::default();
        let IterateOutcome::Converged(p) = monotone_iterate(&op, &f, 0.5, &opts).unwrap() else {
            panic!("lambda = 0.5 must converge");
        };
        let au = op.apply(&p.u).unwrap();
        let res = au
            .values()
            .iter()
            .zip(p.u.values())
            .map(|(a, u)| (a - 0.5 * u.exp()).abs())
            .fold(0.0, f64::max);
        assert!(res <= 10.0 * opts.tol, "{res:e}");
        assert!(p.mu1 > 0.0);
        assert!(p.energy <= 0.0);
    }

    #[test]
    fn empty_branch() {
        let op = FracOperator::assemble(0.75, 32).unwrap();
        let b = compute_branch(
            &op,
            &Nonlinearity::exponential(),
            &BranchOptions {
                max_points: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(b.points.is_empty());
        assert_eq!(b.lambda_star_bracket, None);
    }

    #[test]
    fn coarse_bracket_survives_loose_tolerance() {
        let op = FracOperator::assemble(0.75, 32).unwrap();
        let f = Nonlinearity::exponential();
        let (lo, hi) = estimate_lambda_star(&op, &f, 1e3, &IterationOptions::default()).unwrap();
        assert!((hi / lo - 2.0).abs() < 1e-12, "{lo} {hi}");
        let c = Nonlinearity::constant();
        let err = estimate_lambda_star(&op, &c, 1e-3, &IterationOptions::for_nonlinearity(&c));
        assert!(matches!(err, Err(Error::BracketNotFound(_))));
    }

    #[test]
    fn boundary_quotient_of_linear_solution() {
        for &s in &[0.25, 0.5, 0.75] {
            let op = FracOperator::assemble(s, 255).unwrap();
            let u = op.solve_linear(&GridFunction::from_fn(255, |_| 1.3).unwrap()).unwrap();
            let (l, r) = solution_boundary_quotient(&op, &u).unwrap();
            // u = 1.3 (1 - x²)^s / κ in the continuum.
            let expect = 1.3 * 2f64.powf(s) / crate::operator1d::torsion_constant(1, s).unwrap();
            assert!((l - r).abs() < 1e-10 * expect);
            assert!((r / expect - 1.0).abs() < 1e-9, "s={s}: {r} vs {expect}");
            let nearest = u.values()[254] / u.h().powf(s);
            assert!((nearest / expect - 1.0).abs() > 0.05);
        }
        let op = FracOperator::assemble(0.5, 16).unwrap();
        assert_eq!(
            solution_boundary_quotient(&op, &GridFunction::zeros(16).unwrap()).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn boundary_quotient_of_exact_samples() {
        for &s in &[0.25, 0.5, 0.75] {
            let u = GridFunction::from_fn(512, |x| (1.0 - x * x).powf(s)).unwrap();
            let (l, r) = boundary_quotient(&u, s);
            let expect = 2f64.powf(s);
            assert!(
                (l / expect - 1.0).abs() < 0.02 && (r / expect - 1.0).abs() < 0.02,
                "s={s}: {l} {r}"
            );
        }
        assert_eq!(boundary_quotient(&GridFunction::zeros(16).unwrap(), 0.5), (0.0, 0.0));
    }

    #[test]
    fn energy_of_linear_problem_is_minimized_by_solution() {
        let op = FracOperator::assemble(0.6, 64).unwrap();
        let f = Nonlinearity::constant();
        let lambda = 0.7;
        assert_eq!(energy(&op, &f, &GridFunction::zeros(64).unwrap(), lambda).unwrap(), 0.0);
        let u = op
            .solve_linear(&GridFunction::from_fn(64, |_| lambda).unwrap())
            .unwrap();
        let e_min = energy(&op, &f, &u, lambda).unwrap();
        // Closed form for the quadratic minimum: -½ λ ∫ u.
        assert!((e_min + 0.5 * lambda * u.integral()).abs() < 1e-12);
        for k in 1..5 {
            let bumped = GridFunction::new(
                u.values()
                    .iter()
                    .zip(u.nodes())
                    .map(|(v, x)| v + 0.01 * (k as f64 * std::f64::consts::PI * (x + 1.0) / 2.0).sin())
                    .collect(),
            )
            .unwrap();
            assert!(energy(&op, &f, &bumped, lambda).unwrap() > e_min);
        }
    }
}
