//! Nodal iteration drivers: the pointwise Newton-type update
//! `u ← u - F(u)/T_{F,1}(u)` and classical successive approximation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operators::{OperatorContext, DEFAULT_DENOM_GUARD};
use crate::problems::{GridFunction, ProblemSpec, ScalarFn};
use crate::quadrature::{gauss_legendre, MAX_ORDER};

/// Residual growth over the initial residual that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    NewtonType,
    Picard,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::NewtonType => "newton_type",
            Method::Picard => "picard",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newton_type" | "newton-type" | "newton" => Ok(Method::NewtonType),
            "picard" => Ok(Method::Picard),
            other => Err(Error::InvalidConfig(format!(
                "unknown method `{other}` (expected newton_type or picard)"
            ))),
        }
    }
}

#[derive(Clone)]
pub enum InitialGuess {
    Constant(f64),
    Function(ScalarFn),
}

impl fmt::Debug for InitialGuess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialGuess::Constant(c) => write!(f, "Constant({c})"),
            InitialGuess::Function(_) => f.write_str("Function(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub quad_order: usize,
    pub tol_residual: f64,
    pub tol_step: f64,
    pub max_iter: usize,
    pub initial: InitialGuess,
    pub denom_guard: f64,
    pub method: Method,
    /// Keep every iterate in the report.
    pub keep_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            quad_order: 32,
            tol_residual: 1e-12,
            tol_step: 1e-12,
            max_iter: 50,
            initial: InitialGuess::Constant(1.0),
            denom_guard: DEFAULT_DENOM_GUARD,
            method: Method::NewtonType,
            keep_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.quad_order == 0 || self.quad_order > MAX_ORDER {
            return Err(Error::InvalidConfig(format!(
                "quad_order must be in 1..={MAX_ORDER}, got {}",
                self.quad_order
            )));
        }
        if !positive(self.tol_residual) {
            return Err(Error::InvalidConfig("tol_residual must be positive".into()));
        }
        if !positive(self.tol_step) {
            return Err(Error::InvalidConfig("tol_step must be positive".into()));
        }
        if !positive(self.denom_guard) {
            return Err(Error::InvalidConfig("denom_guard must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if let InitialGuess::Constant(c) = self.initial {
            if !c.is_finite() {
                return Err(Error::InvalidConfig("initial guess must be finite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    MaxIter,
    SmoothnessViolation,
    Divergence,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::MaxIter => "max-iter",
            FailureReason::SmoothnessViolation => "smoothness-violation",
            FailureReason::Divergence => "divergence",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub reason: FailureReason,
    pub detail: String,
}

/// Iteration history of one solve. Index `n` of each history refers to `u_n`
/// (`residual_history`, `error_history`) or to the step `u_n → u_{n+1}`
/// (`step_history`).
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub method: Method,
    pub converged: bool,
    pub iterations: usize,
    pub iterate_history: Option<Vec<GridFunction>>,
    pub residual_history: Vec<f64>,
    pub step_history: Vec<f64>,
    pub error_history: Option<Vec<f64>>,
    pub final_iterate: GridFunction,
    pub failure: Option<Failure>,
    /// False when `∂G/∂h` came from the finite-difference fallback.
    pub analytic_kernel_dh: bool,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history includes u0")
    }

    pub fn final_error(&self) -> Option<f64> {
        self.error_history.as_ref().and_then(|e| e.last().copied())
    }
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn initial_grid(config: &SolverConfig, ctx: &OperatorContext) -> Result<GridFunction> {
    let rule = ctx.rule().clone();
    match &config.initial {
        InitialGuess::Constant(c) => GridFunction::constant(rule, *c),
        InitialGuess::Function(f) => GridFunction::from_fn(rule, f.clone()),
    }
}

enum Step {
    Next(Vec<f64>),
    Stop(Failure),
}

fn newton_step(ctx: &OperatorContext, u: &GridFunction, residuals: &[f64]) -> Result<Step> {
    let mut next = Vec::with_capacity(residuals.len());
    for (i, (&ui, &fi)) in u.values().iter().zip(residuals).enumerate() {
        let terms = ctx.nodal_terms(u, i)?;
        if terms.denominator.is_nan() || terms.denominator.abs() < ctx.denom_guard() {
            let x = ctx.rule().nodes()[i];
            let err = Error::SmoothnessViolation {
                x,
                denominator: terms.denominator,
            };
            return Ok(Step::Stop(Failure {
                reason: FailureReason::SmoothnessViolation,
                detail: err.to_string(),
            }));
        }
        next.push(ui - fi / terms.denominator);
    }
    Ok(Step::Next(next))
}

/// Runs the method selected in `config` on `spec`.
///
/// Configuration and discretization errors are returned as `Err`; numerical
/// failures (smoothness violation, divergence, iteration cap) are reported in
/// [`SolveReport::failure`] together with the partial history.
pub fn solve(spec: &ProblemSpec, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    let rule = gauss_legendre(config.quad_order)?;
    let ctx = OperatorContext::new(spec.clone(), rule).with_denom_guard(config.denom_guard)?;
    let exact = spec.exact_fn();
    let error_of = |u: &GridFunction| exact.as_ref().map(|p| u.sup_distance_to(|x| p(x)));

    let mut u = initial_grid(config, &ctx)?;
    let mut residuals = ctx.nodal_residuals(&u)?;
    let initial_residual = sup_abs(&residuals);

    let mut residual_history = vec![initial_residual];
    let mut step_history = Vec::new();
    let mut error_history = exact.as_ref().map(|_| vec![error_of(&u).unwrap()]);
    let mut iterate_history = config.keep_iterates.then(|| vec![u.clone()]);
    let mut iterations = 0;
    let mut converged = false;
    let mut failure = None;

    loop {
        if *residual_history.last().unwrap() <= config.tol_residual {
            converged = true;
            break;
        }
        if iterations == config.max_iter {
            failure = Some(Failure {
                reason: FailureReason::MaxIter,
                detail: format!(
                    "no convergence after {} iterations (residual {:e})",
                    iterations,
                    residual_history.last().unwrap()
                ),
            });
            break;
        }

        let next = match config.method {
            // u - F(u) = f + λ Σ w G
            Method::Picard => u.values().iter().zip(&residuals).map(|(v, r)| v - r).collect(),
            Method::NewtonType => match newton_step(&ctx, &u, &residuals)? {
                Step::Next(v) => v,
                Step::Stop(f) => {
                    failure = Some(f);
                    break;
                }
            },
        };

        if let Some(i) = next.iter().position(|v| !v.is_finite()) {
            failure = Some(Failure {
                reason: FailureReason::Divergence,
                detail: format!("iterate became non-finite at node {i}"),
            });
            break;
        }
        let next = u.with_values(next)?;
        let step = next.sup_distance(&u);
        u = next;
        iterations += 1;

        residuals = match ctx.nodal_residuals(&u) {
            Ok(r) => r,
            Err(e) => {
                failure = Some(Failure {
                    reason: FailureReason::Divergence,
                    detail: e.to_string(),
                });
                break;
            }
        };
        let residual = sup_abs(&residuals);
        step_history.push(step);
        residual_history.push(residual);
        if let Some(h) = error_history.as_mut() {
            h.push(error_of(&u).unwrap());
        }
        if let Some(h) = iterate_history.as_mut() {
            h.push(u.clone());
        }

        if residual > DIVERGENCE_FACTOR * initial_residual {
            failure = Some(Failure {
                reason: FailureReason::Divergence,
                detail: format!(
                    "residual grew from {initial_residual:e} to {residual:e} after {iterations} iterations"
                ),
            });
            break;
        }
        if residual <= config.tol_residual || step <= config.tol_step {
            converged = true;
            break;
        }
    }

    Ok(SolveReport {
        method: config.method,
        converged,
        iterations,
        iterate_history,
        residual_history,
        step_history,
        error_history,
        final_iterate: u,
        failure,
        analytic_kernel_dh: spec.has_analytic_kernel_dh(),
    })
}

/// Successive approximation `u ← f + λ Σ w G(·, t, u)` with otherwise
/// identical settings.
pub fn solve_picard(spec: &ProblemSpec, config: &SolverConfig) -> Result<SolveReport> {
    let config = SolverConfig {
        method: Method::Picard,
        ..config.clone()
    };
    solve(spec, &config)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionSample {
    pub x: f64,
    pub value: f64,
    pub exact: Option<f64>,
    pub abs_err: Option<f64>,
}

/// Evaluates the final iterate at arbitrary points through its Nyström
/// extension.
pub fn evaluate_solution(report: &SolveReport, spec: &ProblemSpec, xs: &[f64]) -> Result<Vec<SolutionSample>> {
    let ctx = OperatorContext::new(spec.clone(), report.final_iterate.rule().clone());
    xs.iter()
        .map(|&x| {
            let value = ctx.nystrom_eval(&report.final_iterate, x)?;
            let exact = spec.exact(x);
            Ok(SolutionSample {
                x,
                value,
                exact,
                abs_err: exact.map(|e| (value - e).abs()),
            })
        })
        .collect()
}

/// `n` uniformly spaced points covering `[0, 1]`, both ends included.
pub fn uniform_points(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|k| if k == n - 1 { 1.0 } else { k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

impl InitialGuess {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        InitialGuess::Function(Arc::new(f))
    }
}
