//! Sampled certification of the local contraction of `H₁` and empirical
//! convergence rates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operators::{OperatorContext, DEFAULT_DENOM_GUARD};
use crate::problems::{GridFunction, ProblemSpec};
use crate::solver::SolveReport;

/// Errors at or below this level are treated as converged noise.
pub const ERROR_FLOOR: f64 = 1e-13;

/// Largest admissible centre residual for certification.
pub const CENTER_RESIDUAL_MAX: f64 = 1e-8;

pub const MIN_SAMPLES: usize = 10;

/// Tuning of [`estimate_contraction_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionOptions {
    pub slack: f64,
    pub epsilon: f64,
    /// Second difference step, used only for the Richardson sanity gap.
    pub epsilon_check: f64,
    pub denom_guard: f64,
}

impl Default for ContractionOptions {
    fn default() -> Self {
        Self {
            slack: 0.05,
            epsilon: 1e-6,
            epsilon_check: 1e-5,
            denom_guard: DEFAULT_DENOM_GUARD,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub center: GridFunction,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    /// Samples dropped because `H₁` was undefined at a probe point.
    pub excluded: usize,
    /// `max |(H₁(h + ε) - H₁(h)) / ε|` over sampled `h` and all nodes.
    pub sup_directional: f64,
    /// `max sup|H₁(h₁) - H₁(h₂)| / sup|h₁ - h₂|` over sampled pairs.
    pub sup_lipschitz: f64,
    /// `max |D_ε - D_ε'|` between the two difference steps.
    pub richardson_gap: f64,
    pub slack: f64,
    pub passed_half_bound: bool,
    pub note: &'static str,
}

const PERTURBATION_NOTE: &str =
    "perturbations are independent uniform noise per node, a stricter probe than smooth perturbations";

fn directional(ctx: &OperatorContext, h: &GridFunction, base: &[f64], eps: f64) -> Result<f64> {
    let shifted = h.with_values(h.values().iter().map(|v| v + eps).collect())?;
    let moved = ctx.h1_nodal(&shifted)?;
    Ok(moved
        .iter()
        .zip(base)
        .map(|(a, b)| ((a - b) / eps).abs())
        .fold(0.0, f64::max))
}

struct Probe {
    directional: f64,
    lipschitz: f64,
    gap: f64,
}

fn probe(
    ctx: &OperatorContext,
    center: &GridFunction,
    radius: f64,
    noise_a: &[f64],
    noise_b: &[f64],
    opts: &ContractionOptions,
) -> Result<Probe> {
    let perturb =
        |noise: &[f64]| center.with_values(center.values().iter().zip(noise).map(|(c, d)| c + radius * d).collect());
    let h1 = perturb(noise_a)?;
    let h2 = perturb(noise_b)?;
    let base = ctx.h1_nodal(&h1)?;
    let d = directional(ctx, &h1, &base, opts.epsilon)?;
    let d_check = directional(ctx, &h1, &base, opts.epsilon_check)?;

    let other = ctx.h1_nodal(&h2)?;
    let image = base.iter().zip(&other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let dist = h1.sup_distance(&h2);
    let lipschitz = if dist > 0.0 { image / dist } else { 0.0 };

    Ok(Probe {
        directional: d,
        lipschitz,
        gap: (d - d_check).abs(),
    })
}

/// [`estimate_contraction_with`] using default options.
pub fn estimate_contraction(
    spec: &ProblemSpec,
    solution: &GridFunction,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<ContractionReport> {
    estimate_contraction_with(spec, solution, radius, samples, seed, &ContractionOptions::default())
}

/// Samples `h = p + radius·δ` with `δ` uniform in `[-1, 1]` per node and
/// measures the directional derivative of `H₁` in direction `1` and the
/// Lipschitz quotient of `H₁` between pairs of samples.
///
/// The noise for sample `k` depends only on `seed` and `k`, so two calls
/// with the same seed and different radii probe scaled copies of the same
/// perturbations.
pub fn estimate_contraction_with(
    spec: &ProblemSpec,
    solution: &GridFunction,
    radius: f64,
    samples: usize,
    seed: u64,
    opts: &ContractionOptions,
) -> Result<ContractionReport> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Precondition(format!("radius must be positive, got {radius}")));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::Precondition(format!(
            "samples must be at least {MIN_SAMPLES}, got {samples}"
        )));
    }
    let ctx = OperatorContext::new(spec.clone(), solution.rule().clone()).with_denom_guard(opts.denom_guard)?;
    let residual = ctx.sup_residual(solution)?;
    if residual.is_nan() || residual > CENTER_RESIDUAL_MAX {
        return Err(Error::Precondition(format!(
            "centre is not a converged solution: residual {residual:e} exceeds {CENTER_RESIDUAL_MAX:e}"
        )));
    }

    let n = solution.values().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut excluded = 0;
    let mut sup_directional: f64 = 0.0;
    let mut sup_lipschitz: f64 = 0.0;
    let mut richardson_gap: f64 = 0.0;
    for _ in 0..samples {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        match probe(&ctx, solution, radius, &a, &b, opts) {
            Ok(p) => {
                sup_directional = sup_directional.max(p.directional);
                sup_lipschitz = sup_lipschitz.max(p.lipschitz);
                richardson_gap = richardson_gap.max(p.gap);
            }
            Err(Error::SmoothnessViolation { .. }) => excluded += 1,
            Err(e) => return Err(e),
        }
    }

    Ok(ContractionReport {
        center: solution.clone(),
        radius,
        samples,
        seed,
        excluded,
        sup_directional,
        sup_lipschitz,
        richardson_gap,
        slack: opts.slack,
        passed_half_bound: excluded < samples && sup_lipschitz <= 0.5 + opts.slack,
        note: PERTURBATION_NOTE,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub ratios: Vec<f64>,
    /// Median of `ratios`.
    pub geometric_rate: f64,
    /// Least-squares slope of `ln e_{n+1}` against `ln e_n`.
    pub order_estimate: f64,
}

/// Fits a convergence rate to an error sequence, using only entries above
/// [`ERROR_FLOOR`].
pub fn fit_rate_errors(errors: &[f64]) -> Result<RateFit> {
    let usable: Vec<f64> = errors
        .iter()
        .copied()
        .take_while(|e| *e > ERROR_FLOOR && e.is_finite())
        .collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: usable.len(),
        });
    }
    let ratios: Vec<f64> = usable.windows(2).map(|w| w[1] / w[0]).collect();

    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let geometric_rate = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };

    let pts: Vec<(f64, f64)> = usable.windows(2).map(|w| (w[0].ln(), w[1].ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let order_estimate = if sxx > 0.0 { sxy / sxx } else { f64::NAN };

    Ok(RateFit {
        ratios,
        geometric_rate,
        order_estimate,
    })
}

pub fn fit_rate(report: &SolveReport) -> Result<RateFit> {
    match &report.error_history {
        Some(e) => fit_rate_errors(e),
        None => Err(Error::InsufficientData { needed: 3, got: 0 }),
    }
}
