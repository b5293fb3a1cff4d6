use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use fredholm_core::analysis::ContractionReport;
use fredholm_core::solver::SolutionSample;
use fredholm_core::{GridFunction, ProblemSpec, SolveReport};
use serde::Serialize;

use crate::config::RunConfig;

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Shortest round-trip decimal.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Serialize)]
pub struct FailureJson {
    pub reason: String,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct GridJson {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl From<&GridFunction> for GridJson {
    fn from(g: &GridFunction) -> Self {
        Self {
            nodes: g.rule().nodes().to_vec(),
            values: g.values().to_vec(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SolveReportJson {
    pub problem: String,
    pub description: String,
    pub lambda: f64,
    pub config: RunConfig,
    pub method: String,
    pub converged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub step_history: Vec<f64>,
    pub error_history: Option<Vec<f64>>,
    pub failure: Option<FailureJson>,
    pub kernel_derivative: &'static str,
    #[serde(rename = "final")]
    pub final_iterate: GridJson,
    pub wall_clock_seconds: f64,
}

impl SolveReportJson {
    pub fn new(spec: &ProblemSpec, config: &RunConfig, report: &SolveReport, seconds: f64) -> Self {
        Self {
            problem: spec.name.clone(),
            description: spec.description.clone(),
            lambda: spec.lambda,
            config: config.clone(),
            method: report.method.as_str().into(),
            converged: report.converged,
            iterations: report.iterations,
            residual_history: report.residual_history.clone(),
            step_history: report.step_history.clone(),
            error_history: report.error_history.clone(),
            failure: report.failure.as_ref().map(|f| FailureJson {
                reason: f.reason.as_str().into(),
                detail: f.detail.clone(),
            }),
            kernel_derivative: if report.analytic_kernel_dh {
                "analytic"
            } else {
                "finite-difference"
            },
            final_iterate: (&report.final_iterate).into(),
            wall_clock_seconds: seconds,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ContractionJson {
    pub problem: String,
    pub config: RunConfig,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub excluded: usize,
    pub sup_directional: f64,
    pub sup_lipschitz: f64,
    pub richardson_gap: f64,
    pub slack: f64,
    pub passed_half_bound: bool,
    pub note: String,
    pub center: GridJson,
}

impl ContractionJson {
    pub fn new(spec: &ProblemSpec, config: &RunConfig, c: &ContractionReport) -> Self {
        Self {
            problem: spec.name.clone(),
            config: config.clone(),
            radius: c.radius,
            samples: c.samples,
            seed: c.seed,
            excluded: c.excluded,
            sup_directional: c.sup_directional,
            sup_lipschitz: c.sup_lipschitz,
            richardson_gap: c.richardson_gap,
            slack: c.slack,
            passed_half_bound: c.passed_half_bound,
            note: c.note.into(),
            center: (&c.center).into(),
        }
    }
}

/// `x,u_approx[,u_exact,abs_err]`
pub fn solution_csv(samples: &[SolutionSample]) -> String {
    let with_exact = samples.iter().any(|s| s.exact.is_some());
    let mut out = String::from(if with_exact {
        "x,u_approx,u_exact,abs_err\n"
    } else {
        "x,u_approx\n"
    });
    for s in samples {
        write!(out, "{},{}", fmt_f64(s.x), fmt_f64(s.value)).unwrap();
        if with_exact {
            let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
            write!(out, ",{},{}", cell(s.exact), cell(s.abs_err)).unwrap();
        }
        out.push('\n');
    }
    out
}

/// `iteration,newton_residual,picard_residual[,newton_error,picard_error]`,
/// with empty cells once a method has stopped.
pub fn compare_csv(newton: &SolveReport, picard: &SolveReport) -> String {
    let errors = newton.error_history.is_some() && picard.error_history.is_some();
    let mut out = String::from("iteration,newton_residual,picard_residual");
    if errors {
        out.push_str(",newton_error,picard_error");
    }
    out.push('\n');
    let rows = newton.residual_history.len().max(picard.residual_history.len());
    let cell = |v: Option<&f64>| v.map(|x| fmt_f64(*x)).unwrap_or_default();
    for i in 0..rows {
        write!(
            out,
            "{i},{},{}",
            cell(newton.residual_history.get(i)),
            cell(picard.residual_history.get(i))
        )
        .unwrap();
        if errors {
            write!(
                out,
                ",{},{}",
                cell(newton.error_history.as_ref().and_then(|e| e.get(i))),
                cell(picard.error_history.as_ref().and_then(|e| e.get(i)))
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}
