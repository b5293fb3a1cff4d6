use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use fredholm_core::{InitialGuess, Method, SolverConfig};
use serde::{Deserialize, Serialize};

pub const OUT_ENV: &str = "FREDHOLM_OUT";
pub const DEFAULT_OUT_DIR: &str = "fredholm-out";
pub const DEFAULT_PLOT_POINTS: usize = 101;

/// Flat JSON run configuration. Every field is optional in the file; command
/// line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub problem: Option<String>,
    pub method: Option<String>,
    pub quad_order: Option<usize>,
    pub tol_residual: Option<f64>,
    pub tol_step: Option<f64>,
    pub max_iter: Option<usize>,
    pub initial_constant: Option<f64>,
    pub denom_guard: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub plot_points: Option<usize>,
}

impl RunConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Registered problem name (see `list`).
    #[arg(long)]
    pub problem: Option<String>,
    /// Flat JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// newton_type or picard.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub quad_order: Option<usize>,
    /// Residual tolerance.
    #[arg(long = "tol")]
    pub tol_residual: Option<f64>,
    #[arg(long)]
    pub tol_step: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Constant initial guess.
    #[arg(long = "initial", allow_hyphen_values = true)]
    pub initial_constant: Option<f64>,
    #[arg(long)]
    pub denom_guard: Option<f64>,
    /// Output directory (falls back to $FREDHOLM_OUT, then ./fredholm-out).
    #[arg(long = "out")]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub plot_points: Option<usize>,
}

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub problem: String,
    pub method: String,
    pub quad_order: usize,
    pub tol_residual: f64,
    pub tol_step: f64,
    pub max_iter: usize,
    pub initial_constant: f64,
    pub denom_guard: f64,
    pub output_dir: PathBuf,
    pub plot_points: usize,
}

impl RunConfig {
    /// Merges flags over the config file over defaults, then validates.
    pub fn resolve(args: &RunArgs, env_out: Option<PathBuf>) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(p) => RunConfigFile::load(p)?,
            None => RunConfigFile::default(),
        };
        let defaults = SolverConfig::default();
        let initial_default = match defaults.initial {
            InitialGuess::Constant(c) => c,
            InitialGuess::Function(_) => 1.0,
        };

        let Some(problem) = args.problem.clone().or(file.problem) else {
            bail!("no problem given (use --problem NAME or set \"problem\" in the config file)");
        };
        let method: Method = args
            .method
            .clone()
            .or(file.method)
            .map(|m| m.parse())
            .transpose()?
            .unwrap_or(defaults.method);

        let cfg = RunConfig {
            problem,
            method: method.as_str().to_string(),
            quad_order: args.quad_order.or(file.quad_order).unwrap_or(defaults.quad_order),
            tol_residual: args.tol_residual.or(file.tol_residual).unwrap_or(defaults.tol_residual),
            tol_step: args.tol_step.or(file.tol_step).unwrap_or(defaults.tol_step),
            max_iter: args.max_iter.or(file.max_iter).unwrap_or(defaults.max_iter),
            initial_constant: args
                .initial_constant
                .or(file.initial_constant)
                .unwrap_or(initial_default),
            denom_guard: args.denom_guard.or(file.denom_guard).unwrap_or(defaults.denom_guard),
            output_dir: args
                .output_dir
                .clone()
                .or(file.output_dir)
                .or(env_out)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            plot_points: args.plot_points.or(file.plot_points).unwrap_or(DEFAULT_PLOT_POINTS),
        };
        cfg.solver_config(cfg.method())?.validate()?;
        if cfg.plot_points < 2 {
            bail!("plot_points must be at least 2, got {}", cfg.plot_points);
        }
        Ok(cfg)
    }

    pub fn method(&self) -> Method {
        self.method.parse().expect("validated in resolve")
    }

    pub fn solver_config(&self, method: Method) -> anyhow::Result<SolverConfig> {
        Ok(SolverConfig {
            quad_order: self.quad_order,
            tol_residual: self.tol_residual,
            tol_step: self.tol_step,
            max_iter: self.max_iter,
            initial: InitialGuess::Constant(self.initial_constant),
            denom_guard: self.denom_guard,
            method,
            keep_iterates: false,
        })
    }
}
