use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use fredholm_core::analysis::{estimate_contraction, MIN_SAMPLES};
use fredholm_core::solver::uniform_points;
use fredholm_core::{evaluate_solution, solve, Method, ProblemRegistry, ProblemSpec, SolveReport};

use crate::config::{RunArgs, RunConfig};
use crate::output::{compare_csv, solution_csv, write_atomic, write_json, ContractionJson, SolveReportJson};

/// Process outcome, mapped onto exit codes 0, 1 and 2.
#[derive(Debug)]
pub enum Outcome {
    Success,
    /// Bad flags, config or problem name.
    Usage(anyhow::Error),
    /// The numerics failed; artifacts were still written.
    Numerical(String),
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Usage(_) => 1,
            Outcome::Numerical(_) => 2,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Outcome {
    fn from(e: E) -> Self {
        Outcome::Usage(e.into())
    }
}

/// One row per registered problem: name, λ, exact solution and description.
pub fn render_listing(registry: &ProblemRegistry) -> anyhow::Result<String> {
    let specs = registry.specs()?;
    let width = specs.iter().map(|s| s.name.len()).max().unwrap_or(4).max(4);
    let mut out = format!("{:<width$}  {:>8}  {:<16}  DESCRIPTION\n", "NAME", "LAMBDA", "EXACT");
    for s in &specs {
        writeln!(
            out,
            "{:<width$}  {:>8}  {:<16}  {}",
            s.name,
            format!("{:.4}", s.lambda),
            s.exact_formula().unwrap_or("-"),
            s.description
        )?;
    }
    Ok(out)
}

pub fn cmd_list(registry: &ProblemRegistry) -> Outcome {
    match render_listing(registry) {
        Ok(text) => {
            print!("{text}");
            Outcome::Success
        }
        Err(e) => Outcome::Usage(e),
    }
}

fn prepare(
    args: &RunArgs,
    registry: &ProblemRegistry,
    env_out: Option<PathBuf>,
) -> Result<(RunConfig, ProblemSpec), Outcome> {
    let cfg = RunConfig::resolve(args, env_out)?;
    let spec = registry.get(&cfg.problem)?;
    Ok((cfg, spec))
}

fn failure_text(r: &SolveReport) -> String {
    match &r.failure {
        Some(f) => format!("{} ({})", f.reason, f.detail),
        None => "did not converge".into(),
    }
}

pub fn cmd_solve(args: &RunArgs, registry: &ProblemRegistry, env_out: Option<PathBuf>) -> Outcome {
    let (cfg, spec) = match prepare(args, registry, env_out) {
        Ok(v) => v,
        Err(o) => return o,
    };
    match run_solve(&cfg, &spec) {
        Ok(o) => o,
        Err(e) => Outcome::Usage(e),
    }
}

fn run_solve(cfg: &RunConfig, spec: &ProblemSpec) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let report = solve(spec, &cfg.solver_config(cfg.method())?)?;
    let seconds = start.elapsed().as_secs_f64();

    let samples = evaluate_solution(&report, spec, &uniform_points(cfg.plot_points))?;
    write_json(
        &cfg.output_dir.join("report.json"),
        &SolveReportJson::new(spec, cfg, &report, seconds),
    )?;
    write_atomic(&cfg.output_dir.join("solution.csv"), solution_csv(&samples).as_bytes())?;

    if report.converged {
        println!(
            "{}: {} converged in {} iterations, residual {:e}{}",
            spec.name,
            report.method,
            report.iterations,
            report.final_residual(),
            report
                .final_error()
                .map(|e| format!(", max nodal error {e:e}"))
                .unwrap_or_default()
        );
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Numerical(format!("{}: {}", spec.name, failure_text(&report))))
    }
}

fn summary(method: Method, r: &SolveReport) -> String {
    if r.converged {
        format!("{method}: converged in {} iterations", r.iterations)
    } else {
        format!(
            "{method}: failed after {} iterations: {}",
            r.iterations,
            failure_text(r)
        )
    }
}

pub fn cmd_compare(args: &RunArgs, registry: &ProblemRegistry, env_out: Option<PathBuf>) -> Outcome {
    let (cfg, spec) = match prepare(args, registry, env_out) {
        Ok(v) => v,
        Err(o) => return o,
    };
    match run_compare(&cfg, &spec) {
        Ok(o) => o,
        Err(e) => Outcome::Usage(e),
    }
}

fn run_compare(cfg: &RunConfig, spec: &ProblemSpec) -> anyhow::Result<Outcome> {
    let newton_cfg = cfg.solver_config(Method::NewtonType)?;
    let picard_cfg = cfg.solver_config(Method::Picard)?;
    let (newton, picard) = std::thread::scope(|s| {
        let n = s.spawn(|| solve(spec, &newton_cfg));
        let p = s.spawn(|| solve(spec, &picard_cfg));
        (
            n.join().expect("newton solve panicked"),
            p.join().expect("picard solve panicked"),
        )
    });
    let (newton, picard) = (newton?, picard?);

    write_atomic(
        &cfg.output_dir.join("compare.csv"),
        compare_csv(&newton, &picard).as_bytes(),
    )?;
    println!(
        "{}: {}; {}",
        spec.name,
        summary(Method::NewtonType, &newton),
        summary(Method::Picard, &picard)
    );
    if newton.converged && picard.converged {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Numerical("at least one method failed".into()))
    }
}

pub fn cmd_certify(
    args: &RunArgs,
    radius: f64,
    samples: usize,
    seed: u64,
    registry: &ProblemRegistry,
    env_out: Option<PathBuf>,
) -> Outcome {
    if samples < MIN_SAMPLES {
        return Outcome::Usage(anyhow::anyhow!("samples must be at least {MIN_SAMPLES}, got {samples}"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Outcome::Usage(anyhow::anyhow!("radius must be positive, got {radius}"));
    }
    let (cfg, spec) = match prepare(args, registry, env_out) {
        Ok(v) => v,
        Err(o) => return o,
    };
    match run_certify(&cfg, &spec, radius, samples, seed) {
        Ok(o) => o,
        Err(e) => Outcome::Usage(e),
    }
}

fn run_certify(cfg: &RunConfig, spec: &ProblemSpec, radius: f64, samples: usize, seed: u64) -> anyhow::Result<Outcome> {
    let report = solve(spec, &cfg.solver_config(cfg.method())?)?;
    if !report.converged {
        return Ok(Outcome::Numerical(format!(
            "{}: solve failed: {}",
            spec.name,
            failure_text(&report)
        )));
    }
    let c = match estimate_contraction(spec, &report.final_iterate, radius, samples, seed) {
        Ok(c) => c,
        Err(e) => return Ok(Outcome::Numerical(e.to_string())),
    };
    write_json(
        &cfg.output_dir.join("contraction.json"),
        &ContractionJson::new(spec, cfg, &c),
    )?;
    println!(
        "{}: radius {radius:e}, {} samples ({} excluded): sup_lipschitz {:.6}, sup_directional {:e}, bound {}",
        spec.name,
        c.samples,
        c.excluded,
        c.sup_lipschitz,
        c.sup_directional,
        if c.passed_half_bound { "passed" } else { "FAILED" }
    );
    if c.passed_half_bound {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Numerical(format!(
            "Lipschitz estimate {} exceeds 0.5 + {}",
            c.sup_lipschitz, c.slack
        )))
    }
}
