//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails. Run with
//! `cargo test -p fredholm-cli --test acceptance -- --nocapture`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use fredholm_core::operators::OperatorContext;
use fredholm_core::{
    builtin, gauss_legendre, solve, solve_picard, verify_exact, FailureReason, GridFunction, ProblemSpec, SolverConfig,
};

// error_history[3] (first example) and error_history[7] (second example)
// from an independent numpy implementation with a 32-node leggauss rule.
const EX1_U3_ORACLE: f64 = 3.1504823664907367e-4;
const EX2_U7_ORACLE: f64 = 1.610441734589685e-5;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run_cli(args: &[&str]) -> (Option<i32>, f64) {
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_fredholm"))
        .args(args)
        .env_remove("FREDHOLM_OUT")
        .output()
        .expect("binary runs");
    (o.status.code(), start.elapsed().as_secs_f64())
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn floats(v: &serde_json::Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn reproduce(name: &str, exact: fn(f64) -> f64, plotted: usize, oracle: f64) -> Check {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_cli(&["solve", "--problem", name, "--out", dir.path().to_str().unwrap()]);
    ensure(code == Some(0), format!("exit code {code:?}"))?;
    let report = read_json(&dir.path().join("report.json"));
    let nodes = floats(&report["final"]["nodes"]);
    let values = floats(&report["final"]["values"]);
    let err = nodes
        .iter()
        .zip(&values)
        .map(|(&t, v)| (v - exact(t)).abs())
        .fold(0.0, f64::max);
    let residual = *floats(&report["residual_history"]).last().unwrap();
    let iterations = report["iterations"].as_u64().unwrap();
    let seconds = report["wall_clock_seconds"].as_f64().unwrap();
    let errors = floats(&report["error_history"]);
    let plotted_err = errors[plotted];

    ensure(nodes.len() == 32, "default rule is not 32 nodes")?;
    ensure(err <= 1e-10, format!("nodal error {err:e} > 1e-10"))?;
    ensure(residual <= 1e-12, format!("residual {residual:e} > 1e-12"))?;
    ensure(iterations <= 50, format!("{iterations} iterations"))?;
    ensure(seconds < 1.0, format!("solve took {seconds} s"))?;
    ensure(
        plotted_err <= 1e-2,
        format!("error_history[{plotted}] = {plotted_err:e} > 1e-2"),
    )?;
    ensure(
        (plotted_err - oracle).abs() <= 1e-9 * oracle,
        format!("error_history[{plotted}] = {plotted_err:e}, oracle {oracle:e}"),
    )?;
    Ok(format!(
        "error {err:.2e}, residual {residual:.2e}, {iterations} iterations, {seconds:.4} s, u{plotted} error {plotted_err:.4e}"
    ))
}

fn criterion_1() -> Check {
    reproduce("paper-ex1", |x| x * x, 3, EX1_U3_ORACLE)
}

fn criterion_2() -> Check {
    reproduce("paper-ex2", f64::exp, 7, EX2_U7_ORACLE)
}

fn criterion_3() -> Check {
    let mut parts = Vec::new();
    for name in ["paper-ex1", "paper-ex2"] {
        let r = solve(&builtin(name).unwrap(), &SolverConfig::default()).map_err(|e| e.to_string())?;
        let e = r.error_history.unwrap();
        let first = e[1] / e[0];
        // the bound applies once the iterate is inside the contraction ball, n ≥ 1
        let mut worst: f64 = 0.0;
        for n in 1..e.len() - 1 {
            if e[n] <= 1e-13 {
                break;
            }
            let ratio = e[n + 1] / e[n];
            ensure(ratio <= 0.5, format!("{name}: ratio e[{}]/e[{n}] = {ratio}", n + 1))?;
            worst = worst.max(ratio);
        }
        parts.push(format!("{name} max ratio {worst:.4} (first step {first:.4})"));
    }
    Ok(parts.join("; "))
}

fn criterion_4() -> Check {
    let mut parts = Vec::new();
    for name in ["paper-ex1", "paper-ex2"] {
        let spec = builtin(name).unwrap();
        let ctx = OperatorContext::new(spec.clone(), gauss_legendre(32).unwrap());
        let p = GridFunction::from_fn(ctx.rule().clone(), spec.exact_fn().unwrap()).unwrap();
        let one = GridFunction::constant(ctx.rule().clone(), 1.0).unwrap();
        let mut worst: f64 = 0.0;
        for (&t, &pt) in ctx.rule().nodes().iter().zip(p.values()) {
            let h = ctx.eval_h(&p, &one, t).map_err(|e| e.to_string())?;
            worst = worst.max((h - pt).abs());
        }
        ensure(worst <= 1e-12, format!("{name}: |H1(p) - p| = {worst:e}"))?;
        parts.push(format!("{name} {worst:.1e}"));
    }
    Ok(parts.join("; "))
}

fn criterion_5() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _) = run_cli(&[
        "certify",
        "--problem",
        "paper-ex1",
        "--radius",
        "0.1",
        "--samples",
        "50",
        "--seed",
        "7",
        "--out",
        out,
    ]);
    ensure(code == Some(0), format!("certify exit code {code:?}"))?;
    let c = read_json(&dir.path().join("contraction.json"));
    let lip = c["sup_lipschitz"].as_f64().unwrap();
    ensure(lip <= 0.55, format!("sup_lipschitz {lip} > 0.55"))?;

    let (code, _) = run_cli(&[
        "certify",
        "--problem",
        "paper-ex1",
        "--radius",
        "1e-8",
        "--samples",
        "50",
        "--seed",
        "7",
        "--out",
        out,
    ]);
    ensure(code == Some(0), format!("certify (r = 1e-8) exit code {code:?}"))?;
    let c = read_json(&dir.path().join("contraction.json"));
    let dir_small = c["sup_directional"].as_f64().unwrap();
    ensure(
        dir_small <= 1e-3,
        format!("sup_directional {dir_small:e} > 1e-3 at r = 1e-8"),
    )?;
    Ok(format!(
        "sup_lipschitz {lip:.4} at r = 0.1; sup_directional {dir_small:.2e} at r = 1e-8"
    ))
}

fn criterion_6() -> Check {
    let spec = builtin("paper-ex1").unwrap();
    let ctx = OperatorContext::new(spec.clone(), gauss_legendre(32).unwrap());
    let p = GridFunction::from_fn(ctx.rule().clone(), spec.exact_fn().unwrap()).unwrap();
    let one = GridFunction::constant(ctx.rule().clone(), 1.0).unwrap();
    let closed = 1.0 + 1f64.sin() / 8.0;
    let xs = (0..=200)
        .map(|k| k as f64 / 200.0)
        .chain(ctx.rule().nodes().iter().copied());
    let mut worst_t: f64 = 0.0;
    for x in xs {
        let t = ctx.eval_t(&p, &one, x).map_err(|e| e.to_string())?;
        worst_t = worst_t.max((t - closed).abs());
    }
    ensure(worst_t <= 1e-12, format!("|T - (1 + sin(1)/8)| = {worst_t:e}"))?;

    let mut worst_v: f64 = 0.0;
    for name in ["paper-ex1", "paper-ex2"] {
        let spec = builtin(name).unwrap();
        for n in (24..=64).chain([96, 128, 256, 512]) {
            let r = verify_exact(&spec, &gauss_legendre(n).unwrap()).map_err(|e| e.to_string())?;
            ensure(r <= 1e-12, format!("{name}, n = {n}: verify_exact {r:e}"))?;
            worst_v = worst_v.max(r);
        }
    }
    Ok(format!("T error {worst_t:.1e}; worst verify_exact {worst_v:.1e}"))
}

fn criterion_7() -> Check {
    let spec = builtin("paper-ex1").unwrap();
    let cfg = SolverConfig {
        tol_residual: 1e-12,
        ..Default::default()
    };
    let newton = solve(&spec, &cfg).map_err(|e| e.to_string())?;
    let picard = solve_picard(&spec, &cfg).map_err(|e| e.to_string())?;
    ensure(newton.converged && picard.converged, "a method did not converge")?;
    ensure(
        newton.iterations <= picard.iterations,
        format!("newton {} > picard {}", newton.iterations, picard.iterations),
    )?;
    Ok(format!(
        "newton {} iterations, picard {}",
        newton.iterations, picard.iterations
    ))
}

fn criterion_8() -> Check {
    let custom = ProblemSpec::new("zero-lambda", 0.0, |x: f64| 1.0 + x.exp(), |x, t, h| (x * t * h).cos())
        .with_kernel_dh(|x, t, h| -(x * t) * (x * t * h).sin());
    for spec in [builtin("lambda-zero").unwrap(), custom] {
        for (label, r) in [
            ("newton", solve(&spec, &SolverConfig::default())),
            ("picard", solve_picard(&spec, &SolverConfig::default())),
        ] {
            let r = r.map_err(|e| e.to_string())?;
            ensure(
                r.converged && r.iterations == 1,
                format!(
                    "{} {label}: converged {} in {} iterations",
                    spec.name, r.converged, r.iterations
                ),
            )?;
        }
    }

    let spec = builtin("newton-breakdown").unwrap();
    let r = solve(&spec, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let reason = r.failure.as_ref().map(|f| f.reason);
    ensure(
        reason == Some(FailureReason::SmoothnessViolation),
        format!("failure {reason:?}"),
    )?;
    let finite = r.residual_history.iter().chain(&r.step_history).all(|v| v.is_finite())
        && r.error_history.iter().flatten().all(|v| v.is_finite())
        && r.final_iterate.values().iter().all(|v| v.is_finite());
    ensure(finite, "non-finite value in a failed report")?;
    Ok("lambda = 0 converges in 1 iteration; zero denominator reported as smoothness-violation".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 first worked example", criterion_1),
        ("2 second worked example", criterion_2),
        ("3 contraction ratio <= 1/2", criterion_3),
        ("4 fixed point H1(p) = p", criterion_4),
        ("5 contraction certification", criterion_5),
        ("6 quadrature closed forms", criterion_6),
        ("7 newton-type vs picard", criterion_7),
        ("8 robustness", criterion_8),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
