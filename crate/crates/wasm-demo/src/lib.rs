//! Browser bindings for the solver demo page in `www/`.
//!
//! Each exported function takes plain numbers and strings and returns a JSON
//! document, so the page needs no generated TypeScript types.

use fredholm_core::analysis::estimate_contraction;
use fredholm_core::operators::OperatorContext;
use fredholm_core::solver::uniform_points;
use fredholm_core::{builtin, solve, GridFunction, InitialGuess, Method, ProblemRegistry, ProblemSpec, SolverConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct ProblemInfo {
    pub name: String,
    pub lambda: f64,
    pub exact: Option<String>,
    pub description: String,
}

#[derive(Debug, Serialize)]
pub struct SolveView {
    pub problem: String,
    pub method: String,
    pub converged: bool,
    pub iterations: usize,
    pub failure: Option<String>,
    pub xs: Vec<f64>,
    pub exact: Option<Vec<f64>>,
    /// Every iterate `u_0 … u_N` sampled at `xs`; off-node values of
    /// computed iterates use the Nyström extension.
    pub iterates: Vec<Vec<f64>>,
    pub residual_history: Vec<f64>,
    pub error_history: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct CompareView {
    pub problem: String,
    pub newton: MethodHistory,
    pub picard: MethodHistory,
}

#[derive(Debug, Serialize)]
pub struct MethodHistory {
    pub converged: bool,
    pub iterations: usize,
    pub failure: Option<String>,
    pub residual_history: Vec<f64>,
    pub error_history: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub radius: f64,
    pub sup_lipschitz: f64,
    pub sup_directional: f64,
    pub excluded: usize,
}

#[derive(Debug, Serialize)]
pub struct CertifyView {
    pub problem: String,
    pub samples: usize,
    pub seed: u64,
    pub points: Vec<SweepPoint>,
}

type DemoResult<T> = Result<T, String>;

fn config(method: Method, quad_order: usize, initial: f64, max_iter: usize, keep_iterates: bool) -> SolverConfig {
    SolverConfig {
        quad_order,
        max_iter,
        initial: InitialGuess::Constant(initial),
        method,
        keep_iterates,
        ..Default::default()
    }
}

fn sample(ctx: &OperatorContext, g: &GridFunction, xs: &[f64]) -> DemoResult<Vec<f64>> {
    xs.iter()
        .map(|&x| ctx.value_at(g, x).map_err(|e| e.to_string()))
        .collect()
}

pub fn list_problems() -> DemoResult<Vec<ProblemInfo>> {
    let specs = ProblemRegistry::builtin().specs().map_err(|e| e.to_string())?;
    Ok(specs
        .into_iter()
        .map(|s: ProblemSpec| ProblemInfo {
            exact: s.exact_formula().map(String::from),
            name: s.name,
            lambda: s.lambda,
            description: s.description,
        })
        .collect())
}

/// Solves one problem and samples every iterate on a uniform grid.
pub fn solve_view(
    problem: &str,
    method: &str,
    quad_order: usize,
    initial: f64,
    max_iter: usize,
    plot_points: usize,
) -> DemoResult<SolveView> {
    let spec = builtin(problem).map_err(|e| e.to_string())?;
    let method: Method = method.parse().map_err(|e: fredholm_core::Error| e.to_string())?;
    let report = solve(&spec, &config(method, quad_order, initial, max_iter, true)).map_err(|e| e.to_string())?;
    let ctx = OperatorContext::new(spec.clone(), report.final_iterate.rule().clone());
    let xs = uniform_points(plot_points.max(2));
    let iterates = report
        .iterate_history
        .as_deref()
        .unwrap_or_default()
        .iter()
        .map(|g| sample(&ctx, g, &xs))
        .collect::<DemoResult<Vec<_>>>()?;
    let exact = spec.exact_fn().map(|p| xs.iter().map(|&x| p(x)).collect());
    Ok(SolveView {
        problem: spec.name.clone(),
        method: method.as_str().into(),
        converged: report.converged,
        iterations: report.iterations,
        failure: report.failure.map(|f| format!("{}: {}", f.reason, f.detail)),
        xs,
        exact,
        iterates,
        residual_history: report.residual_history,
        error_history: report.error_history,
    })
}

pub fn compare_view(problem: &str, quad_order: usize, initial: f64, max_iter: usize) -> DemoResult<CompareView> {
    let spec = builtin(problem).map_err(|e| e.to_string())?;
    let run = |method| -> DemoResult<MethodHistory> {
        let r = solve(&spec, &config(method, quad_order, initial, max_iter, false)).map_err(|e| e.to_string())?;
        Ok(MethodHistory {
            converged: r.converged,
            iterations: r.iterations,
            failure: r.failure.map(|f| format!("{}: {}", f.reason, f.detail)),
            residual_history: r.residual_history,
            error_history: r.error_history,
        })
    };
    Ok(CompareView {
        problem: spec.name.clone(),
        newton: run(Method::NewtonType)?,
        picard: run(Method::Picard)?,
    })
}

/// Contraction estimates over `steps` log-spaced radii in `[min_radius, max_radius]`.
pub fn certify_view(
    problem: &str,
    min_radius: f64,
    max_radius: f64,
    steps: usize,
    samples: usize,
    seed: u64,
) -> DemoResult<CertifyView> {
    if !(min_radius > 0.0 && max_radius >= min_radius) || steps == 0 {
        return Err(format!(
            "invalid radius range [{min_radius}, {max_radius}] with {steps} steps"
        ));
    }
    let spec = builtin(problem).map_err(|e| e.to_string())?;
    let report = solve(&spec, &SolverConfig::default()).map_err(|e| e.to_string())?;
    if !report.converged {
        return Err(format!("{problem} did not converge; nothing to certify"));
    }
    let (lo, hi) = (min_radius.ln(), max_radius.ln());
    let points = (0..steps)
        .map(|k| {
            let s = if steps == 1 { 1.0 } else { k as f64 / (steps - 1) as f64 };
            let radius = (lo + s * (hi - lo)).exp();
            let c =
                estimate_contraction(&spec, &report.final_iterate, radius, samples, seed).map_err(|e| e.to_string())?;
            Ok(SweepPoint {
                radius,
                sup_lipschitz: c.sup_lipschitz,
                sup_directional: c.sup_directional,
                excluded: c.excluded,
            })
        })
        .collect::<DemoResult<Vec<_>>>()?;
    Ok(CertifyView {
        problem: spec.name.clone(),
        samples,
        seed,
        points,
    })
}

fn to_js<T: Serialize>(v: DemoResult<T>) -> Result<String, JsValue> {
    let v = v.map_err(|e| JsValue::from_str(&e))?;
    serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = listProblems)]
pub fn list_problems_js() -> Result<String, JsValue> {
    to_js(list_problems())
}

#[wasm_bindgen(js_name = solveProblem)]
pub fn solve_problem_js(
    problem: &str,
    method: &str,
    quad_order: usize,
    initial: f64,
    max_iter: usize,
    plot_points: usize,
) -> Result<String, JsValue> {
    to_js(solve_view(problem, method, quad_order, initial, max_iter, plot_points))
}

#[wasm_bindgen(js_name = compareMethods)]
pub fn compare_methods_js(problem: &str, quad_order: usize, initial: f64, max_iter: usize) -> Result<String, JsValue> {
    to_js(compare_view(problem, quad_order, initial, max_iter))
}

#[wasm_bindgen(js_name = certifySweep)]
pub fn certify_sweep_js(
    problem: &str,
    min_radius: f64,
    max_radius: f64,
    steps: usize,
    samples: usize,
    seed: u32,
) -> Result<String, JsValue> {
    to_js(certify_view(
        problem,
        min_radius,
        max_radius,
        steps,
        samples,
        u64::from(seed),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_builtin_problems() {
        let p = list_problems().unwrap();
        assert!(p
            .iter()
            .any(|i| i.name == "paper-ex1" && i.exact.as_deref() == Some("x^2")));
    }

    #[test]
    fn solve_samples_every_iterate() {
        let v = solve_view("paper-ex1", "newton_type", 32, 1.0, 50, 21).unwrap();
        assert!(v.converged);
        assert_eq!(v.iterates.len(), v.iterations + 1);
        assert_eq!(v.xs.len(), 21);
        let last = v.iterates.last().unwrap();
        let exact = v.exact.as_ref().unwrap();
        for (a, b) in last.iter().zip(exact) {
            assert!((a - b).abs() <= 1e-9);
        }
        assert!(v.iterates[0].iter().all(|&u| u == 1.0));
    }

    #[test]
    fn solve_reports_failures_and_bad_input() {
        let v = solve_view("newton-breakdown", "newton_type", 32, 1.0, 50, 11).unwrap();
        assert!(!v.converged);
        assert!(v.failure.unwrap().starts_with("smoothness-violation"));
        assert!(solve_view("nope", "newton_type", 32, 1.0, 50, 11).is_err());
        assert!(solve_view("paper-ex1", "secant", 32, 1.0, 50, 11).is_err());
        assert!(solve_view("paper-ex1", "picard", 0, 1.0, 50, 11).is_err());
    }

    #[test]
    fn compare_runs_both() {
        let v = compare_view("paper-ex2", 32, 1.0, 50).unwrap();
        assert!(v.newton.converged && v.picard.converged);
        assert_eq!(v.newton.residual_history.len(), v.newton.iterations + 1);
    }

    #[test]
    fn certify_sweep_grows_with_radius() {
        let v = certify_view("paper-ex1", 1e-6, 0.1, 4, 10, 7).unwrap();
        assert_eq!(v.points.len(), 4);
        assert!((v.points[0].radius - 1e-6).abs() < 1e-18);
        assert!((v.points[3].radius - 0.1).abs() < 1e-12);
        assert!(v.points.iter().all(|p| p.sup_lipschitz <= 0.5));
        assert!(v.points[0].sup_directional <= v.points[3].sup_directional);
        assert!(certify_view("paper-ex1", 0.0, 0.1, 4, 10, 7).is_err());
        assert!(certify_view("paper-ex1", 1e-3, 0.1, 4, 5, 7).is_err());
    }

    #[test]
    fn json_shape() {
        let s = to_js(solve_view("lambda-zero", "picard", 32, 1.0, 5, 3)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["iterations"], 1);
        assert_eq!(v["xs"].as_array().unwrap().len(), 3);
    }
}
