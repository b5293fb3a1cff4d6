use fredholm_core::analysis::fit_rate_errors;
use fredholm_core::{builtin, solve, solve_picard, SolverConfig};

// Error histories of the nodal iteration from u0 ≡ 1 with a 32-node rule,
// computed independently with numpy's `leggauss` and a direct array
// implementation of the update.
const EX1_ORACLE: [f64; 8] = [
    0.9999981283870053,
    0.04452956658216278,
    0.0033018270387363824,
    0.00031504823664907367,
    2.9993920449666867e-05,
    2.854705717925121e-06,
    2.716922486989404e-07,
    2.58578248812924e-08,
];
const EX2_ORACLE: [f64; 8] = [
    1.7145655737778598,
    1.4759054271382843,
    0.14919417028748638,
    0.015724083749974582,
    0.003374924159477377,
    0.0005525485908082217,
    9.435189508000263e-05,
    1.610441734589685e-05,
];

fn errors(name: &str, config: &SolverConfig) -> Vec<f64> {
    let spec = builtin(name).unwrap();
    solve(&spec, config).unwrap().error_history.unwrap()
}

#[test]
fn error_histories_match_oracle() {
    for (name, oracle) in [("paper-ex1", EX1_ORACLE), ("paper-ex2", EX2_ORACLE)] {
        let e = errors(name, &SolverConfig::default());
        for (n, (got, want)) in e.iter().zip(oracle).enumerate() {
            assert!(
                (got - want).abs() <= 1e-9 * want,
                "{name} error_history[{n}] = {got}, oracle {want}"
            );
        }
    }
}

#[test]
fn plotted_iterates_are_close() {
    let e1 = errors("paper-ex1", &SolverConfig::default());
    assert!(e1[3] <= 1e-2);
    let e2 = errors("paper-ex2", &SolverConfig::default());
    assert!(e2[7] <= 1e-2);
}

#[test]
fn geometric_decay_after_first_step() {
    for name in ["paper-ex1", "paper-ex2"] {
        let e = errors(name, &SolverConfig::default());
        for n in 1..e.len() - 1 {
            if e[n] <= 1e-13 {
                break;
            }
            assert!(e[n + 1] <= 0.5 * e[n] + 1e-13, "{name}: n={n} {e:?}");
        }
    }
}

#[test]
fn residual_bounds_error() {
    for name in ["paper-ex1", "paper-ex2", "mms-sin-square", "lambda-zero"] {
        let spec = builtin(name).unwrap();
        let cfg = SolverConfig::default();
        let r = solve(&spec, &cfg).unwrap();
        assert!(r.converged, "{name}");
        assert!(
            r.final_error().unwrap() <= 100.0 * cfg.tol_residual,
            "{name}: {:?}",
            r.final_error()
        );
    }
}

#[test]
fn runs_are_bit_identical() {
    for name in ["paper-ex1", "paper-ex2"] {
        let spec = builtin(name).unwrap();
        let a = solve(&spec, &SolverConfig::default()).unwrap();
        let b = solve(&spec, &SolverConfig::default()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.residual_history), bits(&b.residual_history));
        assert_eq!(bits(&a.step_history), bits(&b.step_history));
        assert_eq!(
            bits(a.error_history.as_ref().unwrap()),
            bits(b.error_history.as_ref().unwrap())
        );
        assert_eq!(a.final_iterate, b.final_iterate);
    }
}

#[test]
fn final_error_independent_of_node_count() {
    for name in ["paper-ex1", "paper-ex2"] {
        let finals: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let cfg = SolverConfig {
                    quad_order: n,
                    ..Default::default()
                };
                *errors(name, &cfg).last().unwrap()
            })
            .collect();
        let spread = finals.iter().cloned().fold(f64::MIN, f64::max) - finals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 1e-10, "{name}: {finals:?}");
    }
}

#[test]
fn newton_vs_picard_iteration_counts() {
    for name in ["paper-ex1", "paper-ex2"] {
        let spec = builtin(name).unwrap();
        let newton = solve(&spec, &SolverConfig::default()).unwrap();
        let picard = solve_picard(&spec, &SolverConfig::default()).unwrap();
        assert!(newton.converged && picard.converged);
        eprintln!(
            "{name}: newton {} iterations, picard {}",
            newton.iterations, picard.iterations
        );
        if name == "paper-ex1" {
            assert!(newton.iterations <= picard.iterations);
        }
    }
}

#[test]
fn rate_fit_below_half() {
    for name in ["paper-ex1", "paper-ex2"] {
        let fit = fit_rate_errors(&errors(name, &SolverConfig::default())).unwrap();
        assert!(fit.geometric_rate <= 0.5, "{name}: {fit:?}");
        // linear, not quadratic, convergence: the update ignores the integral coupling
        assert!((fit.order_estimate - 1.0).abs() < 0.3, "{name}: {fit:?}");
    }
}
