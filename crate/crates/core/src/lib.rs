//! Pointwise Newton-type iteration for nonlinear Fredholm integral equations
//! of the second kind,
//!
//! ```text
//! h(x) = f(x) + λ ∫₀¹ G(x, t, h(t)) dt,
//! ```
//!
//! discretized with Gauss–Legendre quadrature (Nyström). The iteration
//!
//! ```text
//! u_{n+1}(x) = u_n(x) - F(u_n)(x) / T_{F,1}(u_n)(x)
//! ```
//!
//! divides the residual `F` by the scalar directional derivative of `F` in
//! the constant direction `1` at every node.

pub mod analysis;
pub mod error;
pub mod operators;
pub mod problems;
pub mod quadrature;
pub mod solver;

pub use analysis::{estimate_contraction, fit_rate, ContractionReport, RateFit};
pub use error::{Error, Result};
pub use operators::OperatorContext;
pub use problems::{builtin, manufactured, verify_exact, GridFunction, ProblemRegistry, ProblemSpec};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use solver::{
    evaluate_solution, solve, solve_picard, Failure, FailureReason, InitialGuess, Method, SolveReport, SolverConfig,
};
