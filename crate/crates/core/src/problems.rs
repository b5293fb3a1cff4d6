//! Problem data for `h(x) = f(x) + λ ∫₀¹ G(x, t, h(t)) dt` and grid functions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, QuadratureRule};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type KernelFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Relative step of the central-difference fallback for `∂G/∂h`.
pub const FD_DERIVATIVE_STEP: f64 = 1e-6;

/// One nonlinear Fredholm equation of the second kind on `[0, 1]`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub lambda: f64,
    pub description: String,
    forcing: ScalarFn,
    kernel: KernelFn,
    kernel_dh: Option<KernelFn>,
    exact: Option<ScalarFn>,
    exact_formula: Option<String>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("lambda", &self.lambda)
            .field("analytic_kernel_dh", &self.kernel_dh.is_some())
            .field("exact", &self.exact_formula)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        lambda: f64,
        forcing: impl Fn(f64) -> f64 + Send + Sync + 'static,
        kernel: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            lambda,
            description: String::new(),
            forcing: Arc::new(forcing),
            kernel: Arc::new(kernel),
            kernel_dh: None,
            exact: None,
            exact_formula: None,
        }
    }

    pub fn with_kernel_dh(mut self, dh: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.kernel_dh = Some(Arc::new(dh));
        self
    }

    pub fn with_exact(mut self, exact: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    /// Human-readable formula of the exact solution, shown in listings.
    pub fn with_exact_formula(mut self, formula: impl Into<String>) -> Self {
        self.exact_formula = Some(formula.into());
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn forcing(&self, x: f64) -> f64 {
        (self.forcing)(x)
    }

    pub fn kernel(&self, x: f64, t: f64, h: f64) -> f64 {
        (self.kernel)(x, t, h)
    }

    /// `∂G/∂h`. Falls back to a central difference with step
    /// `1e-6·max(1, |h|)` when no analytic derivative was supplied.
    pub fn kernel_dh(&self, x: f64, t: f64, h: f64) -> f64 {
        match &self.kernel_dh {
            Some(dh) => dh(x, t, h),
            None => {
                let step = FD_DERIVATIVE_STEP * h.abs().max(1.0);
                (self.kernel(x, t, h + step) - self.kernel(x, t, h - step)) / (2.0 * step)
            }
        }
    }

    /// False when `kernel_dh` is the finite-difference fallback.
    pub fn has_analytic_kernel_dh(&self) -> bool {
        self.kernel_dh.is_some()
    }

    pub fn exact(&self, x: f64) -> Option<f64> {
        self.exact.as_ref().map(|p| p(x))
    }

    pub fn exact_fn(&self) -> Option<ScalarFn> {
        self.exact.clone()
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact_formula(&self) -> Option<&str> {
        self.exact_formula.as_deref()
    }
}

/// A function on `[0, 1]` stored by its values at the nodes of a rule.
///
/// A grid function sampled from a closure keeps that closure as its off-node
/// representation. Grid functions built from raw nodal values have none and
/// are extended off-node through the integral equation (see
/// [`crate::operators::OperatorContext::nystrom_eval`]).
#[derive(Clone)]
pub struct GridFunction {
    rule: Arc<QuadratureRule>,
    values: Vec<f64>,
    source: Option<ScalarFn>,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFunction")
            .field("order", &self.rule.order())
            .field("values", &self.values)
            .field("sampled", &self.source.is_some())
            .finish()
    }
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.rule.nodes() == other.rule.nodes() && self.values == other.values
    }
}

impl GridFunction {
    pub fn new(rule: Arc<QuadratureRule>, values: Vec<f64>) -> Result<Self> {
        if values.len() != rule.order() {
            return Err(Error::Dimension {
                expected: rule.order(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            rule,
            values,
            source: None,
        })
    }

    /// Samples `f` at the nodes and keeps it for off-node evaluation.
    pub fn from_fn(rule: Arc<QuadratureRule>, f: ScalarFn) -> Result<Self> {
        let values = rule.nodes().iter().map(|&t| f(t)).collect();
        let mut g = Self::new(rule, values)?;
        g.source = Some(f);
        Ok(g)
    }

    pub fn constant(rule: Arc<QuadratureRule>, c: f64) -> Result<Self> {
        Self::from_fn(rule, Arc::new(move |_| c))
    }

    /// A grid function on the same rule with new nodal values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.rule.clone(), values)
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> Option<&ScalarFn> {
        self.source.as_ref()
    }

    /// `sup_i |self_i - other_i|`.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `sup_i |self_i - f(t_i)|`.
    pub fn sup_distance_to(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.rule
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&t, v)| (v - f(t)).abs())
            .fold(0.0, f64::max)
    }
}

/// The first worked example: `λ = -1/4`, `G = t·sin h`, exact `p(x) = x²`.
pub fn sine_kernel_example() -> ProblemSpec {
    let c1 = 1f64.cos();
    ProblemSpec::new(
        "paper-ex1",
        -0.25,
        move |x| x * x - c1 / 8.0 + 1.0 / 8.0,
        |_x, t, h| t * h.sin(),
    )
    .with_kernel_dh(|_x, t, h| t * h.cos())
    .with_exact(|x| x * x)
    .with_exact_formula("x^2")
    .with_description(
        "u(x) = x^2 - cos(1)/8 + 1/8 - (1/4) int_0^1 t sin(u(t)) dt, encoded as lambda = -1/4 with G = t sin(h)",
    )
}

/// The second worked example: `λ = 1/2`, `G = x·eᵗ·sin h`, exact `p(x) = eˣ`.
pub fn exponential_kernel_example() -> ProblemSpec {
    let shift = (1f64.cos() - std::f64::consts::E.cos()) / 2.0;
    ProblemSpec::new(
        "paper-ex2",
        0.5,
        move |x| x.exp() - x * shift,
        |x, t, h| x * t.exp() * h.sin(),
    )
    .with_kernel_dh(|x, t, h| x * t.exp() * h.cos())
    .with_exact(f64::exp)
    .with_exact_formula("e^x")
    .with_description(
        "u(x) = e^x - x(cos(1) - cos(e))/2 + (1/2) int_0^1 x e^t sin(u(t)) dt, encoded as lambda = +1/2 with G = x e^t sin(h)",
    )
}

/// Builds a problem whose discrete solution on `rule` is exactly `p`.
///
/// The forcing is `f(x) = p(x) - λ·Σᵢ wᵢ G(x, tᵢ, p(tᵢ))`, so the quadrature
/// rule is baked into `f` and nodal iteration error is free of quadrature error.
pub fn manufactured(
    p: ScalarFn,
    kernel: KernelFn,
    kernel_dh: KernelFn,
    lambda: f64,
    rule: Arc<QuadratureRule>,
) -> Result<ProblemSpec> {
    if rule.order() < 16 {
        return Err(Error::Construction(format!(
            "manufactured problems need at least 16 nodes, got {}",
            rule.order()
        )));
    }
    let p_nodes: Vec<f64> = rule.nodes().iter().map(|&t| p(t)).collect();
    if p_nodes.iter().any(|v| !v.is_finite()) {
        return Err(Error::Construction("exact solution is not finite at a node".into()));
    }

    let integral = {
        let rule = rule.clone();
        let kernel = kernel.clone();
        move |x: f64| -> f64 {
            rule.nodes()
                .iter()
                .zip(rule.weights())
                .zip(&p_nodes)
                .map(|((&t, w), &pt)| w * kernel(x, t, pt))
                .sum()
        }
    };

    // probe the nodes and both endpoints
    for x in rule.nodes().iter().copied().chain([0.0, 1.0]) {
        let s = integral(x);
        if !s.is_finite() || !p(x).is_finite() {
            return Err(Error::Construction(format!("non-finite kernel evaluation at x = {x}")));
        }
    }

    let p_forcing = p.clone();
    Ok(ProblemSpec {
        name: "manufactured".into(),
        lambda,
        description: format!(
            "manufactured problem, lambda = {lambda}, forcing baked with a {}-node rule",
            rule.order()
        ),
        forcing: Arc::new(move |x| p_forcing(x) - lambda * integral(x)),
        kernel,
        kernel_dh: Some(kernel_dh),
        exact: Some(p),
        exact_formula: None,
    })
}

/// `sup_i |F(p)(tᵢ)|` for the exact solution `p`, with `F` discretized by `rule`.
pub fn verify_exact(spec: &ProblemSpec, rule: &QuadratureRule) -> Result<f64> {
    let p = spec
        .exact
        .as_ref()
        .ok_or_else(|| Error::MissingExact(spec.name.clone()))?;
    let p_nodes: Vec<f64> = rule.nodes().iter().map(|&t| p(t)).collect();
    let mut worst: f64 = 0.0;
    for (&x, &px) in rule.nodes().iter().zip(&p_nodes) {
        let integral: f64 = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .zip(&p_nodes)
            .map(|((&t, w), &pt)| w * spec.kernel(x, t, pt))
            .sum();
        let r = px - spec.forcing(x) - spec.lambda * integral;
        if !r.is_finite() {
            return Err(Error::Evaluation { what: "F(p)", x });
        }
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

type Builder = fn() -> Result<ProblemSpec>;

/// Named problem constructors available to the CLI and the demo.
#[derive(Clone, Default)]
pub struct ProblemRegistry {
    entries: Vec<(&'static str, Builder)>,
}

impl fmt::Debug for ProblemRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

impl ProblemRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The two worked examples plus manufactured test problems.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("paper-ex1", || Ok(sine_kernel_example()));
        r.register("paper-ex2", || Ok(exponential_kernel_example()));
        r.register("mms-sin-square", mms_sin_square);
        r.register("lambda-zero", lambda_zero);
        r.register("newton-breakdown", newton_breakdown);
        r
    }

    pub fn register(&mut self, name: &'static str, build: Builder) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, build));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn get(&self, name: &str) -> Result<ProblemSpec> {
        match self.entries.iter().find(|(n, _)| *n == name) {
            Some((_, build)) => build(),
            None => Err(Error::NotFound {
                name: name.to_string(),
                available: self.names().into_iter().map(String::from).collect(),
            }),
        }
    }

    pub fn specs(&self) -> Result<Vec<ProblemSpec>> {
        self.entries.iter().map(|(_, build)| build()).collect()
    }
}

/// Looks up a problem in the built-in registry.
pub fn builtin(name: &str) -> Result<ProblemSpec> {
    ProblemRegistry::builtin().get(name)
}

const MMS_ORDER: usize = 32;

fn mms_sin_square() -> Result<ProblemSpec> {
    let spec = manufactured(
        Arc::new(f64::sin),
        Arc::new(|_x, _t, h| h * h),
        Arc::new(|_x, _t, h| 2.0 * h),
        1.0 / 3.0,
        gauss_legendre(MMS_ORDER)?,
    )?;
    Ok(spec
        .with_name("mms-sin-square")
        .with_exact_formula("sin(x)")
        .with_description("manufactured: G = h^2, lambda = 1/3, forcing baked with the 32-node rule"))
}

fn lambda_zero() -> Result<ProblemSpec> {
    let spec = manufactured(
        Arc::new(|x: f64| (std::f64::consts::PI * x).sin()),
        Arc::new(|x, t, h| (x + t) * h.cos()),
        Arc::new(|x, t, h| -(x + t) * h.sin()),
        0.0,
        gauss_legendre(MMS_ORDER)?,
    )?;
    Ok(spec
        .with_name("lambda-zero")
        .with_exact_formula("sin(pi x)")
        .with_description("manufactured: lambda = 0, so the solution is the forcing itself"))
}

/// Constant solution `c = 1 - 1/√2` of `h = 1/4 + ∫ h²/2`; the Newton
/// denominator `1 - ∫ h` vanishes at the default start `u₀ ≡ 1`.
fn newton_breakdown() -> Result<ProblemSpec> {
    let c = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    let spec = manufactured(
        Arc::new(move |_| c),
        Arc::new(|_x, _t, h| 0.5 * h * h),
        Arc::new(|_x, _t, h| h),
        1.0,
        gauss_legendre(MMS_ORDER)?,
    )?;
    Ok(spec
        .with_name("newton-breakdown")
        .with_exact_formula("1 - 1/sqrt(2)")
        .with_description("manufactured: G = h^2/2, lambda = 1; the Newton denominator is zero at u0 = 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_check(spec: &ProblemSpec, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let x = rng.gen_range(0.0..=1.0);
            let t = rng.gen_range(0.0..=1.0);
            let h = rng.gen_range(-2.0..=3.0);
            let step = 1e-6;
            let fd = (spec.kernel(x, t, h + step) - spec.kernel(x, t, h - step)) / (2.0 * step);
            let an = spec.kernel_dh(x, t, h);
            assert!(
                (fd - an).abs() <= 1e-6 * an.abs() + 1e-8,
                "{}: fd {fd} vs analytic {an} at ({x}, {t}, {h})",
                spec.name
            );
        }
    }

    #[test]
    fn kernel_derivatives_match_finite_differences() {
        for spec in ProblemRegistry::builtin().specs().unwrap() {
            fd_check(&spec, 11);
        }
    }

    #[test]
    fn paper_examples() {
        let ex1 = builtin("paper-ex1").unwrap();
        assert_eq!(ex1.lambda, -0.25);
        assert_eq!(ex1.exact(0.5), Some(0.25));
        let ex2 = builtin("paper-ex2").unwrap();
        assert_eq!(ex2.lambda, 0.5);
        assert_eq!(ex2.exact(0.0), Some(1.0));
        assert_eq!(ex2.forcing(0.0), 1.0);
    }

    #[test]
    fn example_1_is_consistent_with_closed_form_integral() {
        // ∫₀¹ t·sin(t²) dt = (1 - cos 1)/2
        let ex1 = sine_kernel_example();
        let integral = (1.0 - 1f64.cos()) / 2.0;
        for x in [0.0, 0.25, 0.5, 0.9, 1.0] {
            assert_abs_diff_eq!(ex1.forcing(x) + ex1.lambda * integral, x * x, epsilon = 1e-15);
        }
    }

    #[test]
    fn example_2_is_consistent_with_closed_form_integral() {
        // ∫₀¹ eᵗ·sin(eᵗ) dt = cos(1) - cos(e)
        let ex2 = exponential_kernel_example();
        let integral = 1f64.cos() - std::f64::consts::E.cos();
        for x in [0.0, 0.25, 0.5, 0.9, 1.0] {
            assert_abs_diff_eq!(ex2.forcing(x) + ex2.lambda * x * integral, x.exp(), epsilon = 1e-14);
        }
    }

    #[test]
    fn unknown_name_lists_available() {
        let err = builtin("nope").unwrap_err();
        match &err {
            Error::NotFound { available, .. } => {
                assert!(available.iter().any(|n| n == "paper-ex1"));
                assert!(available.iter().any(|n| n == "paper-ex2"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("paper-ex2"));
    }

    #[test]
    fn verify_exact_paper_problems() {
        for name in ["paper-ex1", "paper-ex2"] {
            let spec = builtin(name).unwrap();
            let r = verify_exact(&spec, &gauss_legendre(32).unwrap()).unwrap();
            assert!(r <= 1e-13, "{name}: {r}");
            for n in 24..=64 {
                let r = verify_exact(&spec, &gauss_legendre(n).unwrap()).unwrap();
                assert!(r <= 1e-12, "{name}, n={n}: {r}");
            }
        }
    }

    #[test]
    fn verify_exact_non_increasing_in_order() {
        for name in ["paper-ex1", "paper-ex2"] {
            let spec = builtin(name).unwrap();
            let rs: Vec<f64> = [8, 16, 32, 64]
                .iter()
                .map(|&n| verify_exact(&spec, &gauss_legendre(n).unwrap()).unwrap())
                .collect();
            for w in rs.windows(2) {
                assert!(w[1] <= w[0] + 1e-15, "{name}: {rs:?}");
            }
        }
    }

    #[test]
    fn verify_exact_requires_exact() {
        let spec = ProblemSpec::new("bare", 0.1, |x| x, |_, _, h| h);
        assert_eq!(
            verify_exact(&spec, &gauss_legendre(8).unwrap()),
            Err(Error::MissingExact("bare".into()))
        );
    }

    #[test]
    fn manufactured_zero_solution() {
        let rule = gauss_legendre(16).unwrap();
        let spec = manufactured(
            Arc::new(|_| 0.0),
            Arc::new(|_, _, h| h),
            Arc::new(|_, _, _| 1.0),
            0.1,
            rule.clone(),
        )
        .unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(spec.forcing(x), 0.0);
            assert_eq!(spec.exact(x), Some(0.0));
        }
    }

    #[test]
    fn manufactured_linear() {
        let rule = gauss_legendre(16).unwrap();
        let spec = manufactured(
            Arc::new(|x| x),
            Arc::new(|x, _, h| x * h),
            Arc::new(|x, _, _| x),
            1.0,
            rule,
        )
        .unwrap();
        for x in [0.0, 0.2, 0.7, 1.0] {
            assert_abs_diff_eq!(spec.forcing(x), x / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn manufactured_sin_square_is_self_certifying() {
        let rule = gauss_legendre(32).unwrap();
        let spec = manufactured(
            Arc::new(f64::sin),
            Arc::new(|_, _, h| h * h),
            Arc::new(|_, _, h| 2.0 * h),
            1.0 / 3.0,
            rule.clone(),
        )
        .unwrap();
        assert!(verify_exact(&spec, &rule).unwrap() <= 1e-14);
        let sin2 = rule.integrate_fn(|t| t.sin().powi(2));
        assert_abs_diff_eq!(spec.forcing(0.4), 0.4f64.sin() - sin2 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn registered_manufactured_problems_verify() {
        let rule = gauss_legendre(MMS_ORDER).unwrap();
        for name in ["mms-sin-square", "lambda-zero", "newton-breakdown"] {
            let spec = builtin(name).unwrap();
            assert!(verify_exact(&spec, &rule).unwrap() <= 1e-14, "{name}");
        }
    }

    #[test]
    fn manufactured_rejects_small_rules_and_bad_kernels() {
        let small = gauss_legendre(8).unwrap();
        let k: KernelFn = Arc::new(|_, _, h| h);
        assert!(matches!(
            manufactured(Arc::new(|x| x), k.clone(), k.clone(), 1.0, small),
            Err(Error::Construction(_))
        ));
        let rule = gauss_legendre(16).unwrap();
        assert!(matches!(
            manufactured(Arc::new(|x| x), Arc::new(|_, _, h| 1.0 / (h - h)), k, 1.0, rule),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn finite_difference_fallback() {
        let spec = ProblemSpec::new("fd", 0.5, |x| x, |x, t, h| x * t * h.sin());
        assert!(!spec.has_analytic_kernel_dh());
        for (x, t, h) in [(0.3, 0.4, 1.2), (1.0, 0.9, -1.7), (0.5, 0.5, 250.0)] {
            let exact = x * t * f64::cos(h);
            assert!((spec.kernel_dh(x, t, h) - exact).abs() <= 1e-8, "h={h}");
        }
    }

    #[test]
    fn grid_function_invariants() {
        let rule = gauss_legendre(4).unwrap();
        assert!(matches!(
            GridFunction::new(rule.clone(), vec![0.0; 3]),
            Err(Error::Dimension { expected: 4, got: 3 })
        ));
        assert_eq!(
            GridFunction::new(rule.clone(), vec![0.0, f64::NAN, 0.0, 0.0]).unwrap_err(),
            Error::NonFinite(1)
        );
        let g = GridFunction::constant(rule.clone(), 2.0).unwrap();
        assert_eq!(g.values(), &[2.0; 4]);
        assert_eq!(g.source().unwrap()(0.123), 2.0);
        let h = g.with_values(vec![2.0, 2.5, 1.0, 2.0]).unwrap();
        assert!(h.source().is_none());
        assert_eq!(g.sup_distance(&h), 1.0);
        assert_eq!(g.sup_distance_to(|_| 2.0), 0.0);
    }

    #[test]
    fn empty_registry() {
        let r = ProblemRegistry::empty();
        assert!(r.names().is_empty());
        assert!(r.specs().unwrap().is_empty());
        assert!(matches!(r.get("paper-ex1"), Err(Error::NotFound { .. })));
    }
}
