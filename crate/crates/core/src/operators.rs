//! The residual operator `F`, its directional derivative `T_{F,u}` and the
//! update operator `H_u`, evaluated on grid functions.
//!
//! With a rule `(tᵢ, wᵢ)`:
//!
//! ```text
//! F(h)(x)      = h(x) - f(x) - λ Σᵢ wᵢ G(x, tᵢ, h(tᵢ))
//! T_{F,u}(h)(x) = u(x) - λ Σᵢ wᵢ ∂G/∂h(x, tᵢ, h(tᵢ)) u(tᵢ)
//! H_u(h)(x)    = h(x) - F(h)(x) / T_{F,u}(h)(x)
//! ```
//!
//! Off-node values of a grid function come from its sampling closure when it
//! has one, and from the Nyström extension otherwise.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problems::{GridFunction, ProblemSpec};
use crate::quadrature::QuadratureRule;

pub const DEFAULT_DENOM_GUARD: f64 = 1e-10;

/// Distance below which `x` is treated as a quadrature node.
pub const NODE_TOL: f64 = 1e-14;

/// A problem paired with its discretization.
#[derive(Debug, Clone)]
pub struct OperatorContext {
    spec: ProblemSpec,
    rule: Arc<QuadratureRule>,
    denom_guard: f64,
}

/// Residual and Newton denominator at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalTerms {
    pub residual: f64,
    pub denominator: f64,
}

impl OperatorContext {
    pub fn new(spec: ProblemSpec, rule: Arc<QuadratureRule>) -> Self {
        Self {
            spec,
            rule,
            denom_guard: DEFAULT_DENOM_GUARD,
        }
    }

    pub fn with_denom_guard(mut self, guard: f64) -> Result<Self> {
        if !(guard > 0.0 && guard.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "denominator guard must be positive, got {guard}"
            )));
        }
        self.denom_guard = guard;
        Ok(self)
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    pub fn denom_guard(&self) -> f64 {
        self.denom_guard
    }

    fn check_grid(&self, g: &GridFunction) -> Result<()> {
        if g.values().len() != self.rule.order() {
            return Err(Error::Dimension {
                expected: self.rule.order(),
                got: g.values().len(),
            });
        }
        Ok(())
    }

    fn check_x(x: f64) -> Result<()> {
        if (0.0..=1.0).contains(&x) {
            Ok(())
        } else {
            Err(Error::Domain(x))
        }
    }

    /// `Σᵢ wᵢ G(x, tᵢ, h(tᵢ))`
    fn integral_term(&self, h: &GridFunction, x: f64) -> Result<f64> {
        let s: f64 = self
            .rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(h.values())
            .map(|((&t, w), &ht)| w * self.spec.kernel(x, t, ht))
            .sum();
        if s.is_finite() {
            Ok(s)
        } else {
            Err(Error::Evaluation { what: "kernel", x })
        }
    }

    /// `Σᵢ wᵢ ∂G/∂h(x, tᵢ, h(tᵢ)) u(tᵢ)`; `u = None` means `u ≡ 1`.
    fn derivative_term(&self, h: &GridFunction, u: Option<&GridFunction>, x: f64) -> Result<f64> {
        let nodes = self.rule.nodes().iter().zip(self.rule.weights()).zip(h.values());
        let s: f64 = match u {
            Some(u) => nodes
                .zip(u.values())
                .map(|(((&t, w), &ht), &ut)| w * self.spec.kernel_dh(x, t, ht) * ut)
                .sum(),
            None => nodes.map(|((&t, w), &ht)| w * self.spec.kernel_dh(x, t, ht)).sum(),
        };
        if s.is_finite() {
            Ok(s)
        } else {
            Err(Error::Evaluation {
                what: "kernel derivative",
                x,
            })
        }
    }

    /// Natural Nyström extension: the nodal value at a node, otherwise
    /// `f(x) + λ Σᵢ wᵢ G(x, tᵢ, h(tᵢ))`.
    pub fn nystrom_eval(&self, h: &GridFunction, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        self.check_grid(h)?;
        if let Some(i) = self.rule.node_index(x, NODE_TOL) {
            return Ok(h.values()[i]);
        }
        let v = self.spec.forcing(x) + self.spec.lambda * self.integral_term(h, x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                what: "Nyström extension",
                x,
            })
        }
    }

    /// `g(x)`: nodal value, sampling closure, or Nyström extension.
    pub fn value_at(&self, g: &GridFunction, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        self.check_grid(g)?;
        if let Some(i) = self.rule.node_index(x, NODE_TOL) {
            return Ok(g.values()[i]);
        }
        match g.source() {
            Some(f) => Ok(f(x)),
            None => self.nystrom_eval(g, x),
        }
    }

    pub fn eval_f(&self, h: &GridFunction, x: f64) -> Result<f64> {
        let hx = self.value_at(h, x)?;
        let v = hx - self.spec.forcing(x) - self.spec.lambda * self.integral_term(h, x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { what: "F", x })
        }
    }

    pub fn eval_t(&self, h: &GridFunction, u: &GridFunction, x: f64) -> Result<f64> {
        self.check_grid(u)?;
        let ux = self.value_at(u, x)?;
        Ok(ux - self.spec.lambda * self.derivative_term(h, Some(u), x)?)
    }

    /// `H_u(h)(x)`; fails with a smoothness violation when `|T_{F,u}(h)(x)|`
    /// is below the guard.
    pub fn eval_h(&self, h: &GridFunction, u: &GridFunction, x: f64) -> Result<f64> {
        let denominator = self.eval_t(h, u, x)?;
        if denominator.abs() < self.denom_guard {
            return Err(Error::SmoothnessViolation { x, denominator });
        }
        Ok(self.value_at(h, x)? - self.eval_f(h, x)? / denominator)
    }

    /// `F(h)(tᵢ)` and `T_{F,1}(h)(tᵢ)` at node `i`.
    pub fn nodal_terms(&self, h: &GridFunction, i: usize) -> Result<NodalTerms> {
        self.check_grid(h)?;
        let x = self.rule.nodes()[i];
        let residual = h.values()[i] - self.spec.forcing(x) - self.spec.lambda * self.integral_term(h, x)?;
        let denominator = 1.0 - self.spec.lambda * self.derivative_term(h, None, x)?;
        if !residual.is_finite() {
            return Err(Error::Evaluation { what: "F", x });
        }
        Ok(NodalTerms { residual, denominator })
    }

    /// `F(h)` at every node.
    pub fn nodal_residuals(&self, h: &GridFunction) -> Result<Vec<f64>> {
        self.check_grid(h)?;
        self.rule
            .nodes()
            .iter()
            .zip(h.values())
            .map(|(&x, &hx)| {
                let r = hx - self.spec.forcing(x) - self.spec.lambda * self.integral_term(h, x)?;
                if r.is_finite() {
                    Ok(r)
                } else {
                    Err(Error::Evaluation { what: "F", x })
                }
            })
            .collect()
    }

    /// `sup_i |F(h)(tᵢ)|`.
    pub fn sup_residual(&self, h: &GridFunction) -> Result<f64> {
        Ok(self.nodal_residuals(h)?.iter().fold(0.0, |m, r| m.max(r.abs())))
    }

    /// `H₁(h)` at every node.
    ///
    /// Uses the rearrangement `H₁(h)(x) = (f(x) + λ(I(x) - h(x)·D(x))) / T(x)`
    /// with `I = Σ wG`, `D = Σ w∂G/∂h`, `T = 1 - λD`. Algebraically equal to
    /// `h - F/T`; returns `f` exactly when `λ = 0`.
    pub fn h1_nodal(&self, h: &GridFunction) -> Result<Vec<f64>> {
        self.check_grid(h)?;
        self.rule
            .nodes()
            .iter()
            .zip(h.values())
            .map(|(&x, &hx)| {
                let i = self.integral_term(h, x)?;
                let d = self.derivative_term(h, None, x)?;
                let t = 1.0 - self.spec.lambda * d;
                if t.abs() < self.denom_guard {
                    return Err(Error::SmoothnessViolation { x, denominator: t });
                }
                let v = (self.spec.forcing(x) + self.spec.lambda * (i - hx * d)) / t;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Evaluation { what: "H", x })
                }
            })
            .collect()
    }
}

pub fn eval_f(ctx: &OperatorContext, h: &GridFunction, x: f64) -> Result<f64> {
    ctx.eval_f(h, x)
}

pub fn eval_t(ctx: &OperatorContext, h: &GridFunction, u: &GridFunction, x: f64) -> Result<f64> {
    ctx.eval_t(h, u, x)
}

pub fn eval_h(ctx: &OperatorContext, h: &GridFunction, u: &GridFunction, x: f64) -> Result<f64> {
    ctx.eval_h(h, u, x)
}

pub fn nystrom_eval(ctx: &OperatorContext, h: &GridFunction, x: f64) -> Result<f64> {
    ctx.nystrom_eval(h, x)
}
