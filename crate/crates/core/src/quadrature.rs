//! Gauss–Legendre rules on the unit interval.
//!
//! Every integral over `[0, 1]` in this crate is replaced by a weighted sum
//! over the nodes of one of these rules. Nodes are roots of the Legendre
//! polynomial `P_n`, located by Newton's method from an asymptotic initial
//! estimate and then mapped affinely from `[-1, 1]`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest supported node count.
pub const MAX_ORDER: usize = 512;

const ROOT_TOL: f64 = 1e-15;
const MAX_NEWTON_STEPS: usize = 100;

/// Nodes and positive weights of a quadrature rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of nodes.
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Weighted sum `Σ wᵢ·vᵢ` of values sampled at the nodes.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.order() {
            return Err(Error::Dimension {
                expected: self.order(),
                got: values.len(),
            });
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// Integrates a closure sampled at the nodes.
    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, w)| w * f(t)).sum()
    }

    /// Index of the node equal to `x` within `tol`, if any.
    pub fn node_index(&self, x: f64, tol: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|&t| t < x);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter(|&j| j < self.nodes.len())
            .find(|&j| (self.nodes[j] - x).abs() <= tol)
    }
}

/// Returns `P_n(x)` and `P_n'(x)` via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let k = k as f64;
        let p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
        p_prev = p;
        p = p_next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let n = n as f64;
    let dp = n * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Positive root `k` (1-based, descending) of `P_n` and its `[-1, 1]` weight.
fn legendre_root(n: usize, k: usize) -> (f64, f64) {
    let nf = n as f64;
    let theta = PI * (k as f64 - 0.25) / (nf + 0.5);
    let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
    for _ in 0..MAX_NEWTON_STEPS {
        let (p, dp) = legendre_with_derivative(n, x);
        let dx = p / dp;
        x -= dx;
        if dx.abs() <= ROOT_TOL {
            break;
        }
    }
    let (_, dp) = legendre_with_derivative(n, x);
    let w = 2.0 / ((1.0 - x * x) * dp * dp);
    (x, w)
}

fn build_rule(n: usize) -> QuadratureRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 1..=n.div_ceil(2) {
        let (mut x, w) = legendre_root(n, k);
        // middle root of an odd-order rule
        if 2 * k - 1 == n {
            x = 0.0;
        }
        let lo = k - 1;
        let hi = n - k;
        nodes[lo] = 0.5 - 0.5 * x;
        nodes[hi] = 0.5 + 0.5 * x;
        weights[lo] = 0.5 * w;
        weights[hi] = 0.5 * w;
    }
    QuadratureRule { nodes, weights }
}

fn cache() -> &'static Mutex<HashMap<usize, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The `n`-point Gauss–Legendre rule on `[0, 1]`, exact for polynomials of
/// degree `2n - 1`. Rules are built once and shared.
pub fn gauss_legendre(n: usize) -> Result<Arc<QuadratureRule>> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::InvalidOrder(n));
    }
    let mut cache = cache().lock().unwrap_or_else(|e| e.into_inner());
    Ok(cache.entry(n).or_insert_with(|| Arc::new(build_rule(n))).clone())
}

/// Free-function form of [`QuadratureRule::integrate`].
pub fn integrate(rule: &QuadratureRule, values: &[f64]) -> Result<f64> {
    rule.integrate(values)
}
