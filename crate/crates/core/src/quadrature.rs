//! Fixed tensor-product quadrature on truncated intervals.
//!
//! Integrals run over `[x0 - W, x0 + W]` with `W = half_width * sigma + eps/2`,
//! split into equal panels each carrying a 16-point Gauss-Legendre rule.
//! Doubling the node count doubles the number of panels, which is how the
//! convergence gate in [`crate::fisher`] checks results.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes per Gauss-Legendre panel.
pub const PANEL_ORDER: usize = 16;

/// Integration settings for Fisher-information quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Truncation half-width in units of sigma, measured from the outer source.
    pub half_width: f64,
    pub nodes_1d: usize,
    /// Nodes per axis of the 2D tensor-product rule.
    pub nodes_2d: usize,
    /// Integrand points whose density falls below this value are skipped.
    pub floor: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { half_width: 10.0, nodes_1d: 256, nodes_2d: 128, floor: 1e-30 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width.is_finite() && self.half_width >= 8.0) {
            return Err(Error::invalid(format!("quadrature half_width must be >= 8 sigma, got {}", self.half_width)));
        }
        if self.nodes_1d < 64 || self.nodes_2d < 64 {
            return Err(Error::invalid(format!(
                "quadrature needs at least 64 nodes per axis, got nodes_1d={} nodes_2d={}",
                self.nodes_1d, self.nodes_2d
            )));
        }
        if !(self.floor > 0.0 && self.floor <= 1e-12) {
            return Err(Error::invalid(format!("quadrature floor must lie in (0, 1e-12], got {}", self.floor)));
        }
        Ok(())
    }

    pub(crate) fn doubled(&self) -> Self {
        QuadratureSpec { nodes_1d: 2 * self.nodes_1d, nodes_2d: 2 * self.nodes_2d, ..*self }
    }
}

/// A 1D rule: `sum_i w_i f(x_i)` approximates the integral.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Tensor product of a rule with itself.
#[derive(Debug, Clone)]
pub struct Rule2d {
    pub axis: Rule,
}

impl Rule2d {
    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let ax = &self.axis;
        let mut total = 0.0;
        for (&a, &wa) in ax.nodes.iter().zip(&ax.weights) {
            let row: f64 = ax.nodes.iter().zip(&ax.weights).map(|(&b, &wb)| wb * f(a, b)).sum();
            total += wa * row;
        }
        total
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, via Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule with at least `nodes` points on `[a, b]`.
pub fn composite_gauss_legendre(a: f64, b: f64, nodes: usize) -> Rule {
    let panels = nodes.div_ceil(PANEL_ORDER).max(1);
    let base = gauss_legendre(PANEL_ORDER);
    let h = (b - a) / panels as f64;
    let mut rule = Rule { nodes: Vec::with_capacity(panels * PANEL_ORDER), weights: Vec::with_capacity(panels * PANEL_ORDER) };
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (&t, &w) in base.nodes.iter().zip(&base.weights) {
            rule.nodes.push(mid + 0.5 * h * t);
            rule.weights.push(0.5 * h * w);
        }
    }
    rule
}

pub fn composite_gauss_legendre_2d(a: f64, b: f64, nodes_per_axis: usize) -> Rule2d {
    Rule2d { axis: composite_gauss_legendre(a, b, nodes_per_axis) }
}

/// Trapezoid rule with `n >= 2` equally spaced points including endpoints.
pub fn trapezoid(a: f64, b: f64, n: usize) -> Rule {
    assert!(n >= 2);
    let h = (b - a) / (n - 1) as f64;
    let nodes = (0..n).map(|i| a + i as f64 * h).collect();
    let mut weights = vec![h; n];
    weights[0] = 0.5 * h;
    weights[n - 1] = 0.5 * h;
    Rule { nodes, weights }
}
