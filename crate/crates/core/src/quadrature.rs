//! Gauss-Legendre quadrature and orthonormal Legendre polynomials on [-1, 1].
//!
//! The polynomials are normalised so that the integral of `p_l(mu)^2` over
//! [-1, 1] equals one, i.e. `p_0 = 1/sqrt(2)`. They satisfy the three-term
//! recurrence `mu p_l = a_{l-1} p_{l-1} + a_l p_{l+1}` with
//! `a_l = (l+1) / sqrt((2l+1)(2l+3))`, which is also how they are evaluated.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Nodes and weights of a Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSet {
    /// Nodes in strictly ascending order.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureSet {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Applies the rule to `f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&mu, &w)| w * f(mu))
            .sum()
    }
}

/// Recurrence coefficient `a_l = (l+1) / sqrt((2l+1)(2l+3))`.
pub fn recurrence_coeff(l: usize) -> f64 {
    let l = l as f64;
    (l + 1.0) / ((2.0 * l + 1.0) * (2.0 * l + 3.0)).sqrt()
}

/// Orthonormal Legendre polynomial `p_l(mu)`.
pub fn eval_legendre_orthonormal(l: usize, mu: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&mu) {
        return Err(Error::InvalidArgument(format!(
            "Legendre argument {mu} outside [-1, 1]"
        )));
    }
    Ok(*legendre_orthonormal_upto(l, mu).last().unwrap())
}

/// Values `p_0(mu), ..., p_degree(mu)` by the normalised recurrence.
/// No range check on `mu`.
pub(crate) fn legendre_orthonormal_upto(degree: usize, mu: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(degree + 1);
    p.push(FRAC_1_SQRT_2);
    if degree == 0 {
        return p;
    }
    p.push(mu * FRAC_1_SQRT_2 / recurrence_coeff(0));
    for l in 1..degree {
        let next = (mu * p[l] - recurrence_coeff(l - 1) * p[l - 1]) / recurrence_coeff(l);
        p.push(next);
    }
    p
}

/// Classical Legendre `P_n(x)` and its derivative.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
        p_prev = p;
        p = p_next;
    }
    let n = n as f64;
    let dp = n * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Gauss-Legendre rule with `order` nodes.
///
/// Roots of `P_order` are found by Newton iteration started from the
/// Tricomi asymptotic approximation. Only the positive half is computed;
/// the negative half is mirrored, so the rule is exactly symmetric.
pub fn gauss_legendre(order: usize) -> Result<QuadratureSet> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "quadrature order must be at least 1".into(),
        ));
    }
    let n = order;
    let nf = n as f64;
    let half = n / 2;
    // positive roots, descending
    let mut pos = Vec::with_capacity(half);
    for i in 1..=half {
        let theta = PI * (4.0 * i as f64 - 1.0) / (4.0 * nf + 2.0);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        pos.push((x, w));
    }

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(x, w) in &pos {
        nodes.push(-x);
        weights.push(w);
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes.push(0.0);
        weights.push(2.0 / (d * d));
    }
    for &(x, w) in pos.iter().rev() {
        nodes.push(x);
        weights.push(w);
    }
    Ok(QuadratureSet { nodes, weights })
}
