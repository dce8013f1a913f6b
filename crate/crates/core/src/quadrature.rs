//! Gauss–Legendre rules on the reference interval `[0, 1]`.

use crate::error::{Error, Result};

/// Default node count per unit piece of integration.
pub const DEFAULT_POINTS_PER_PIECE: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Gauss–Legendre rule with `points` nodes, mapped to `[0, 1]`.
    ///
    /// Exact for polynomials of degree `2·points − 1`.
    pub fn gauss_legendre(points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::InvalidParameter(
                "quadrature needs at least one node".into(),
            ));
        }
        let (nodes, weights) = legendre_nodes_weights(points);
        // [-1, 1] → [0, 1]
        let nodes: Vec<f64> = nodes.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let weights: Vec<f64> = weights.iter().map(|w| 0.5 * w).collect();
        Ok(Self { nodes, weights })
    }

    pub fn points_per_piece(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes on `[0, 1]`, strictly increasing.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights summing to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_lo^hi g`.
    pub fn integrate(&self, lo: f64, hi: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        let width = hi - lo;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * g(lo + width * t))
            .sum::<f64>()
            * width
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::gauss_legendre(DEFAULT_POINTS_PER_PIECE).expect("positive node count")
    }
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
        p_prev = p;
        p = next;
    }
    let n = n as f64;
    let dp = n * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Nodes (ascending) and weights on `[-1, 1]`, by Newton iteration from
/// Chebyshev-like initial guesses.
fn legendre_nodes_weights(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
