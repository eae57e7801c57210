//! Gauss-Legendre quadrature on the base interval [0, pi/2r].

use crate::error::{Result, VdError};
use crate::params::Params;
use serde::Serialize;

/// Nodes and weights of an n-point rule on (0, pi/2r).
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Interval upper end pi/2r.
    pub length: f64,
}

/// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1], by Newton
/// iteration on the Legendre recurrence.
pub fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_eval(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, x);
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre polynomial P_n and its derivative at x.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre nodes/weights mapped to [0, pi/2r].
pub fn gauss_rule(params: &Params, n_nodes: usize) -> Result<QuadratureRule> {
    if n_nodes < 8 {
        return Err(VdError::Domain(format!(
            "need at least 8 quadrature nodes, got {n_nodes}"
        )));
    }
    let length = params.half_period();
    let (xs, ws) = legendre_nodes(n_nodes);
    let nodes = xs.iter().map(|x| 0.5 * length * (x + 1.0)).collect();
    let weights = ws.iter().map(|w| 0.5 * length * w).collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        length,
    })
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature sum of sample values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// L2 norm of complex grid samples.
    pub fn norm_complex(&self, values: &[num_complex::Complex64]) -> f64 {
        self.weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Hermitian inner product of complex grid samples.
    pub fn inner_complex(
        &self,
        a: &[num_complex::Complex64],
        b: &[num_complex::Complex64],
    ) -> num_complex::Complex64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| *w * x.conj() * y)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let p = Params::new(1.0, 0.7, 1.1).unwrap();
        for n in [8, 33, 200] {
            let rule = gauss_rule(&p, n).unwrap();
            let total: f64 = rule.weights.iter().sum();
            assert!((total - p.half_period()).abs() < 1e-12);
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(rule.nodes[0] > 0.0 && rule.nodes[n - 1] < p.half_period());
        }
    }

    #[test]
    fn cosine_integrates_to_zero() {
        let p = Params::new(1.0, 0.7, 1.1).unwrap();
        let rule = gauss_rule(&p, 40).unwrap();
        let vals: Vec<f64> = rule.nodes.iter().map(|&x| (2.0 * x).cos()).collect();
        assert!(rule.integrate(&vals).abs() < 1e-14);
    }

    #[test]
    fn exact_for_low_degree_polynomials() {
        let p = Params::new(1.0, 0.7, 1.1).unwrap();
        let n = 12;
        let rule = gauss_rule(&p, n).unwrap();
        let deg = (2 * n - 1) as i32;
        let vals: Vec<f64> = rule.nodes.iter().map(|&x| x.powi(deg)).collect();
        let want = p.half_period().powi(deg + 1) / (deg + 1) as f64;
        let got = rule.integrate(&vals);
        assert!((got - want).abs() < 1e-13 * want.abs());
    }
}
