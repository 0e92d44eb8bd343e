//! Gauss-Legendre rules, cached per node count, and the cross-section integrals
//! built on them.

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64 as C;
use serde::Serialize;
use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

/// Node-doubling schedule and acceptance tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub start_nodes: usize,
    pub max_nodes: usize,
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { start_nodes: 16, max_nodes: 128, tol: 1e-8 }
    }
}

impl QuadratureConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    /// Node counts `start, 2 start, ...` up to the cap.
    pub fn schedule(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut n = self.start_nodes.max(1);
        while n <= self.max_nodes {
            out.push(n);
            n *= 2;
        }
        out
    }
}

/// Nodes and weights on `[-1, 1]`, computed once per node count.
pub fn rule(n: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache");
    map.entry(n)
        .or_insert_with(|| {
            let n = NonZeroUsize::new(n).expect("positive node count");
            Arc::new(GaussLegendre::new(n).as_node_weight_pairs().to_vec())
        })
        .clone()
}

/// Nodes and weights mapped to `[a, b]`.
pub fn nodes_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (h, m) = (0.5 * (b - a), 0.5 * (b + a));
    rule(n).iter().map(|&(x, w)| (m + h * x, h * w)).collect()
}

/// Nodes on the half `[0, s/2]` (`s = +1`) or `[s/2, 0]` (`s = -1`) through `x = s u^4 / 2`,
/// which removes a `|x|^{-1/4}` singularity at the origin.
pub fn tip_nodes(n: usize, s: f64) -> Vec<(f64, f64)> {
    nodes_on(n, 0.0, 1.0).into_iter().map(|(u, w)| (0.5 * s * u.powi(4), w * 2.0 * u.powi(3))).collect()
}

/// Nodes on the whole cross-section, split at the origin.
pub fn cross_section_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut v = tip_nodes(n, -1.0);
    v.extend(tip_nodes(n, 1.0));
    v
}

/// Weighted sum over nodes.
pub fn sum<F: Fn(f64) -> C>(nodes: &[(f64, f64)], f: F) -> C {
    nodes.iter().fold(C::new(0.0, 0.0), |acc, &(x, w)| acc + w * f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = sum(&nodes_on(8, -0.5, 0.5), |x| C::new(x * x, 0.0));
        assert!((v.re - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn tip_substitution_handles_quarter_power() {
        let v = sum(&tip_nodes(16, 1.0), |x| C::new(x.powf(-0.25), 0.0));
        let want = 0.5f64.powf(0.75) / 0.75;
        assert!((v.re - want).abs() < 1e-13);
        let v = sum(&cross_section_nodes(16), |x| C::new(x.abs().powf(-0.25), 0.0));
        assert!((v.re - 2.0 * want).abs() < 1e-13);
    }

    #[test]
    fn schedule_doubles() {
        assert_eq!(QuadratureConfig::default().schedule(), vec![16, 32, 64, 128]);
    }
}
