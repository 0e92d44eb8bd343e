//! Integrated multipoint kernels and the continuum fusion coefficients.
//!
//! Every entry of the kernel matrix depends on two points only and each point
//! occurs in exactly one factor of every pairing, so the integral of the
//! Pfaffian over a product domain equals the Pfaffian of the matrix of
//! integrated entries. Only double integrals are evaluated.

use super::kernels::{summed_kernel, KernelPoint};
use super::modes::ContinuumMode;
use super::pfaffian::pfaffian;
use super::poles::ContinuumInnerProducts;
use super::quadrature::{nodes_on, QuadratureConfig};
use crate::error::{domain, Error, Result};
use crate::fusion::{FusionKey, PeelOrder, RecursiveFusion};
use crate::par::Exec;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::Serialize;
use std::f64::consts::PI;

/// Distance of the nearest level from the cross-section.
pub const STANDARD_BASE: f64 = 0.25;

/// Spacing between consecutive levels.
pub const STANDARD_STEP: f64 = 0.25;

/// Longest tuple accepted by the quadrature.
pub const MAX_TUPLE: usize = 6;

/// Signed doubled indices placed in the top, the left leg and the right leg.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexTuple {
    pub top: Vec<i32>,
    pub left: Vec<i32>,
    pub right: Vec<i32>,
}

impl IndexTuple {
    pub fn new(top: &[i32], left: &[i32], right: &[i32]) -> Result<Self> {
        if top.iter().chain(left).chain(right).any(|k| k % 2 == 0) {
            return domain("tuple entries must be odd doubled indices");
        }
        Ok(Self { top: top.to_vec(), left: left.to_vec(), right: right.to_vec() })
    }

    /// Ascending `alpha` at the top and negated ascending leg sets.
    pub fn from_key(key: &FusionKey) -> Self {
        let neg = |v: &[i32]| v.iter().map(|k| -k).collect();
        Self {
            top: key.alpha.twice().to_vec(),
            left: neg(key.beta_left.twice()),
            right: neg(key.beta_right.twice()),
        }
    }

    pub fn len(&self) -> usize {
        self.top.len() + self.left.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn modes(&self) -> Vec<ContinuumMode> {
        let mut v = Vec::with_capacity(self.len());
        v.extend(self.top.iter().map(|&k| ContinuumMode::full(k).expect("odd index")));
        v.extend(self.left.iter().map(|&k| ContinuumMode::left(k).expect("odd index")));
        v.extend(self.right.iter().map(|&k| ContinuumMode::right(k).expect("odd index")));
        v
    }
}

/// Heights of the points: strictly decreasing at the top, strictly increasing in each leg.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Heights {
    pub top: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl Heights {
    /// Evenly spaced levels `base + (m - i) step` above the cross-section and mirrored below.
    pub fn spaced(t: &IndexTuple, base: f64, step: f64) -> Self {
        let up = |m: usize| (1..=m).map(|i| base + (m - i) as f64 * step).collect();
        let down = |m: usize| (1..=m).map(|i| -base - (m - i) as f64 * step).collect();
        Self { top: up(t.top.len()), left: down(t.left.len()), right: down(t.right.len()) }
    }

    /// Levels `0.25, 0.5, ...` away from the cross-section.
    pub fn standard(t: &IndexTuple) -> Self {
        Self::spaced(t, STANDARD_BASE, STANDARD_STEP)
    }

    /// All top heights moved by `dt`, all leg heights by `dl`.
    pub fn shifted(&self, dt: f64, dl: f64) -> Self {
        let mv = |v: &[f64], d: f64| v.iter().map(|y| y + d).collect();
        Self { top: mv(&self.top, dt), left: mv(&self.left, dl), right: mv(&self.right, dl) }
    }

    fn check(&self, t: &IndexTuple) -> Result<()> {
        if self.top.len() != t.top.len() || self.left.len() != t.left.len() || self.right.len() != t.right.len() {
            return domain("one height per tuple entry is required");
        }
        let ok_top = self.top.iter().all(|&y| y > 0.0) && self.top.windows(2).all(|w| w[0] > w[1]);
        let ok_leg = |v: &[f64]| v.iter().all(|&y| y < 0.0) && v.windows(2).all(|w| w[0] < w[1]);
        if !(ok_top && ok_leg(&self.left) && ok_leg(&self.right)) {
            return domain("heights violate the required ordering");
        }
        Ok(())
    }

    fn flat(&self) -> Vec<f64> {
        self.top.iter().chain(&self.left).chain(&self.right).copied().collect()
    }
}

/// Convergence record of a node-doubling run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureReport {
    pub nodes: usize,
    pub change: f64,
    pub imaginary: f64,
}

/// Value of an integrated kernel with its diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuumValue {
    pub value: f64,
    pub report: QuadratureReport,
}

fn prefactor(n: usize) -> C {
    C::new(0.0, -1.0 / (2.0 * PI.sqrt())).powi(n as i32)
}

fn interval(t: &IndexTuple, i: usize) -> (f64, f64) {
    if i < t.top.len() {
        (-0.5, 0.5)
    } else if i < t.top.len() + t.left.len() {
        (-0.5, 0.0)
    } else {
        (0.0, 0.5)
    }
}

/// Matrix of integrated summed kernels with `n` nodes per variable.
pub fn integrated_matrix(t: &IndexTuple, h: &Heights, n: usize, exec: Exec) -> Result<DMatrix<C>> {
    h.check(t)?;
    let modes = t.modes();
    let ys = h.flat();
    let m = modes.len();
    let points: Vec<Vec<(f64, KernelPoint)>> = (0..m)
        .map(|i| {
            let (a, b) = interval(t, i);
            nodes_on(n, a, b)
                .into_iter()
                .map(|(x, w)| Ok((w, KernelPoint::new(&modes[i], C::new(x, ys[i]))?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let vals = exec.map(&pairs, |&(i, j)| {
        let mut acc = 0.0;
        for (wi, pi) in &points[i] {
            let mut row = 0.0;
            for (wj, pj) in &points[j] {
                row += wj * summed_kernel(pi, pj);
            }
            acc += wi * row;
        }
        acc
    });
    let mut a = DMatrix::zeros(m, m);
    for (&(i, j), v) in pairs.iter().zip(vals) {
        if !v.is_finite() {
            return Err(Error::Numerical(format!("non-finite kernel integral at ({i}, {j})")));
        }
        a[(i, j)] = C::new(v, 0.0);
        a[(j, i)] = C::new(-v, 0.0);
    }
    Ok(a)
}

/// The integrated kernel at a fixed node count.
pub fn integrated_kernel_at(t: &IndexTuple, h: &Heights, n: usize, exec: Exec) -> Result<C> {
    Ok(prefactor(t.len()) * pfaffian(&integrated_matrix(t, h, n, exec)?)?)
}

/// The integrated kernel, doubling the nodes until two successive values agree to `cfg.tol`.
pub fn integrated_kernel(t: &IndexTuple, h: &Heights, cfg: &QuadratureConfig, exec: Exec) -> Result<ContinuumValue> {
    if t.len() > MAX_TUPLE {
        return domain(format!("tuple length {} above {MAX_TUPLE}", t.len()));
    }
    if t.is_empty() {
        return Ok(ContinuumValue { value: 1.0, report: QuadratureReport { nodes: 0, change: 0.0, imaginary: 0.0 } });
    }
    let mut prev: Option<C> = None;
    let mut last_change = f64::INFINITY;
    for n in cfg.schedule() {
        let v = integrated_kernel_at(t, h, n, exec)?;
        if let Some(p) = prev {
            last_change = (v - p).norm();
            if last_change < cfg.tol {
                let imaginary = v.im.abs();
                if imaginary > cfg.tol {
                    return Err(Error::Numerical(format!("imaginary part {imaginary:e} above tolerance")));
                }
                return Ok(ContinuumValue { value: v.re, report: QuadratureReport { nodes: n, change: last_change, imaginary } });
            }
        }
        prev = Some(v);
    }
    Err(Error::Convergence(format!(
        "kernel quadrature changed by {last_change:e} at {} nodes",
        cfg.max_nodes
    )))
}

/// Continuum fusion coefficient by quadrature of the multipoint kernel.
pub fn continuum_fusion(key: &FusionKey, cfg: &QuadratureConfig, exec: Exec) -> Result<ContinuumValue> {
    let t = IndexTuple::from_key(key);
    let v = integrated_kernel(&t, &Heights::standard(&t), cfg, exec)?;
    Ok(ContinuumValue { value: v.value * key_sign(key), report: v.report })
}

/// `(-1)^{n(n-1)/2}` with `n` the number of leg indices: reverses the leg block.
pub fn key_sign(key: &FusionKey) -> f64 {
    let n = key.beta_left.len() + key.beta_right.len();
    if (n * n.saturating_sub(1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Continuum recursion over pole-function inner products.
pub type ContinuumRecursion = RecursiveFusion<ContinuumInnerProducts>;

/// Recursion with inner products covering every index of `keys`.
pub fn continuum_recursion(keys: &[FusionKey], order: PeelOrder) -> Result<ContinuumRecursion> {
    let max = keys
        .iter()
        .flat_map(|k| k.alpha.twice().iter().chain(k.beta_left.twice()).chain(k.beta_right.twice()).copied())
        .max()
        .unwrap_or(1);
    Ok(RecursiveFusion::with_order(ContinuumInnerProducts::new(max)?, order))
}
