//! Matrix-free transfer matrices, Perron-Frobenius data and finite-height observables.

use crate::error::{domain, Error, Result};
use crate::par::Exec;
use crate::statespace::{RowSpace, Sector, StateVector, BETA};
use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Strip,
    Slit,
}

/// `T_hor^{1/2} T_ver T_hor^{1/2}`, applied site by site.
#[derive(Clone, Debug)]
pub struct TransferOperator {
    pub space: RowSpace,
    pub variant: Variant,
    pub exec: Exec,
    hsqrt: Vec<f64>,
    /// Bits mixed by the vertical factor; the others are pinned.
    free_bits: Vec<usize>,
    /// Number of pinned sites, including an implicit site `b`.
    pinned: usize,
}

impl TransferOperator {
    pub fn new(space: RowSpace, variant: Variant) -> Self {
        Self::with_exec(space, variant, Exec::default())
    }

    pub fn with_exec(space: RowSpace, variant: Variant, exec: Exec) -> Self {
        let l = space.width();
        let slit = space.geom.width_left();
        let pinned_site = |s: usize| s == 0 || s == l || (variant == Variant::Slit && s == slit);
        let free_bits: Vec<usize> = (0..space.bits()).filter(|&s| !pinned_site(s)).collect();
        let pinned = (0..=l).filter(|&s| pinned_site(s)).count();
        Self { hsqrt: space.hor_sqrt(), space, variant, exec, free_bits, pinned }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    fn check(&self, v: &[Complex64]) -> Result<()> {
        if v.len() != self.dim() {
            return domain(format!("vector of length {} on a space of dimension {}", v.len(), self.dim()));
        }
        Ok(())
    }

    fn vertical(&self, v: &mut [Complex64], same: f64, diff: f64, pinned: f64) {
        for &s in &self.free_bits {
            self.exec.pairs(v, s, |x, y| {
                let (p, q) = (*x, *y);
                *x = p * same + q * diff;
                *y = p * diff + q * same;
            });
        }
        self.exec.scale_by(v, pinned.powi(self.pinned as i32));
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<StateVector> {
        self.check(v)?;
        let mut w = v.to_vec();
        self.apply_in_place(&mut w);
        Ok(w)
    }

    pub fn apply_in_place(&self, w: &mut [Complex64]) {
        self.exec.scale(w, &self.hsqrt);
        self.vertical(w, BETA.exp(), (-BETA).exp(), BETA.exp());
        self.exec.scale(w, &self.hsqrt);
    }

    /// Exact inverse, using the inverse of each 2x2 vertical factor.
    pub fn apply_inverse(&self, v: &[Complex64]) -> Result<StateVector> {
        self.check(v)?;
        let inv_h: Vec<f64> = self.hsqrt.iter().map(|c| 1.0 / c).collect();
        let det = (2.0 * BETA).exp() - (-2.0 * BETA).exp();
        let mut w = v.to_vec();
        self.exec.scale(&mut w, &inv_h);
        self.vertical(&mut w, BETA.exp() / det, -(-BETA).exp() / det, (-BETA).exp());
        self.exec.scale(&mut w, &inv_h);
        Ok(w)
    }

    /// Dense matrix, column by column; only for small widths.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut e = self.space.basis(c);
            self.apply_in_place(&mut e);
            for r in 0..n {
                m[(r, c)] = e[r];
            }
        }
        m
    }

    /// Matrix entry from the product formula, independent of the site-by-site route.
    pub fn entry(&self, tau: usize, rho: usize) -> f64 {
        let sp = &self.space;
        let l = sp.width();
        let slit = sp.geom.width_left();
        let mut ver = 1.0;
        for s in 0..=l {
            let (t, r) = (sp.spin(tau, s), sp.spin(rho, s));
            let pinned = s == 0 || s == l || (self.variant == Variant::Slit && s == slit);
            if pinned && t != r {
                return 0.0;
            }
            ver *= (BETA * (t * r) as f64).exp();
        }
        self.hsqrt[tau] * ver * self.hsqrt[rho]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PfOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub estimate_gap: bool,
}

impl Default for PfOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 100_000, estimate_gap: true }
    }
}

#[derive(Clone, Debug)]
pub struct PerronData {
    pub sector: Sector,
    pub eigenvalue: f64,
    pub vector: StateVector,
    /// `log(mu / mu_2)` within the sector, when requested.
    pub log_gap: Option<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn normalize(exec: Exec, v: &mut [Complex64]) -> f64 {
    let n = exec.norm(v);
    exec.scale_by(v, 1.0 / n);
    n
}

fn residual(exec: Exec, tv: &[Complex64], v: &[Complex64], mu: f64) -> f64 {
    exec.sum_range(v.len(), |i| (tv[i] - v[i] * mu).norm_sqr()).sqrt()
}

/// Power iteration from the uniform vector on the sector.
pub fn perron_frobenius(op: &TransferOperator, sector: Sector, opts: PfOptions) -> Result<PerronData> {
    if !(opts.tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let sp = &op.space;
    let exec = op.exec;
    let mut v: StateVector =
        (0..sp.dim()).map(|r| if sp.in_sector(r, &sector) { Complex64::new(1.0, 0.0) } else { ZERO }).collect();
    if v.iter().all(|x| *x == ZERO) {
        return domain("empty sector");
    }
    normalize(exec, &mut v);
    let mut mu_prev = f64::NAN;
    let res_tol = (10.0 * opts.tol).max(1e-13);
    for it in 1..=opts.max_iter {
        let mut w = v.clone();
        op.apply_in_place(&mut w);
        let mu = exec.dot(&v, &w).re;
        let res = residual(exec, &w, &v, mu);
        if (mu - mu_prev).abs() < opts.tol * mu && res <= res_tol * mu {
            let log_gap = if opts.estimate_gap { Some(deflated_gap(op, &sector, &v, mu, opts)?) } else { None };
            normalize(exec, &mut w);
            for x in w.iter_mut() {
                *x = Complex64::new(x.re, 0.0);
            }
            normalize(exec, &mut w);
            return Ok(PerronData { sector, eigenvalue: mu, vector: w, log_gap, iterations: it, residual: res / mu });
        }
        mu_prev = mu;
        normalize(exec, &mut w);
        v = w;
    }
    Err(Error::Convergence(format!("power iteration stalled after {} steps", opts.max_iter)))
}

/// Second eigenvalue within the sector by iteration orthogonal to the Perron vector.
fn deflated_gap(op: &TransferOperator, sector: &Sector, pf: &[Complex64], mu: f64, opts: PfOptions) -> Result<f64> {
    let sp = &op.space;
    let exec = op.exec;
    let mut u: StateVector = (0..sp.dim())
        .map(|r| if sp.in_sector(r, sector) { Complex64::new(((r as f64) * 0.618_034 + 0.1).sin(), 0.0) } else { ZERO })
        .collect();
    let orth = |u: &mut StateVector| {
        let c = exec.dot(pf, u);
        for (x, p) in u.iter_mut().zip(pf) {
            *x -= c * p;
        }
    };
    orth(&mut u);
    if exec.norm(&u) < 1e-300 {
        return Ok(f64::INFINITY);
    }
    normalize(exec, &mut u);
    let mut prev = f64::NAN;
    let tol = opts.tol.max(1e-10);
    for _ in 0..opts.max_iter.min(20_000) {
        let mut w = u.clone();
        op.apply_in_place(&mut w);
        orth(&mut w);
        let mu2 = exec.dot(&u, &w).re.abs();
        if exec.norm(&w) < 1e-300 * mu {
            return Ok(f64::INFINITY);
        }
        normalize(exec, &mut w);
        u = w;
        if (mu2 - prev).abs() < tol * mu {
            return Ok((mu / mu2).ln());
        }
        prev = mu2;
    }
    Ok((mu / prev).ln())
}

/// Insertion point for a spin operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpinInsertion {
    pub x: i32,
    pub y: i32,
}

#[derive(Clone, Debug)]
pub struct ObservableSpec {
    pub h_top: usize,
    pub h_bottom: usize,
    /// Spin insertions sorted by non-decreasing height.
    pub spins: Vec<SpinInsertion>,
}

#[derive(Clone, Debug)]
pub struct TruncatedValues {
    pub partition: f64,
    pub spin_correlation: f64,
}

/// Largest total height accepted by [`truncated_observables`].
pub const MAX_HEIGHT: usize = 64;

/// Propagates `bottom` upwards through the truncated domain, inserting spins.
///
/// Steps starting below height 0 use `lower`, the others `upper`; both must act on
/// the same full state space.
pub fn propagate(
    upper: &TransferOperator,
    lower: &TransferOperator,
    h_top: usize,
    h_bottom: usize,
    spins: &[SpinInsertion],
    bottom: &[Complex64],
) -> Result<StateVector> {
    if h_top + h_bottom > MAX_HEIGHT {
        return domain(format!("total height {} above cap {}", h_top + h_bottom, MAX_HEIGHT));
    }
    if spins.windows(2).any(|w| w[0].y > w[1].y) {
        return domain("spin insertions must be ordered by height");
    }
    let sp = upper.space;
    let (ymin, ymax) = (-(h_bottom as i32), h_top as i32);
    for s in spins {
        if s.y < ymin || s.y > ymax || s.x < sp.geom.a || s.x > sp.geom.b {
            return domain(format!("insertion ({}, {}) outside the truncated domain", s.x, s.y));
        }
    }
    let mut v = bottom.to_vec();
    let mut next = 0;
    let mut y = ymin;
    loop {
        while next < spins.len() && spins[next].y == y {
            let x = spins[next].x;
            for (r, amp) in v.iter_mut().enumerate() {
                *amp *= sp.spin_at(r, x) as f64;
            }
            next += 1;
        }
        if y == ymax {
            break;
        }
        if y < 0 {
            lower.apply_in_place(&mut v);
        } else {
            upper.apply_in_place(&mut v);
        }
        y += 1;
    }
    Ok(v)
}

/// Partition function and spin correlation of a truncated strip or slit-strip.
pub fn truncated_observables(space: RowSpace, slit: bool, spec: &ObservableSpec, exec: Exec) -> Result<TruncatedValues> {
    let upper = TransferOperator::with_exec(space, Variant::Strip, exec);
    let lower = TransferOperator::with_exec(space, if slit { Variant::Slit } else { Variant::Strip }, exec);
    let one = space.lift(|_| Complex64::new(1.0, 0.0));
    let z = exec.dot(&one, &propagate(&upper, &lower, spec.h_top, spec.h_bottom, &[], &one)?).re;
    let c = exec.dot(&one, &propagate(&upper, &lower, spec.h_top, spec.h_bottom, &spec.spins, &one)?).re;
    Ok(TruncatedValues { partition: z, spin_correlation: c / z })
}

/// `top^dagger T^{h_top} (T_lower)^{h_bottom} bottom`.
pub fn boundary_amplitude(
    upper: &TransferOperator,
    lower: &TransferOperator,
    h_top: usize,
    h_bottom: usize,
    top: &[Complex64],
    bottom: &[Complex64],
) -> Result<Complex64> {
    let v = propagate(upper, lower, h_top, h_bottom, &[], bottom)?;
    Ok(upper.exec.dot(top, &v))
}
