//! Continuum pole functions and their inner products with the Fourier modes.
//!
//! Each pole function is `i R(phi) sqrt(phi')` with `R` real on the real line: a
//! polynomial of degree `k - 1/2` for the top, and a polynomial in `(phi +- 1/2)^{-1}`
//! without constant term and of degree `k + 1/2` for a leg. The real coefficients are
//! fixed by the targeted singular projections.

use super::conformal::{conformal_eval, ConformalEval};
use super::kernels::Coefficient;
use super::modes::{ContinuumMode, ModeFamily};
use super::quadrature::tip_nodes;
use crate::discrete_cx::Extremity;
use crate::error::{domain, Error, Result};
use crate::fusion::PoleInnerProducts;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use serde::Serialize;

/// Default node count per half cross-section.
pub const DEFAULT_NODES: usize = 64;

/// Largest accepted residual of a coefficient solve.
pub const SOLVE_TOL: f64 = 1e-8;

fn family(e: Extremity) -> ModeFamily {
    match e {
        Extremity::Top => ModeFamily::Full,
        Extremity::Left => ModeFamily::LeftLeg,
        Extremity::Right => ModeFamily::RightLeg,
    }
}

/// Mode of extremity `e`.
pub fn extremity_mode(e: Extremity, k2: i32) -> Result<ContinuumMode> {
    ContinuumMode::new(family(e), k2)
}

/// Index `k2` of the singular mode of extremity `e` with `|k| = k2 / 2`.
fn singular_index(e: Extremity, k2: i32) -> i32 {
    if e == Extremity::Top {
        k2
    } else {
        -k2
    }
}

/// `P^e_k` in closed form.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuumPole {
    pub extremity: Extremity,
    pub k2: i32,
    pub coeffs: Vec<f64>,
    pub residual: f64,
}

fn basis(e: Extremity, j: usize, map: &ConformalEval) -> C {
    let base = match e {
        Extremity::Top => map.phi.powi(j as i32),
        Extremity::Left => map.offset(-0.5).powi(-(j as i32 + 1)),
        Extremity::Right => map.offset(0.5).powi(-(j as i32 + 1)),
    };
    C::new(0.0, 1.0) * base * map.sqrt_dphi
}

fn basis_size(k2: i32) -> usize {
    (k2 as usize).div_ceil(2)
}

impl ContinuumPole {
    pub fn at(&self, map: &ConformalEval) -> C {
        self.coeffs.iter().enumerate().map(|(j, &c)| c * basis(self.extremity, j, map)).sum()
    }
}

impl Coefficient for ContinuumPole {
    fn value(&self, z: C) -> C {
        match conformal_eval(z) {
            Ok(m) => self.at(&m),
            Err(_) => C::new(f64::NAN, f64::NAN),
        }
    }
}

/// Cross-section nodes with the map evaluated once.
#[derive(Clone, Debug)]
struct CrossSection {
    left: Vec<(f64, f64, ConformalEval)>,
    right: Vec<(f64, f64, ConformalEval)>,
}

impl CrossSection {
    fn new(n: usize) -> Result<Self> {
        let half = |s: f64| -> Result<Vec<(f64, f64, ConformalEval)>> {
            tip_nodes(n, s).into_iter().map(|(x, w)| Ok((x, w, conformal_eval(C::new(x, 0.0))?))).collect()
        };
        Ok(Self { left: half(-1.0)?, right: half(1.0)? })
    }

    /// `<mode, F>` for `F` given through the map.
    fn inner<F: Fn(&ConformalEval) -> C>(&self, mode: &ContinuumMode, f: F) -> f64 {
        let halves: &[&Vec<(f64, f64, ConformalEval)>] = match mode.family {
            ModeFamily::Full => &[&self.left, &self.right],
            ModeFamily::LeftLeg => &[&self.left],
            ModeFamily::RightLeg => &[&self.right],
        };
        halves
            .iter()
            .flat_map(|h| h.iter())
            .map(|(x, w, m)| w * (mode.restriction(*x) * f(m).conj()).re)
            .sum()
    }
}

/// Pole functions of all three extremities up to a largest index, with their inner products.
#[derive(Clone, Debug)]
pub struct ContinuumInnerProducts {
    pub max_k2: i32,
    pub nodes: usize,
    poles: [Vec<ContinuumPole>; 3],
    section: CrossSection,
}

fn slot(e: Extremity) -> usize {
    match e {
        Extremity::Top => 0,
        Extremity::Left => 1,
        Extremity::Right => 2,
    }
}

impl ContinuumInnerProducts {
    pub fn new(max_k2: i32) -> Result<Self> {
        Self::with_nodes(max_k2, DEFAULT_NODES)
    }

    pub fn with_nodes(max_k2: i32, nodes: usize) -> Result<Self> {
        if max_k2 < 1 || max_k2 % 2 == 0 {
            return domain(format!("largest index {max_k2}/2 is not a positive half-integer"));
        }
        let section = CrossSection::new(nodes)?;
        let mut poles: [Vec<ContinuumPole>; 3] = Default::default();
        for e in [Extremity::Top, Extremity::Left, Extremity::Right] {
            for k2 in (1..=max_k2).step_by(2) {
                poles[slot(e)].push(solve_pole(&section, e, k2)?);
            }
        }
        Ok(Self { max_k2, nodes, poles, section })
    }

    pub fn pole(&self, e: Extremity, k2: i32) -> Result<&ContinuumPole> {
        if k2 < 1 || k2 % 2 == 0 || k2 > self.max_k2 {
            return domain(format!("pole index {k2}/2 outside 1/2..{}/2", self.max_k2));
        }
        Ok(&self.poles[slot(e)][(k2 as usize - 1) / 2])
    }

    /// `<e^a_{k'}, P^b_k>` for any signed `k'`.
    pub fn inner(&self, a: Extremity, k2p: i32, b: Extremity, k2: i32) -> Result<f64> {
        let mode = extremity_mode(a, k2p)?;
        let p = self.pole(b, k2)?;
        Ok(self.section.inner(&mode, |m| p.at(m)))
    }

    /// Largest residual among the coefficient solves.
    pub fn residual(&self) -> f64 {
        self.poles.iter().flatten().map(|p| p.residual).fold(0.0, f64::max)
    }
}

fn solve_pole(section: &CrossSection, e: Extremity, k2: i32) -> Result<ContinuumPole> {
    let n = basis_size(k2);
    let targets: Vec<ContinuumMode> = (0..n)
        .map(|r| extremity_mode(e, singular_index(e, 2 * r as i32 + 1)))
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(n, n, |r, j| section.inner(&targets[r], |map| basis(e, j, map)));
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let x = m.clone().lu().solve(&rhs).ok_or_else(|| Error::Numerical(format!("singular pole system for {e:?} {k2}/2")))?;
    let residual = (&m * &x - &rhs).amax();
    if !(residual <= SOLVE_TOL) {
        return Err(Error::Numerical(format!("pole solve residual {residual:e} for {e:?} {k2}/2")));
    }
    Ok(ContinuumPole { extremity: e, k2, coeffs: x.iter().copied().collect(), residual })
}

impl PoleInnerProducts for ContinuumInnerProducts {
    fn bound(&self, _e: Extremity) -> Option<usize> {
        None
    }

    fn ip(&self, a: Extremity, k2p: i32, b: Extremity, k2: i32) -> Result<f64> {
        self.inner(a, k2p, b, k2)
    }
}
