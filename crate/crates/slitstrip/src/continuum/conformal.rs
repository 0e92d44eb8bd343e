//! The conformal map `phi(z) = sqrt(1 - e^{-2 pi i z}) / 2` from the slit-strip
//! onto the upper half-plane, its derivative and a continuous square root of
//! the derivative.

use crate::error::{domain, Error, Result};
use num_complex::Complex64 as C;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Points closer than this to a vertical boundary line count as boundary points.
const BOUNDARY_EPS: f64 = 1e-14;

/// Side tag for one-sided evaluation on the vertical boundary lines and the slit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundarySide {
    /// Limit taken from the left half (`x = -1/2`, or the slit seen from `x < 0`).
    Left,
    /// Limit taken from the right half.
    Right,
}

/// `phi`, `phi'` and `sqrt(phi')` at one point.
#[derive(Clone, Copy, Debug)]
pub struct ConformalEval {
    pub z: C,
    pub phi: C,
    pub dphi: C,
    pub sqrt_dphi: C,
    /// `e^{-2 pi i z}`, kept for cancellation-free offsets from `+-1/2`.
    eps: C,
}

fn i() -> C {
    C::new(0.0, 1.0)
}

fn is_on_boundary(z: C) -> bool {
    (z.re.abs() - 0.5).abs() < BOUNDARY_EPS || (z.re == 0.0 && z.im <= 0.0)
}

fn in_closure(z: C) -> bool {
    z.re.abs() <= 0.5 + BOUNDARY_EPS && z.is_finite()
}

/// Evaluates the map at an interior point of the slit-strip.
pub fn conformal_eval(z: C) -> Result<ConformalEval> {
    if !in_closure(z) || is_on_boundary(z) {
        return domain(format!("{z} is not an interior point of the slit-strip"));
    }
    eval_with_side(z, None)
}

/// One-sided evaluation on the boundary; interior points ignore the tag.
pub fn conformal_eval_on_boundary(z: C, side: BoundarySide) -> Result<ConformalEval> {
    if !in_closure(z) {
        return domain(format!("{z} lies outside the slit-strip"));
    }
    if z == C::new(0.0, 0.0) {
        return domain("the tip of the slit is a singular point");
    }
    eval_with_side(z, Some(side))
}

fn eval_with_side(z: C, side: Option<BoundarySide>) -> Result<ConformalEval> {
    let eps = (-2.0 * PI * i() * z).exp();
    let root = (C::new(1.0, 0.0) - eps).sqrt();
    let root = if root.im.abs() > 1e-300 {
        if root.im > 0.0 {
            root
        } else {
            -root
        }
    } else {
        match side {
            Some(BoundarySide::Left) => -C::new(root.re.abs(), 0.0),
            Some(BoundarySide::Right) => C::new(root.re.abs(), 0.0),
            None => return Err(Error::Domain(format!("{z} maps onto the real axis; a side is required"))),
        }
    };
    let phi = 0.5 * root;
    let dphi = PI * i() * eps / (4.0 * phi);
    let sqrt_dphi = sqrt_dphi_closed(z, phi);
    Ok(ConformalEval { z, phi, dphi, sqrt_dphi, eps })
}

/// `sqrt(pi) e^{i pi/4} e^{-i pi z} phi^{-1/2} / 2`, continuous on the slit-strip and
/// equal to the principal root of `phi'` at `z = i`.
fn sqrt_dphi_closed(z: C, phi: C) -> C {
    let pref = 0.5 * PI.sqrt() * C::from_polar(1.0, FRAC_PI_4);
    pref * (-PI * i() * z).exp() / phi.sqrt()
}

impl ConformalEval {
    /// `phi(z) - c` for `c` in `{-1/2, 0, 1/2}` without cancellation near the legs.
    pub fn offset(&self, c: f64) -> C {
        if c == -0.5 && self.phi.re < 0.0 {
            0.5 * self.eps / (C::new(1.0, 0.0) - 2.0 * self.phi)
        } else if c == 0.5 && self.phi.re > 0.0 {
            -0.5 * self.eps / (C::new(1.0, 0.0) + 2.0 * self.phi)
        } else {
            self.phi - c
        }
    }

    /// Anchor in `{-1/2, 0, 1/2}` near which `phi(z)` lies.
    pub fn anchor(&self) -> f64 {
        if self.z.im < 0.0 {
            if self.phi.re < 0.0 {
                -0.5
            } else {
                0.5
            }
        } else {
            0.0
        }
    }
}

/// `phi(z1) - phi(z2)` and `phi(z1) - conj(phi(z2))` with the common anchor removed first.
pub fn phi_differences(a: &ConformalEval, b: &ConformalEval) -> (C, C) {
    let c = if a.anchor() == b.anchor() { a.anchor() } else { 0.0 };
    let (da, db) = (a.offset(c), b.offset(c));
    (da - db, da - db.conj())
}

/// Finite step guard for the continuation.
const MIN_STEP: f64 = 1e-12;

/// `sqrt(phi')` by continuation from the principal root at `z0 = i`.
///
/// Points below the real axis are reached through `+-1/4` so that the path never
/// crosses the slit.
pub fn continued_sqrt_dphi(z: C) -> Result<C> {
    conformal_eval(z)?;
    let z0 = i();
    let start = conformal_eval(z0)?.dphi.sqrt();
    let mut path = vec![z0];
    if z.im < 0.0 {
        path.push(C::new(0.25 * z.re.signum(), 0.0));
    }
    path.push(z);
    let mut value = start;
    let mut here = z0;
    for &target in &path[1..] {
        value = continue_along(here, target, value)?;
        here = target;
    }
    Ok(value)
}

fn continue_along(from: C, to: C, mut value: C) -> Result<C> {
    let mut t: f64 = 0.0;
    let mut h: f64 = 1.0 / 16.0;
    while t < 1.0 {
        let step = h.min(1.0 - t);
        let p = from + (to - from) * (t + step);
        let d = conformal_eval(p)?.dphi;
        let r = d.sqrt();
        let cand = if (r - value).norm() <= (r + value).norm() { r } else { -r };
        let jump = (cand / value).arg().abs();
        if jump >= FRAC_PI_2 {
            h = step / 2.0;
            if h < MIN_STEP {
                return Err(Error::Numerical("continuation step underflow".into()));
            }
            continue;
        }
        value = cand;
        t += step;
        if jump < FRAC_PI_4 / 4.0 {
            h = (2.0 * step).min(0.25);
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_on_the_imaginary_axis() {
        let e = conformal_eval(C::new(0.0, 0.5)).unwrap();
        let want = 0.5 * (PI.exp() - 1.0).sqrt();
        assert!(e.phi.re.abs() < 1e-14);
        assert!((e.phi.im - want).abs() < 1e-12);
    }

    #[test]
    fn legs_approach_their_images() {
        let r = conformal_eval(C::new(0.25, -1.0)).unwrap();
        assert!((r.phi - C::new(0.5, 0.0)).norm() < 1e-3);
        let l = conformal_eval(C::new(-0.25, -1.0)).unwrap();
        assert!((l.phi + C::new(0.5, 0.0)).norm() < 1e-3);
        assert!((r.offset(0.5) - (r.phi - 0.5)).norm() < 1e-14);
        assert!((l.offset(-0.5) - (l.phi + 0.5)).norm() < 1e-14);
    }

    #[test]
    fn slit_and_boundary_are_rejected() {
        assert!(conformal_eval(C::new(0.0, -0.3)).is_err());
        assert!(conformal_eval(C::new(0.5, 0.3)).is_err());
        assert!(conformal_eval(C::new(0.7, 0.3)).is_err());
        let l = conformal_eval_on_boundary(C::new(0.0, -0.3), BoundarySide::Left).unwrap();
        let r = conformal_eval_on_boundary(C::new(0.0, -0.3), BoundarySide::Right).unwrap();
        assert!(l.phi.re < 0.0 && r.phi.re > 0.0);
        assert!((l.phi + r.phi).norm() < 1e-15);
    }

    #[test]
    fn reference_root_is_principal() {
        let e = conformal_eval(i()).unwrap();
        assert!((e.sqrt_dphi - e.dphi.sqrt()).norm() < 1e-12 * e.sqrt_dphi.norm());
    }
}
