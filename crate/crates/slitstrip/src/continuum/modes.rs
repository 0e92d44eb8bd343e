//! Quarter-integer Fourier modes of the strip and of the two leg half-strips.

use super::quadrature::{nodes_on, sum};
use crate::error::{domain, Result};
use num_complex::Complex64 as C;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ModeFamily {
    /// Whole strip, cross-section `[-1/2, 1/2]`.
    Full,
    /// Left leg, cross-section `[-1/2, 0]`.
    LeftLeg,
    /// Right leg, cross-section `[0, 1/2]`.
    RightLeg,
}

/// `E_k`, `E^L_k` or `E^R_k` for a signed doubled index `k2 = 2k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ContinuumMode {
    pub family: ModeFamily,
    pub k2: i32,
}

impl ContinuumMode {
    pub fn new(family: ModeFamily, k2: i32) -> Result<Self> {
        if k2 % 2 == 0 {
            return domain(format!("{k2} is not an odd doubled index"));
        }
        Ok(Self { family, k2 })
    }

    pub fn full(k2: i32) -> Result<Self> {
        Self::new(ModeFamily::Full, k2)
    }

    pub fn left(k2: i32) -> Result<Self> {
        Self::new(ModeFamily::LeftLeg, k2)
    }

    pub fn right(k2: i32) -> Result<Self> {
        Self::new(ModeFamily::RightLeg, k2)
    }

    pub fn k(&self) -> f64 {
        self.k2 as f64 / 2.0
    }

    /// Phase and normalization constant.
    pub fn constant(&self) -> C {
        let k = self.k();
        match self.family {
            ModeFamily::Full => C::from_polar(1.0, PI * (-k / 2.0 - 0.25)),
            ModeFamily::LeftLeg => C::from_polar(SQRT_2, PI * (-k - 0.25)),
            ModeFamily::RightLeg => C::from_polar(SQRT_2, -FRAC_PI_4),
        }
    }

    /// Angular frequency: `pi k` in the strip, `2 pi k` in the legs.
    fn rate(&self) -> f64 {
        match self.family {
            ModeFamily::Full => PI * self.k(),
            _ => 2.0 * PI * self.k(),
        }
    }

    /// Value of the holomorphic extension at `z`.
    pub fn eval(&self, z: C) -> C {
        self.constant() * (C::new(0.0, -self.rate()) * z).exp()
    }

    /// Restriction to the cross-section.
    pub fn restriction(&self, x: f64) -> C {
        self.eval(C::new(x, 0.0))
    }

    /// Interval carrying the restriction.
    pub fn support(&self) -> (f64, f64) {
        match self.family {
            ModeFamily::Full => (-0.5, 0.5),
            ModeFamily::LeftLeg => (-0.5, 0.0),
            ModeFamily::RightLeg => (0.0, 0.5),
        }
    }

    /// The mode with the opposite index.
    pub fn opposite(&self) -> Self {
        Self { family: self.family, k2: -self.k2 }
    }
}

/// `<f, g> = int Re(f conj g) dx` over `[a, b]` with an `n`-point rule.
pub fn inner_on<F: Fn(f64) -> C, G: Fn(f64) -> C>(n: usize, a: f64, b: f64, f: F, g: G) -> f64 {
    sum(&nodes_on(n, a, b), |x| C::new((f(x) * g(x).conj()).re, 0.0)).re
}

/// Inner product of two modes on the cross-section.
pub fn mode_inner(n: usize, m1: &ContinuumMode, m2: &ContinuumMode) -> f64 {
    let (a1, b1) = m1.support();
    let (a2, b2) = m2.support();
    let (a, b) = (a1.max(a2), b1.min(b2));
    if b <= a {
        return 0.0;
    }
    inner_on(n, a, b, |x| m1.restriction(x), |x| m2.restriction(x))
}
