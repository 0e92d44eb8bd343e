//! Two-point kernels of the slit-strip and the skew matrices built from them.

use super::conformal::{conformal_eval, phi_differences, ConformalEval};
use super::modes::ContinuumMode;
use super::pfaffian::pfaffian;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::Serialize;

/// A function on (part of) the slit-strip used as a kernel coefficient.
pub trait Coefficient: Sync {
    fn value(&self, z: C) -> C;
}

impl Coefficient for ContinuumMode {
    fn value(&self, z: C) -> C {
        self.eval(z)
    }
}

impl<F: Fn(C) -> C + Sync> Coefficient for F {
    fn value(&self, z: C) -> C {
        self(z)
    }
}

/// Holomorphic (`o`) or antiholomorphic (`*`) dependence on each of the two points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum KernelVariant {
    HoloHolo,
    HoloAnti,
    AntiHolo,
    AntiAnti,
}

impl KernelVariant {
    pub const ALL: [KernelVariant; 4] =
        [KernelVariant::HoloHolo, KernelVariant::HoloAnti, KernelVariant::AntiHolo, KernelVariant::AntiAnti];
}

/// A point together with `K(z) sqrt(phi'(z))`.
#[derive(Clone, Copy, Debug)]
pub struct KernelPoint {
    pub map: ConformalEval,
    pub g: C,
}

impl KernelPoint {
    pub fn new<K: Coefficient + ?Sized>(k: &K, z: C) -> Result<Self> {
        let map = conformal_eval(z)?;
        Ok(Self::from_eval(k, map))
    }

    pub fn from_eval<K: Coefficient + ?Sized>(k: &K, map: ConformalEval) -> Self {
        Self { map, g: k.value(map.z) * map.sqrt_dphi }
    }
}

/// One of the four two-point kernels.
pub fn kernel_at(variant: KernelVariant, p1: &KernelPoint, p2: &KernelPoint) -> Result<C> {
    let (d, m12) = phi_differences(&p1.map, &p2.map);
    let (_, m21) = phi_differences(&p2.map, &p1.map);
    let singular = d == C::new(0.0, 0.0);
    match variant {
        KernelVariant::HoloHolo if singular => Err(Error::Domain("coincident points".into())),
        KernelVariant::AntiAnti if singular => Err(Error::Domain("coincident points".into())),
        KernelVariant::HoloHolo => Ok(p1.g * p2.g / d),
        KernelVariant::HoloAnti => Ok(p1.g * p2.g.conj() / m12),
        // conj(phi1) - phi2 = -(phi2 - conj(phi1))
        KernelVariant::AntiHolo => Ok(-p1.g.conj() * p2.g / m21),
        KernelVariant::AntiAnti => Ok((p1.g * p2.g).conj() / d.conj()),
    }
}

/// Two-point kernel for coefficient functions `k1`, `k2` at `z1`, `z2`.
pub fn two_point_kernel<K1: Coefficient + ?Sized, K2: Coefficient + ?Sized>(
    variant: KernelVariant,
    k1: &K1,
    z1: C,
    k2: &K2,
    z2: C,
) -> Result<C> {
    kernel_at(variant, &KernelPoint::new(k1, z1)?, &KernelPoint::new(k2, z2)?)
}

/// Sum of the four kernels: `2 Re(g1 g2 / (phi1 - phi2)) + 2 Re(g1 conj(g2) / (phi1 - conj(phi2)))`.
pub fn summed_kernel(p1: &KernelPoint, p2: &KernelPoint) -> f64 {
    let (d, m) = phi_differences(&p1.map, &p2.map);
    2.0 * (p1.g * p2.g / d).re + 2.0 * (p1.g * p2.g.conj() / m).re
}

/// Skew matrix of summed kernels at pairwise distinct points.
pub fn kernel_matrix(points: &[KernelPoint]) -> Result<DMatrix<C>> {
    let n = points.len();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if (points[i].map.phi - points[j].map.phi).norm() == 0.0 {
                return Err(Error::Domain("coincident points".into()));
            }
            let v = summed_kernel(&points[i], &points[j]);
            a[(i, j)] = C::new(v, 0.0);
            a[(j, i)] = C::new(-v, 0.0);
        }
    }
    Ok(a)
}

/// Multipoint kernel: the Pfaffian of the summed-kernel matrix.
pub fn multipoint_kernel(coefficients: &[&dyn Coefficient], z: &[C]) -> Result<C> {
    if coefficients.len() != z.len() {
        return Err(Error::Domain("one point per coefficient function is required".into()));
    }
    let pts = coefficients.iter().zip(z).map(|(k, &z)| KernelPoint::new(*k, z)).collect::<Result<Vec<_>>>()?;
    pfaffian(&kernel_matrix(&pts)?)
}
