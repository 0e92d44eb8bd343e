//! Clifford generators on spin rows, integrated modes and the induced rotation.

pub mod field;

use crate::error::{domain, Result};
use crate::par::Exec;
use crate::statespace::{RowSpace, StateVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::ops::{Add, Mul, Sub};

pub type C = Complex64;

const ZERO: C = C { re: 0.0, im: 0.0 };

/// `(1 + i) / sqrt 2`.
pub const LAMBDA: C = C { re: FRAC_1_SQRT_2, im: FRAC_1_SQRT_2 };

pub fn lambda_pow(n: i32) -> C {
    C::from_polar(1.0, n as f64 * std::f64::consts::FRAC_PI_4)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GenKind {
    Psi,
    PsiStar,
}

/// Amplitude picked up by row `row` under the generator at dual index `j`.
#[inline]
pub fn prefactor(space: &RowSpace, row: usize, kind: GenKind, j: usize) -> C {
    let l = space.spin(row, j) as f64;
    let r = space.spin(row, j + 1) as f64;
    match kind {
        GenKind::Psi => C::new(-l, r) * FRAC_1_SQRT_2,
        GenKind::PsiStar => C::new(r, -l) * FRAC_1_SQRT_2,
    }
}

pub fn apply_generator(space: &RowSpace, kind: GenKind, j: usize, v: &[C]) -> Result<StateVector> {
    if j >= space.width() {
        return domain(format!("dual index {j} outside 0..{}", space.width()));
    }
    if v.len() != space.dim() {
        return domain("state vector has the wrong dimension");
    }
    let mut out = vec![ZERO; v.len()];
    for (r, &amp) in v.iter().enumerate() {
        out[space.fold(r, j)] += prefactor(space, r, kind, j) * amp;
    }
    Ok(out)
}

pub fn generator_dense(space: &RowSpace, kind: GenKind, j: usize) -> DMatrix<C> {
    let n = space.dim();
    let mut m = DMatrix::zeros(n, n);
    for r in 0..n {
        m[(space.fold(r, j), r)] += prefactor(space, r, kind, j);
    }
    m
}

/// `sum_j c_j psi_j + cs_j psi*_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordElement {
    pub c: Vec<C>,
    pub cs: Vec<C>,
}

impl CliffordElement {
    pub fn zero(w: usize) -> Self {
        Self { c: vec![ZERO; w], cs: vec![ZERO; w] }
    }

    pub fn generator(w: usize, kind: GenKind, j: usize) -> Self {
        let mut e = Self::zero(w);
        match kind {
            GenKind::Psi => e.c[j] = C::new(1.0, 0.0),
            GenKind::PsiStar => e.cs[j] = C::new(1.0, 0.0),
        }
        e
    }

    pub fn width(&self) -> usize {
        self.c.len()
    }

    /// Scalar `s` with `{A, B} = s id`.
    pub fn anticommutator(&self, other: &Self) -> C {
        let mut s = ZERO;
        for j in 0..self.width() {
            s += -2.0 * self.c[j] * other.c[j] + 2.0 * self.cs[j] * other.cs[j];
        }
        s
    }

    pub fn adjoint(&self) -> Self {
        Self { c: self.c.iter().map(|x| -x.conj()).collect(), cs: self.cs.iter().map(|x| x.conj()).collect() }
    }

    pub fn scale(&self, s: C) -> Self {
        Self { c: self.c.iter().map(|x| x * s).collect(), cs: self.cs.iter().map(|x| x * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().chain(&self.cs).map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Action on a state vector, one output amplitude at a time.
    pub fn apply(&self, space: &RowSpace, v: &[C], exec: Exec) -> Result<StateVector> {
        if self.width() != space.width() || v.len() != space.dim() {
            return domain("Clifford element and state vector do not match the space");
        }
        let w = self.width();
        let active: Vec<usize> = (0..w).filter(|&j| self.c[j] != ZERO || self.cs[j] != ZERO).collect();
        let mut out = vec![ZERO; v.len()];
        exec.fill(&mut out, |r| {
            let mut acc = ZERO;
            for &j in &active {
                let src = space.fold(r, j);
                let p = self.c[j] * prefactor(space, src, GenKind::Psi, j)
                    + self.cs[j] * prefactor(space, src, GenKind::PsiStar, j);
                acc += p * v[src];
            }
            acc
        });
        Ok(out)
    }

    pub fn to_dense(&self, space: &RowSpace) -> DMatrix<C> {
        let n = space.dim();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..self.width() {
            if self.c[j] != ZERO {
                m += generator_dense(space, GenKind::Psi, j) * self.c[j];
            }
            if self.cs[j] != ZERO {
                m += generator_dense(space, GenKind::PsiStar, j) * self.cs[j];
            }
        }
        m
    }
}

impl Add for &CliffordElement {
    type Output = CliffordElement;
    fn add(self, o: &CliffordElement) -> CliffordElement {
        CliffordElement {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
            cs: self.cs.iter().zip(&o.cs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CliffordElement {
    type Output = CliffordElement;
    fn sub(self, o: &CliffordElement) -> CliffordElement {
        self + &o.scale(C::new(-1.0, 0.0))
    }
}

impl Mul<C> for &CliffordElement {
    type Output = CliffordElement;
    fn mul(self, s: C) -> CliffordElement {
        self.scale(s)
    }
}

/// `e^{i pi/4} / 2`, the prefactor linking functions to modes.
fn kappa() -> C {
    C::from_polar(0.5, std::f64::consts::FRAC_PI_4)
}

/// Integrated mode of a cross-section function.
pub fn mode_of_function(f: &[C]) -> CliffordElement {
    let k = kappa();
    CliffordElement {
        c: f.iter().map(|x| k * C::i() * x).collect(),
        cs: f.iter().map(|x| -k * C::i() * x.conj()).collect(),
    }
}

/// Inverse of [`mode_of_function`] on its image, with the distance from that image.
pub fn function_of_mode(e: &CliffordElement) -> (Vec<C>, f64) {
    let k = kappa();
    let f: Vec<C> = e.c.iter().map(|x| x / (k * C::i())).collect();
    let back = mode_of_function(&f);
    let off = back.cs.iter().zip(&e.cs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    (f, off)
}

/// `R f = -i conj f`.
pub fn reflect(f: &[C]) -> Vec<C> {
    f.iter().map(|x| -C::i() * x.conj()).collect()
}

/// Real inner product `Re sum f conj g`.
pub fn inner(f: &[C], g: &[C]) -> f64 {
    f.iter().zip(g).map(|(a, b)| (a * b.conj()).re).sum()
}

/// `[Re f, Im f]`.
pub fn realify(f: &[C]) -> Vec<f64> {
    f.iter().map(|x| x.re).chain(f.iter().map(|x| x.im)).collect()
}

pub fn complexify(v: &[f64]) -> Vec<C> {
    let w = v.len() / 2;
    (0..w).map(|j| C::new(v[j], v[w + j])).collect()
}

/// Images of the generators under `X -> T^{-1} X T` on a strip of width `w`.
#[derive(Clone, Debug)]
pub struct InducedRotation {
    pub psi: Vec<CliffordElement>,
    pub psistar: Vec<CliffordElement>,
}

impl InducedRotation {
    pub fn new(w: usize) -> Result<Self> {
        if w == 0 {
            return domain("width must be at least 1");
        }
        let s = FRAC_1_SQRT_2;
        let one = C::new(1.0, 0.0);
        let (l3, lm3) = (lambda_pow(3), lambda_pow(-3));
        let mut psi = Vec::with_capacity(w);
        let mut psistar = Vec::with_capacity(w);
        for j in 0..w {
            let mut p = CliffordElement::zero(w);
            let mut q = CliffordElement::zero(w);
            if w == 1 {
                p.c[0] = one * SQRT_2;
                p.cs[0] = -one;
                q.c[0] = -one;
                q.cs[0] = one * SQRT_2;
            } else if j == 0 {
                p.c[0] = one * (1.0 + s);
                p.cs[0] = l3 + lm3 * s;
                p.c[1] = l3 * s;
                p.cs[1] = one * s;
                q.cs[0] = one * (1.0 + s);
                q.c[0] = lm3 + l3 * s;
                q.cs[1] = lm3 * s;
                q.c[1] = one * s;
            } else if j == w - 1 {
                p.c[j] = one * (1.0 + s);
                p.cs[j] = lm3 + l3 * s;
                p.c[j - 1] = lm3 * s;
                p.cs[j - 1] = one * s;
                q.cs[j] = one * (1.0 + s);
                q.c[j] = l3 + lm3 * s;
                q.cs[j - 1] = l3 * s;
                q.c[j - 1] = one * s;
            } else {
                p.c[j] = one * 2.0;
                p.cs[j] = -one * SQRT_2;
                p.c[j + 1] = l3 * s;
                p.cs[j + 1] = one * s;
                p.c[j - 1] = lm3 * s;
                p.cs[j - 1] = one * s;
                q.cs[j] = one * 2.0;
                q.c[j] = -one * SQRT_2;
                q.cs[j + 1] = lm3 * s;
                q.c[j + 1] = one * s;
                q.cs[j - 1] = l3 * s;
                q.c[j - 1] = one * s;
            }
            psi.push(p);
            psistar.push(q);
        }
        Ok(Self { psi, psistar })
    }

    pub fn width(&self) -> usize {
        self.psi.len()
    }

    /// `T^{-1} X T`.
    pub fn conjugate(&self, x: &CliffordElement) -> CliffordElement {
        let mut out = CliffordElement::zero(self.width());
        for j in 0..self.width() {
            if x.c[j] != ZERO {
                out = &out + &(&self.psi[j] * x.c[j]);
            }
            if x.cs[j] != ZERO {
                out = &out + &(&self.psistar[j] * x.cs[j]);
            }
        }
        out
    }

    /// Realified `P` with `T^{-1} phi(f) T = phi(P f)`, plus the largest
    /// distance of an image from the range of `phi`.
    pub fn matrix_with_defect(&self) -> (DMatrix<f64>, f64) {
        let w = self.width();
        let mut p = DMatrix::zeros(2 * w, 2 * w);
        let mut defect = 0.0f64;
        for col in 0..2 * w {
            let mut f = vec![ZERO; w];
            f[col % w] = if col < w { C::new(1.0, 0.0) } else { C::i() };
            let (g, off) = function_of_mode(&self.conjugate(&mode_of_function(&f)));
            defect = defect.max(off);
            for (r, x) in realify(&g).into_iter().enumerate() {
                p[(r, col)] = x;
            }
        }
        (p, defect)
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        self.matrix_with_defect().0
    }
}

/// Coefficients of a dense operator in the generator basis, by trace pairing.
///
/// Uses `{psi_j, psi_j} = -2`, `{psi*_j, psi*_j} = 2` and orthogonality of
/// distinct generators under the normalised trace; also returns the
/// Frobenius-relative norm of the part outside the span.
pub fn expand_dense(space: &RowSpace, m: &DMatrix<C>) -> (CliffordElement, f64) {
    let w = space.width();
    let n = space.dim() as f64;
    let mut e = CliffordElement::zero(w);
    for j in 0..w {
        let p = generator_dense(space, GenKind::Psi, j);
        let q = generator_dense(space, GenKind::PsiStar, j);
        // tr(psi_j^dagger psi_j) = n, generators orthogonal under tr(A^dagger B).
        e.c[j] = (p.adjoint() * m).trace() / n;
        e.cs[j] = (q.adjoint() * m).trace() / n;
    }
    let rest = m - e.to_dense(space);
    (e, rest.norm() / m.norm().max(1e-300))
}

/// `T^{-1} X T` by dense matrix products, the oracle for the table.
pub fn conjugate_dense(t: &DMatrix<C>, t_inv: &DMatrix<C>, x: &DMatrix<C>) -> DMatrix<C> {
    t_inv * x * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StripGeometry;

    fn space(a: i32, b: i32) -> RowSpace {
        RowSpace::irreducible(StripGeometry::new(a, b).unwrap())
    }

    #[test]
    fn generator_squares() {
        let sp = space(-1, 2);
        for j in 0..3 {
            let p = generator_dense(&sp, GenKind::Psi, j);
            let q = generator_dense(&sp, GenKind::PsiStar, j);
            let id = DMatrix::<C>::identity(sp.dim(), sp.dim());
            assert!((&p * &p + &id).norm() < 1e-14);
            assert!((&q * &q - &id).norm() < 1e-14);
            assert!((p.adjoint() + &p).norm() < 1e-14);
            assert!((q.adjoint() - &q).norm() < 1e-14);
        }
    }

    #[test]
    fn lazy_apply_matches_dense() {
        let sp = space(-2, 1);
        let e = CliffordElement {
            c: vec![C::new(0.3, -0.1), C::new(0.0, 0.7), C::new(-1.2, 0.4)],
            cs: vec![C::new(0.5, 0.5), C::new(0.2, 0.0), C::new(0.0, -0.9)],
        };
        let v: Vec<C> = (0..sp.dim()).map(|i| C::new(i as f64, 1.0 - i as f64 * 0.2)).collect();
        let lazy = e.apply(&sp, &v, Exec::Sequential).unwrap();
        let dense = e.to_dense(&sp) * nalgebra::DVector::from_vec(v.clone());
        for (a, b) in lazy.iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
        let single = apply_generator(&sp, GenKind::PsiStar, 1, &v).unwrap();
        let want = generator_dense(&sp, GenKind::PsiStar, 1) * nalgebra::DVector::from_vec(v);
        for (a, b) in single.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn out_of_range_generator() {
        let sp = space(-1, 1);
        assert!(apply_generator(&sp, GenKind::Psi, 2, &[ZERO; 4]).is_err());
    }

    #[test]
    fn mode_round_trip_and_reflection() {
        let f = vec![C::new(0.3, -1.0), C::new(2.0, 0.5)];
        let (g, off) = function_of_mode(&mode_of_function(&f));
        assert!(off < 1e-15);
        assert!(g.iter().zip(&f).all(|(a, b)| (a - b).norm() < 1e-15));
        let rr = reflect(&reflect(&f));
        assert!(rr.iter().zip(&f).all(|(a, b)| (a - b).norm() < 1e-15));
    }
}

