//! Cross-section function spaces: translation eigenfunctions, boundary-edge
//! extension, pole functions and the inner products used by the recursion.

use crate::clifford::{complexify, inner, realify, reflect, InducedRotation, C, LAMBDA};
use crate::error::{domain, Error, Result};
use crate::geometry::{k_index, StripGeometry};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use std::f64::consts::PI;

/// `3 - 2 sqrt 2`.
pub const OMEGA_RATIO: f64 = 0.171_572_875_253_809_9;

/// Largest width accepted by the dense solves.
pub const MAX_WIDTH: usize = 512;

/// Condition number above which a pole solve is rejected.
pub const MAX_CONDITION: f64 = 1e10;

fn omega_residual(omega: f64, w: f64) -> f64 {
    ((w + 0.5) * omega).cos() - OMEGA_RATIO * ((w - 0.5) * omega).cos()
}

/// Root of `cos((w+1/2) w) / cos((w-1/2) w) = 3 - 2 sqrt 2` in `((k-1/2) pi/w, k pi/w)`.
pub fn solve_omega(k2: i32, w: usize) -> Result<f64> {
    if k2 <= 0 || k2 % 2 == 0 || k2 >= 2 * w as i32 {
        return domain(format!("k = {k2}/2 is not in K^({w})"));
    }
    let wf = w as f64;
    let k = k2 as f64 / 2.0;
    let (mut lo, mut hi) = ((k - 0.5) * PI / wf, k * PI / wf);
    let (mut flo, fhi) = (omega_residual(lo, wf), omega_residual(hi, wf));
    if flo == 0.0 {
        return Ok(lo);
    }
    if flo * fhi > 0.0 {
        return Err(Error::Numerical(format!("no sign change on the bracket for k={k2}/2, w={w}")));
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        let fm = omega_residual(mid, wf);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The eigenvalue `lambda_{+k} > 1` belonging to `omega`.
pub fn lambda_from_omega(omega: f64) -> f64 {
    let c = omega.cos();
    2.0 - c + ((3.0 - c) * (1.0 - c)).sqrt()
}

/// `i |v - p| / (v - p)` for a vertex and a face given in doubled coordinates.
pub fn sh_coefficient(v2: (i32, i32), p2: (i32, i32)) -> C {
    let d = C::new((v2.0 - p2.0) as f64, (v2.1 - p2.1) as f64);
    C::i() * d.conj() / d.norm()
}

/// Value on a vertical edge from the horizontal edges above and below it on one side.
///
/// Solves `u + c conj u = h + c conj h` for the two vertex-face pairs shared
/// with the horizontal edges `up` and `down`.
pub fn sh_vertical(up: C, down: C, east: bool) -> C {
    let (c_up, c_down) = if east { (LAMBDA.conj(), -LAMBDA) } else { (LAMBDA, -LAMBDA.conj()) };
    let a = up + c_up * up.conj();
    let b = down + c_down * down.conj();
    ((a - b) / (c_up - c_down)).conj()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

/// Value on the boundary vertical edge between rows `f0` (height 0) and `f1` (height 1).
pub fn extend_to_boundary_edge(f0: &[C], f1: &[C], side: Side) -> C {
    match side {
        Side::Left => sh_vertical(f1[0], f0[0], true),
        Side::Right => {
            let n = f0.len() - 1;
            sh_vertical(f1[n], f0[n], false)
        }
    }
}

/// Translation eigenfunctions of a strip of width `w`.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    pub width: usize,
    /// `lambda_{+k}` from the induced rotation, indexed by `k - 1/2`.
    pub lambda: Vec<f64>,
    pub plus: Vec<Vec<C>>,
    pub minus: Vec<Vec<C>>,
    /// Largest angle defect of the left boundary values from `e^{-i pi/4} R`.
    pub phase_defect: f64,
}

impl EigenBasis {
    pub fn new(w: usize) -> Result<Self> {
        if w == 0 || w > MAX_WIDTH {
            return domain(format!("width {w} outside 1..={MAX_WIDTH}"));
        }
        let p = InducedRotation::new(w)?.matrix();
        let sym = (&p + p.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..2 * w).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        // Ascending: the first w are 1/lambda_k for k = w-1/2 down to 1/2.
        let mut lambda = Vec::with_capacity(w);
        let mut plus = Vec::with_capacity(w);
        let mut phase_defect = 0.0f64;
        for n in (0..w).rev() {
            let small = eig.eigenvalues[order[n]];
            let large = eig.eigenvalues[order[2 * w - 1 - n]];
            if !(small > 0.0 && small < 1.0) || (small * large - 1.0).abs() > 1e-10 {
                return Err(Error::Numerical(format!(
                    "induced rotation spectrum not reciprocal at width {w}: {small} * {large}"
                )));
            }
            if n + 1 < w && (eig.eigenvalues[order[n + 1]] - small).abs() < 1e-12 {
                return Err(Error::Numerical(format!("degenerate induced rotation spectrum at width {w}")));
            }
            let lam = 1.0 / small;
            let v: Vec<f64> = eig.eigenvectors.column(order[n]).iter().copied().collect();
            let mut f = complexify(&v);
            let norm = inner(&f, &f).sqrt();
            f.iter_mut().for_each(|x| *x /= norm);
            let f1: Vec<C> = f.iter().map(|x| x * lam).collect();
            let t = extend_to_boundary_edge(&f, &f1, Side::Left) * C::from_polar(1.0, PI / 4.0);
            phase_defect = phase_defect.max((t.im / t.norm()).abs());
            if t.re < 0.0 {
                f.iter_mut().for_each(|x| *x = -*x);
            }
            lambda.push(lam);
            plus.push(f);
        }
        let minus = plus.iter().map(|f| reflect(f)).collect();
        Ok(Self { width: w, lambda, plus, minus, phase_defect })
    }

    /// `f_k` for a signed doubled index.
    pub fn get(&self, k2: i32) -> &[C] {
        let i = k_index(k2.abs());
        if k2 > 0 {
            &self.plus[i]
        } else {
            &self.minus[i]
        }
    }

    /// Signed doubled indices `-K ∪ K`, negatives first.
    pub fn indices(&self) -> Vec<i32> {
        let w = self.width as i32;
        (0..w).map(|j| -(2 * j + 1)).chain((0..w).map(|j| 2 * j + 1)).collect()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_error(&self) -> f64 {
        let idx = self.indices();
        let mut err = 0.0f64;
        for &i in &idx {
            for &j in &idx {
                let want = if i == j { 1.0 } else { 0.0 };
                err = err.max((inner(self.get(i), self.get(j)) - want).abs());
            }
        }
        err
    }
}

/// Zero extension of a leg function to the full cross-section.
pub fn embed(f: &[C], offset: usize, total: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); total];
    out[offset..offset + f.len()].copy_from_slice(f);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Extremity {
    Top,
    Left,
    Right,
}

/// Eigenfunctions of the strip and both legs, with the three families of pole functions.
#[derive(Clone, Debug)]
pub struct SlitData {
    pub geom: StripGeometry,
    pub top: EigenBasis,
    pub left: EigenBasis,
    pub right: EigenBasis,
    poles: [Vec<Vec<C>>; 3],
    left_ext: Vec<Vec<C>>,
    right_ext: Vec<Vec<C>>,
    /// Condition number of the pole system.
    pub condition: f64,
    /// Largest residual of the pole solves.
    pub residual: f64,
}

fn slot(e: Extremity) -> usize {
    match e {
        Extremity::Top => 0,
        Extremity::Left => 1,
        Extremity::Right => 2,
    }
}

impl SlitData {
    pub fn new(geom: StripGeometry) -> Result<Self> {
        let l = geom.width();
        if l > MAX_WIDTH {
            return domain(format!("width {l} above the cap {MAX_WIDTH}"));
        }
        let (ll, lr) = (geom.width_left(), geom.width_right());
        let top = EigenBasis::new(l)?;
        let left = EigenBasis::new(ll)?;
        let right = EigenBasis::new(lr)?;
        // left_ext[i] holds f^L_{-k} at i = k_index(k), then f^L_{+k} at ll + i.
        let left_ext: Vec<Vec<C>> =
            left.minus.iter().chain(&left.plus).map(|f| embed(f, 0, l)).collect();
        let right_ext: Vec<Vec<C>> =
            right.minus.iter().chain(&right.plus).map(|f| embed(f, ll, l)).collect();

        let rows: Vec<Vec<f64>> = top
            .plus
            .iter()
            .chain(&left_ext[..ll])
            .chain(&right_ext[..lr])
            .map(|f| realify(f))
            .collect();
        let n = 2 * l;
        let m = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
        let sv = m.clone().singular_values();
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let condition = smax / smin;
        if !(condition < MAX_CONDITION) {
            return Err(Error::Numerical(format!("pole system condition number {condition:e}")));
        }
        let lu = m.clone().lu();
        let mut residual = 0.0f64;
        let mut solve = |row: usize| -> Result<Vec<C>> {
            let mut rhs = DVector::zeros(n);
            rhs[row] = 1.0;
            let x = lu.solve(&rhs).ok_or_else(|| Error::Numerical("singular pole system".into()))?;
            residual = residual.max((&m * &x - &rhs).amax());
            Ok(complexify(x.as_slice()))
        };
        let pt = (0..l).map(&mut solve).collect::<Result<Vec<_>>>()?;
        let pl = (0..ll).map(|i| solve(l + i)).collect::<Result<Vec<_>>>()?;
        let pr = (0..lr).map(|i| solve(l + ll + i)).collect::<Result<Vec<_>>>()?;
        Ok(Self { geom, top, left, right, poles: [pt, pl, pr], left_ext, right_ext, condition, residual })
    }

    pub fn width_of(&self, e: Extremity) -> usize {
        match e {
            Extremity::Top => self.geom.width(),
            Extremity::Left => self.geom.width_left(),
            Extremity::Right => self.geom.width_right(),
        }
    }

    /// `p^e_k` on the full cross-section.
    pub fn pole(&self, e: Extremity, k2: i32) -> Result<&[C]> {
        if k2 <= 0 || k2 % 2 == 0 || k2 >= 2 * self.width_of(e) as i32 {
            return domain(format!("k = {k2}/2 out of range for {e:?}"));
        }
        Ok(&self.poles[slot(e)][k_index(k2)])
    }

    /// Eigenfunction of extremity `e` with signed doubled index, zero-extended.
    pub fn eigenfunction(&self, e: Extremity, k2: i32) -> &[C] {
        let i = k_index(k2.abs());
        match e {
            Extremity::Top => self.top.get(k2),
            Extremity::Left => &self.left_ext[if k2 < 0 { i } else { self.left.width + i }],
            Extremity::Right => &self.right_ext[if k2 < 0 { i } else { self.right.width + i }],
        }
    }

    /// `<f^a_{k'}, p^b_k>`.
    pub fn ip(&self, a: Extremity, k2p: i32, b: Extremity, k2: i32) -> Result<f64> {
        if k2p == 0 || k2p % 2 == 0 || k2p.abs() >= 2 * self.width_of(a) as i32 {
            return domain(format!("k' = {k2p}/2 out of range for {a:?}"));
        }
        Ok(inner(self.eigenfunction(a, k2p), self.pole(b, k2)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_brackets_and_residuals() {
        for w in 1..10 {
            for j in 0..w as i32 {
                let k2 = 2 * j + 1;
                let om = solve_omega(k2, w).unwrap();
                let k = k2 as f64 / 2.0;
                assert!(om > (k - 0.5) * PI / w as f64 && om < k * PI / w as f64);
                let wf = w as f64;
                let ratio = ((wf + 0.5) * om).cos() / ((wf - 0.5) * om).cos();
                assert!((ratio - OMEGA_RATIO).abs() < 1e-12, "w={w} k2={k2} ratio={ratio}");
                let lp = lambda_from_omega(om);
                let c = om.cos();
                let lm = 2.0 - c - ((3.0 - c) * (1.0 - c)).sqrt();
                assert!((lp * lm - 1.0).abs() < 1e-12);
            }
        }
        assert!((OMEGA_RATIO - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!(solve_omega(4, 3).is_err());
        assert!(solve_omega(7, 3).is_err());
    }

    #[test]
    fn single_site_basis() {
        let b = EigenBasis::new(1).unwrap();
        assert_eq!(b.plus.len(), 1);
        assert!(b.gram_error() < 1e-12);
    }

    #[test]
    fn boundary_extension_is_real_linear() {
        let f0 = vec![C::new(0.3, -0.2), C::new(1.0, 0.4)];
        let f1 = vec![C::new(-0.7, 0.1), C::new(0.2, 0.9)];
        assert_eq!(extend_to_boundary_edge(&[C::new(0.0, 0.0)], &[C::new(0.0, 0.0)], Side::Left), C::new(0.0, 0.0));
        for side in [Side::Left, Side::Right] {
            let u = extend_to_boundary_edge(&f0, &f1, side);
            let twice: Vec<C> = f0.iter().map(|x| x * 2.0).collect();
            let twice1: Vec<C> = f1.iter().map(|x| x * 2.0).collect();
            assert!((extend_to_boundary_edge(&twice, &twice1, side) - u * 2.0).norm() < 1e-15);
        }
    }

    #[test]
    fn sh_coefficients_of_the_east_side() {
        // Vertical edge at x=0, y'=1/2; face centre (1/2, 1/2); NE vertex (0, 1), SE vertex (0, 0).
        assert!((sh_coefficient((0, 2), (1, 1)) - LAMBDA.conj()).norm() < 1e-15);
        assert!((sh_coefficient((0, 0), (1, 1)) + LAMBDA).norm() < 1e-15);
        assert!((sh_coefficient((0, 2), (-1, 1)) - LAMBDA).norm() < 1e-15);
        assert!((sh_coefficient((0, 0), (-1, 1)) + LAMBDA.conj()).norm() < 1e-15);
    }

    #[test]
    fn pole_targets() {
        let d = SlitData::new(StripGeometry::new(-2, 3).unwrap()).unwrap();
        for k2 in [1, 3, 5, 7, 9] {
            for kp in [1, 3, 5, 7, 9] {
                let want = if k2 == kp { 1.0 } else { 0.0 };
                assert!((d.ip(Extremity::Top, kp, Extremity::Top, k2).unwrap() - want).abs() < 1e-10);
            }
            for kp in [1, 3] {
                assert!(d.ip(Extremity::Left, -kp, Extremity::Top, k2).unwrap().abs() < 1e-10);
            }
        }
        assert!(d.pole(Extremity::Left, 5).is_err());
    }
}
