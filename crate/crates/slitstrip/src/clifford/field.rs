//! Fermions on all edges of the strip and the discrete complex analysis identities.
//!
//! Everything here is assembled as dense operators on the irreducible space, so
//! it is restricted to narrow strips and serves as a verification layer.

use super::{generator_dense, lambda_pow, GenKind, InducedRotation, C, LAMBDA};
use crate::clifford::{complexify, realify};
use crate::discrete_cx::{sh_coefficient, sh_vertical};
use crate::error::{domain, Error, Result};
use crate::geometry::{plaquettes, Edge, StripGeometry};
use crate::par::Exec;
use crate::statespace::RowSpace;
use crate::transfer::{TransferOperator, Variant};
use nalgebra::DMatrix;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

/// Widest strip for the dense verification layer.
pub const FIELD_MAX_WIDTH: usize = 6;

type Op = DMatrix<C>;

/// Largest singular value.
pub fn op_norm(m: &Op) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Pair `(psi, psi*)` on one edge.
#[derive(Clone, Debug)]
pub struct EdgeFermions {
    pub psi: Op,
    pub psistar: Op,
}

/// Which printed expression defines a vertical-edge fermion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerticalExpr {
    East,
    West,
    Left,
    Right,
}

/// Holomorphic and antiholomorphic fermions on the edges of a strip, within a band of heights.
pub struct FermionField {
    pub geom: StripGeometry,
    pub space: RowSpace,
    pub y_max: i32,
    /// `rows[y + y_max][j]` holds the fermions on the horizontal edge at dual index `j`, height `y`.
    rows: Vec<Vec<EdgeFermions>>,
}

fn dense_inverse(op: &TransferOperator) -> Result<Op> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    for c in 0..n {
        let col = op.apply_inverse(&op.space.basis(c))?;
        for r in 0..n {
            m[(r, c)] = col[r];
        }
    }
    Ok(m)
}

impl FermionField {
    /// Conjugates the height-zero generators row by row up to `|y| <= y_max`.
    pub fn new(geom: StripGeometry, y_max: i32) -> Result<Self> {
        if geom.width() > FIELD_MAX_WIDTH {
            return domain(format!("width {} above the dense cap {FIELD_MAX_WIDTH}", geom.width()));
        }
        if !(0..=8).contains(&y_max) {
            return domain("height band must lie in 0..=8");
        }
        let space = RowSpace::irreducible(geom);
        let op = TransferOperator::with_exec(space, Variant::Strip, Exec::Sequential);
        let t = op.to_dense();
        let t_inv = dense_inverse(&op)?;
        let zero: Vec<EdgeFermions> = (0..geom.width())
            .map(|j| EdgeFermions {
                psi: generator_dense(&space, GenKind::Psi, j),
                psistar: generator_dense(&space, GenKind::PsiStar, j),
            })
            .collect();
        let mut up = vec![zero.clone()];
        let mut down = vec![zero];
        for _ in 0..y_max {
            let last = up.last().expect("row");
            let next = last
                .iter()
                .map(|e| EdgeFermions { psi: &t_inv * &e.psi * &t, psistar: &t_inv * &e.psistar * &t })
                .collect();
            up.push(next);
            let last = down.last().expect("row");
            let next = last
                .iter()
                .map(|e| EdgeFermions { psi: &t * &e.psi * &t_inv, psistar: &t * &e.psistar * &t_inv })
                .collect();
            down.push(next);
        }
        let mut rows: Vec<Vec<EdgeFermions>> = down.into_iter().skip(1).rev().collect();
        rows.extend(up);
        Ok(Self { geom, space, y_max, rows })
    }

    fn check_height(&self, y: i32) -> Result<()> {
        if y.abs() > self.y_max {
            return domain(format!("height {y} outside the band |y| <= {}", self.y_max));
        }
        Ok(())
    }

    /// Fermions on the horizontal edge `x' + i y`, with `x'` given doubled.
    pub fn horizontal(&self, x2: i32, y: i32) -> Result<&EdgeFermions> {
        self.check_height(y)?;
        let j = self.geom.dual_index(x2)?;
        Ok(&self.rows[(y + self.y_max) as usize][j])
    }

    /// One of the printed vertical-edge expressions at `x + i y'`, `y'` given doubled.
    pub fn vertical_expr(&self, x: i32, y2: i32, expr: VerticalExpr) -> Result<EdgeFermions> {
        if y2 % 2 == 0 {
            return domain("vertical edges sit at half-integer heights");
        }
        let (a, b) = (self.geom.a, self.geom.b);
        let (yn, ys) = ((y2 + 1) / 2, (y2 - 1) / 2);
        let s = C::new(FRAC_1_SQRT_2, 0.0);
        let one = C::new(1.0, 0.0);
        let lam = LAMBDA;
        let lami = LAMBDA.conj();
        let comb = |n: &EdgeFermions, sth: &EdgeFermions, c: [C; 8]| EdgeFermions {
            psi: &n.psi * c[0] + &n.psistar * c[1] + &sth.psi * c[2] + &sth.psistar * c[3],
            psistar: &n.psistar * c[4] + &n.psi * c[5] + &sth.psistar * c[6] + &sth.psi * c[7],
        };
        match expr {
            VerticalExpr::East | VerticalExpr::Left => {
                if x >= b || x < a || (expr == VerticalExpr::Left && x != a) {
                    return domain(format!("{expr:?} expression unavailable at x = {x}"));
                }
                let ne = self.horizontal(2 * x + 1, yn)?;
                let se = self.horizontal(2 * x + 1, ys)?;
                let c = if expr == VerticalExpr::East {
                    [lam * s, s, -lambda_pow(3) * s, -s, lami * s, s, -lambda_pow(-3) * s, -s]
                } else {
                    let (p, q) = ((one - lam) * s * 0.5, (one - lami) * s * 0.5);
                    [p * lam, p, q * lami, -q, q * lami, q, p * lam, -p]
                };
                Ok(comb(ne, se, c))
            }
            VerticalExpr::West | VerticalExpr::Right => {
                if x <= a || x > b || (expr == VerticalExpr::Right && x != b) {
                    return domain(format!("{expr:?} expression unavailable at x = {x}"));
                }
                let nw = self.horizontal(2 * x - 1, yn)?;
                let sw = self.horizontal(2 * x - 1, ys)?;
                let c = if expr == VerticalExpr::West {
                    [lami * s, s, -lambda_pow(-3) * s, -s, lam * s, s, -lambda_pow(3) * s, -s]
                } else {
                    let (p, q) = ((one - lami) * s * 0.5, (one - lam) * s * 0.5);
                    [p * lami, p, q * lam, -q, q * lam, q, p * lami, -p]
                };
                Ok(comb(nw, sw, c))
            }
        }
    }

    /// Fermions on any edge; vertical edges use the east expression except on the right boundary.
    pub fn edge(&self, e: &Edge) -> Result<EdgeFermions> {
        if e.is_horizontal() {
            return Ok(self.horizontal(e.re2, e.im2 / 2)?.clone());
        }
        let x = e.re2 / 2;
        let expr = if x == self.geom.b { VerticalExpr::West } else { VerticalExpr::East };
        self.vertical_expr(x, e.im2, expr)
    }
}

/// Coefficient pair `(m, m*)` on edges, built from an s-holomorphic function.
pub struct CoefficientPair {
    pub geom: StripGeometry,
    /// Values of the s-holomorphic function on horizontal rows, indexed like [`FermionField`].
    rows: Vec<Vec<C>>,
    y_max: i32,
}

impl CoefficientPair {
    /// `F(x' + i y) = (P^{-y} f)(x')` for `|y| <= y_max`.
    pub fn from_function(geom: StripGeometry, f: &[C], y_max: i32) -> Result<Self> {
        let w = geom.width();
        if f.len() != w {
            return domain("cross-section function has the wrong length");
        }
        let p = InducedRotation::new(w)?.matrix();
        let p_inv = p.clone().try_inverse().ok_or_else(|| Error::Numerical("induced rotation is singular".into()))?;
        let step = |m: &DMatrix<f64>, g: &[C]| complexify((m * nalgebra::DVector::from_vec(realify(g))).as_slice());
        let mut up = vec![f.to_vec()];
        let mut down = vec![f.to_vec()];
        for _ in 0..y_max {
            up.push(step(&p_inv, up.last().expect("row")));
            down.push(step(&p, down.last().expect("row")));
        }
        let mut rows: Vec<Vec<C>> = down.into_iter().skip(1).rev().collect();
        rows.extend(up);
        Ok(Self { geom, rows, y_max })
    }

    /// The s-holomorphic function on an edge.
    pub fn value(&self, e: &Edge) -> Result<C> {
        let row = |y: i32| -> Result<&Vec<C>> {
            if y.abs() > self.y_max {
                return domain(format!("height {y} outside the band"));
            }
            Ok(&self.rows[(y + self.y_max) as usize])
        };
        if e.is_horizontal() {
            return Ok(row(e.im2 / 2)?[self.geom.dual_index(e.re2)?]);
        }
        let x = e.re2 / 2;
        let (yn, ys) = ((e.im2 + 1) / 2, (e.im2 - 1) / 2);
        if x == self.geom.b {
            let j = self.geom.dual_index(2 * x - 1)?;
            Ok(sh_vertical(row(yn)?[j], row(ys)?[j], false))
        } else {
            let j = self.geom.dual_index(2 * x + 1)?;
            Ok(sh_vertical(row(yn)?[j], row(ys)?[j], true))
        }
    }

    /// `(m, m*) = (e^{3 i pi/4} F / 2, e^{-i pi/4} conj F / 2)`.
    pub fn coefficients(&self, e: &Edge) -> Result<(C, C)> {
        let f = self.value(e)?;
        Ok((C::from_polar(0.5, 3.0 * FRAC_PI_4) * f, C::from_polar(0.5, -FRAC_PI_4) * f.conj()))
    }
}

/// Largest deviations found by [`verify_fermion_field_extension`], relative to the operators involved.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ExtensionReport {
    pub east_west: f64,
    pub east_left: f64,
    pub west_right: f64,
    pub csh: f64,
    pub crbv: f64,
    pub coefficient_icsh: f64,
    pub coefficient_icrbv: f64,
    pub closedness: f64,
    pub slidability: f64,
    pub height_independence: f64,
}

impl ExtensionReport {
    pub fn max(&self) -> f64 {
        [
            self.east_west,
            self.east_left,
            self.west_right,
            self.csh,
            self.crbv,
            self.coefficient_icsh,
            self.coefficient_icrbv,
            self.closedness,
            self.slidability,
            self.height_independence,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn rel(diff: &Op, scale: f64) -> f64 {
    op_norm(diff) / scale.max(1.0)
}

fn vertex_step(v0: (i32, i32), v1: (i32, i32)) -> C {
    C::new((v1.0 - v0.0) as f64, (v1.1 - v0.1) as f64)
}

/// Checks the vertical-edge expressions, CSH, CRBV and the 1-form properties on a band of heights.
///
/// `functions` are cross-section functions whose s-holomorphic extensions supply the
/// coefficient pairs; heights run over `-y_max..=y_max` for horizontal edges.
pub fn verify_fermion_field_extension(geom: StripGeometry, y_max: i32, functions: &[Vec<C>]) -> Result<ExtensionReport> {
    if y_max < 1 {
        return domain("the band needs at least one row above and below height zero");
    }
    let field = FermionField::new(geom, y_max)?;
    let (a, b) = (geom.a, geom.b);
    let mut r = ExtensionReport::default();
    let mut vert: HashMap<(i32, i32), EdgeFermions> = HashMap::new();
    for y2 in (-2 * y_max + 1..2 * y_max).step_by(2) {
        for x in a..=b {
            let e = if x < b { Some(field.vertical_expr(x, y2, VerticalExpr::East)?) } else { None };
            let w = if x > a { Some(field.vertical_expr(x, y2, VerticalExpr::West)?) } else { None };
            if let (Some(e), Some(w)) = (&e, &w) {
                let s = op_norm(&e.psi).max(op_norm(&e.psistar));
                r.east_west = r.east_west.max(rel(&(&e.psi - &w.psi), s)).max(rel(&(&e.psistar - &w.psistar), s));
            }
            if x == a {
                let l = field.vertical_expr(x, y2, VerticalExpr::Left)?;
                let e = e.as_ref().expect("east exists on the left boundary");
                let s = op_norm(&e.psi).max(op_norm(&e.psistar));
                r.east_left = r.east_left.max(rel(&(&e.psi - &l.psi), s)).max(rel(&(&e.psistar - &l.psistar), s));
                r.crbv = r.crbv.max(rel(&(&e.psi + &e.psistar * C::i()), s));
            }
            if x == b {
                let rr = field.vertical_expr(x, y2, VerticalExpr::Right)?;
                let w = w.as_ref().expect("west exists on the right boundary");
                let s = op_norm(&w.psi).max(op_norm(&w.psistar));
                r.west_right = r.west_right.max(rel(&(&w.psi - &rr.psi), s)).max(rel(&(&w.psistar - &rr.psistar), s));
                r.crbv = r.crbv.max(rel(&(&w.psi - &w.psistar * C::i()), s));
            }
            vert.insert((x, y2), e.or(w).expect("edge has a side"));
        }
    }
    let get = |e: &Edge| -> Result<EdgeFermions> {
        if e.is_horizontal() {
            Ok(field.horizontal(e.re2, e.im2 / 2)?.clone())
        } else {
            vert.get(&(e.re2 / 2, e.im2)).cloned().ok_or_else(|| Error::Domain("edge outside the band".into()))
        }
    };
    let faces = plaquettes(&geom, -y_max, y_max);
    let pairs: Vec<CoefficientPair> =
        functions.iter().map(|f| CoefficientPair::from_function(geom, f, y_max)).collect::<Result<_>>()?;
    for p in &faces {
        let (vs, es) = (p.vertices(), p.edges());
        let ops: Vec<EdgeFermions> = es.iter().map(&get).collect::<Result<_>>()?;
        let scale = ops.iter().map(|o| op_norm(&o.psi).max(op_norm(&o.psistar))).fold(0.0, f64::max);
        for j in 0..4 {
            let (z1, z2) = ((j + 3) % 4, j);
            let v2 = (2 * vs[j].0, 2 * vs[j].1);
            let c = sh_coefficient(v2, p.centre2());
            let lhs = &ops[z1].psi + &ops[z1].psistar * c;
            let rhs = &ops[z2].psi + &ops[z2].psistar * c;
            r.csh = r.csh.max(rel(&(lhs - rhs), scale));
        }
        for pair in &pairs {
            let m: Vec<(C, C)> = es.iter().map(|e| pair.coefficients(e)).collect::<Result<_>>()?;
            let mscale = m.iter().map(|(u, v)| u.norm().max(v.norm())).fold(0.0, f64::max).max(1.0);
            for j in 0..4 {
                let (z1, z2) = ((j + 3) % 4, j);
                let c = sh_coefficient((2 * vs[j].0, 2 * vs[j].1), p.centre2());
                let d = (m[z1].0 - c * m[z1].1) - (m[z2].0 - c * m[z2].1);
                r.coefficient_icsh = r.coefficient_icsh.max(d.norm() / mscale);
            }
            let mut integral = DMatrix::zeros(field.space.dim(), field.space.dim());
            for j in 0..4 {
                let dz = vertex_step(vs[j], vs[(j + 1) % 4]);
                integral += &ops[j].psi * (m[j].0 * dz) + &ops[j].psistar * (m[j].1 * dz.conj());
            }
            r.closedness = r.closedness.max(rel(&integral, scale * mscale));
        }
    }
    for pair in &pairs {
        for y2 in (-2 * y_max + 1..2 * y_max).step_by(2) {
            for (x, sign) in [(a, -1.0), (b, 1.0)] {
                let e = Edge::vertical(x, y2);
                let (m, ms) = pair.coefficients(&e)?;
                let mscale = m.norm().max(ms.norm()).max(1.0);
                r.coefficient_icrbv = r.coefficient_icrbv.max((m + C::i() * sign * ms).norm() / mscale);
                let o = get(&e)?;
                let s = op_norm(&o.psi).max(op_norm(&o.psistar));
                let integral = &o.psi * (C::i() * m) - &o.psistar * (C::i() * ms);
                r.slidability = r.slidability.max(rel(&integral, s * mscale));
            }
        }
        let across = |y: i32| -> Result<(Op, f64)> {
            let mut acc = DMatrix::zeros(field.space.dim(), field.space.dim());
            let mut s = 0.0f64;
            for x2 in geom.dual_sites() {
                let e = Edge::horizontal(x2, y);
                let (m, ms) = pair.coefficients(&e)?;
                let o = field.horizontal(x2, y)?;
                s = s.max(op_norm(&o.psi).max(op_norm(&o.psistar)) * m.norm().max(ms.norm()));
                acc += &o.psi * m + &o.psistar * ms;
            }
            Ok((acc, s))
        };
        let (zero, s0) = across(0)?;
        for y in -y_max..=y_max {
            let (v, s) = across(y)?;
            r.height_independence = r.height_independence.max(rel(&(v - &zero), s.max(s0)));
        }
    }
    Ok(r)
}
