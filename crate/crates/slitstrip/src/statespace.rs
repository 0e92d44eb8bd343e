//! Spin-row state spaces, sectors, boundary-function lifts and the enumeration oracle.
//!
//! Bit `s` of a row is the spin at site `a + s` (bit set means `+1`). The
//! irreducible space keeps `l` bits with the spin at `b` implicitly `+1`; the
//! full space keeps all `l + 1` bits.

use crate::error::{domain, Result};
use crate::geometry::StripGeometry;
use crate::par::Exec;
use num_complex::Complex64;

/// Critical inverse temperature `log(1 + sqrt 2) / 2`.
pub const BETA: f64 = 0.440_686_793_509_771_5;

/// Largest number of free spins the oracle will enumerate.
pub const ORACLE_MAX_FREE: usize = 24;

pub type StateVector = Vec<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Irreducible,
    Full,
}

/// Boundary-spin selector; `None` entries are unconstrained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sector {
    pub left: Option<i8>,
    pub slit: Option<i8>,
    pub right: Option<i8>,
}

impl Sector {
    pub const fn strip(left: i8, right: i8) -> Self {
        Self { left: Some(left), slit: None, right: Some(right) }
    }

    pub const fn slit(left: i8, slit: i8, right: i8) -> Self {
        Self { left: Some(left), slit: Some(slit), right: Some(right) }
    }

    pub const PP: Sector = Sector::strip(1, 1);
    pub const MP: Sector = Sector::strip(-1, 1);
    pub const PPP: Sector = Sector::slit(1, 1, 1);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowSpace {
    pub geom: StripGeometry,
    pub kind: SpaceKind,
}

impl RowSpace {
    pub fn irreducible(geom: StripGeometry) -> Self {
        Self { geom, kind: SpaceKind::Irreducible }
    }

    pub fn full(geom: StripGeometry) -> Self {
        Self { geom, kind: SpaceKind::Full }
    }

    pub fn width(&self) -> usize {
        self.geom.width()
    }

    pub fn bits(&self) -> usize {
        match self.kind {
            SpaceKind::Irreducible => self.width(),
            SpaceKind::Full => self.width() + 1,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.bits()
    }

    /// Spin at site `a + s`.
    #[inline]
    pub fn spin(&self, row: usize, s: usize) -> i32 {
        if (s == self.width() && self.kind == SpaceKind::Irreducible) || row >> s & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn spin_at(&self, row: usize, x: i32) -> i32 {
        self.spin(row, (x - self.geom.a) as usize)
    }

    pub fn spins(&self, row: usize) -> Vec<i32> {
        (0..=self.width()).map(|s| self.spin(row, s)).collect()
    }

    /// Row index of a spin pattern over sites `a..=b`.
    pub fn row_of(&self, spins: &[i32]) -> Result<usize> {
        if spins.len() != self.width() + 1 || spins.iter().any(|&s| s != 1 && s != -1) {
            return domain("spin pattern must have one +-1 entry per site");
        }
        if self.kind == SpaceKind::Irreducible && spins[self.width()] != 1 {
            return domain("rows of the irreducible space have spin +1 at b");
        }
        Ok((0..self.bits()).filter(|&s| spins[s] == 1).fold(0, |r, s| r | 1 << s))
    }

    /// Negates every spin strictly left of dual site `j` (between sites `j` and `j+1`).
    #[inline]
    pub fn fold(&self, row: usize, j: usize) -> usize {
        row ^ ((1usize << (j + 1)) - 1)
    }

    pub fn global_flip(&self, row: usize) -> Option<usize> {
        match self.kind {
            SpaceKind::Full => Some(row ^ (self.dim() - 1)),
            SpaceKind::Irreducible => None,
        }
    }

    /// `sum_x rho_x rho_{x+1}` over the row.
    pub fn bond_sum(&self, row: usize) -> i32 {
        (0..self.width()).map(|s| self.spin(row, s) * self.spin(row, s + 1)).sum()
    }

    /// Diagonal of the square root of the horizontal transfer matrix.
    pub fn hor_sqrt(&self) -> Vec<f64> {
        (0..self.dim()).map(|r| (0.5 * BETA * self.bond_sum(r) as f64).exp()).collect()
    }

    pub fn in_sector(&self, row: usize, sector: &Sector) -> bool {
        let ok = |want: Option<i8>, s: usize| want.is_none_or(|w| self.spin(row, s) == w as i32);
        ok(sector.left, 0) && ok(sector.right, self.width()) && ok(sector.slit, self.geom.width_left())
    }

    pub fn project(&self, v: &mut [Complex64], sector: &Sector) {
        for (r, x) in v.iter_mut().enumerate() {
            if !self.in_sector(r, sector) {
                *x = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// `sum_rho c_rho f(rho) e_rho`.
    pub fn lift(&self, f: impl Fn(&[i32]) -> Complex64) -> StateVector {
        let c = self.hor_sqrt();
        (0..self.dim()).map(|r| f(&self.spins(r)) * c[r]).collect()
    }

    /// Slit lift: `f_left` sees sites `a..=0`, `f_right` sees sites `0..=b`.
    pub fn lift_split(
        &self,
        f_left: impl Fn(&[i32]) -> Complex64,
        f_right: impl Fn(&[i32]) -> Complex64,
    ) -> StateVector {
        let mid = self.geom.width_left();
        self.lift(|s| f_left(&s[..=mid]) * f_right(&s[mid..]))
    }

    pub fn basis(&self, row: usize) -> StateVector {
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        v[row] = Complex64::new(1.0, 0.0);
        v
    }
}

/// Quantity summed by the oracle against the Boltzmann weights.
#[derive(Clone, Debug)]
pub enum Observable {
    /// Product of spins at lattice points `(x, y)`.
    Spins(Vec<(i32, i32)>),
    /// `f_top(top row) * f_bottom(bottom row)`, tables indexed by full-space rows.
    Rows { top: Vec<f64>, bottom: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct OracleQuery {
    pub geom: StripGeometry,
    pub h_top: usize,
    pub h_bottom: usize,
    pub slit: bool,
    pub observables: Vec<Observable>,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub partition: f64,
    /// `E[obs]` per observable.
    pub expectations: Vec<f64>,
    pub free_spins: usize,
}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

struct Lattice {
    width: usize,
    y0: i32,
    rows: usize,
    /// Variable index per (row, site).
    var: Vec<usize>,
    bonds: Vec<(usize, usize)>,
    nvars: usize,
}

impl Lattice {
    fn new(q: &OracleQuery) -> Self {
        let l = q.geom.width();
        let rows = q.h_top + q.h_bottom + 1;
        let y0 = -(q.h_bottom as i32);
        let mid = q.geom.width_left();
        let mut var = vec![usize::MAX; rows * (l + 1)];
        // Boundary columns, then the slit column below the origin, then the rest.
        let (left, right) = (0, 1);
        let mut next = 2;
        let slit_var = if q.slit {
            next += 1;
            Some(2)
        } else {
            None
        };
        for r in 0..rows {
            let y = y0 + r as i32;
            for s in 0..=l {
                var[r * (l + 1) + s] = if s == 0 {
                    left
                } else if s == l {
                    right
                } else if let Some(v) = slit_var.filter(|_| s == mid && y <= 0) {
                    v
                } else {
                    next += 1;
                    next - 1
                };
            }
        }
        let mut bonds = Vec::new();
        for r in 0..rows {
            for s in 0..=l {
                if s < l {
                    bonds.push((var[r * (l + 1) + s], var[r * (l + 1) + s + 1]));
                }
                if r + 1 < rows {
                    bonds.push((var[r * (l + 1) + s], var[(r + 1) * (l + 1) + s]));
                }
            }
        }
        Self { width: l, y0, rows, var, bonds, nvars: next }
    }

    fn var_at(&self, x: i32, y: i32, a: i32) -> Option<usize> {
        let s = x - a;
        let r = y - self.y0;
        if s < 0 || s as usize > self.width || r < 0 || r as usize >= self.rows {
            return None;
        }
        Some(self.var[r as usize * (self.width + 1) + s as usize])
    }

    fn row_bits(&self, cfg: u64, r: usize) -> usize {
        (0..=self.width).fold(0, |acc, s| acc | ((cfg >> self.var[r * (self.width + 1) + s] & 1) as usize) << s)
    }
}

/// Exhaustive sum over all admissible configurations of the truncated geometry.
pub fn oracle(q: &OracleQuery, exec: Exec) -> Result<OracleResult> {
    let lat = Lattice::new(q);
    if lat.nvars > ORACLE_MAX_FREE {
        return domain(format!("{} free spins exceed the enumeration cap of {}", lat.nvars, ORACLE_MAX_FREE));
    }
    let full = RowSpace::full(q.geom);
    let mut spin_masks = Vec::new();
    for obs in &q.observables {
        match obs {
            Observable::Spins(points) => {
                let mut m = Vec::new();
                for &(x, y) in points {
                    match lat.var_at(x, y, q.geom.a) {
                        Some(v) => m.push(v),
                        None => return domain(format!("point ({x},{y}) outside the truncated domain")),
                    }
                }
                spin_masks.push(m);
            }
            Observable::Rows { top, bottom } => {
                if top.len() != full.dim() || bottom.len() != full.dim() {
                    return domain("row tables must cover the full state space");
                }
                spin_masks.push(Vec::new());
            }
        }
    }
    let nobs = q.observables.len();
    let total = 1u64 << lat.nvars;
    let chunk_bits = lat.nvars.min(8);
    let chunks = 1usize << chunk_bits;
    let per = total >> chunk_bits;
    let partial = exec.map_range(chunks, |c| {
        let mut z = Compensated::default();
        let mut o = vec![Compensated::default(); nobs];
        for cfg in (c as u64 * per)..((c as u64 + 1) * per) {
            let anti: i32 = lat.bonds.iter().map(|&(i, j)| ((cfg >> i ^ cfg >> j) & 1) as i32).sum();
            let energy = lat.bonds.len() as i32 - 2 * anti;
            let w = (BETA * energy as f64).exp();
            z.add(w);
            for (k, obs) in q.observables.iter().enumerate() {
                let val = match obs {
                    Observable::Spins(_) => {
                        let flips = spin_masks[k].iter().filter(|&&v| cfg >> v & 1 == 0).count();
                        if flips % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    Observable::Rows { top, bottom } => {
                        top[lat.row_bits(cfg, lat.rows - 1)] * bottom[lat.row_bits(cfg, 0)]
                    }
                };
                o[k].add(w * val);
            }
        }
        (z, o)
    });
    let mut z = Compensated::default();
    let mut o = vec![Compensated::default(); nobs];
    for (pz, po) in partial {
        z.add(pz.value());
        for k in 0..nobs {
            o[k].add(po[k].value());
        }
    }
    let partition = z.value();
    Ok(OracleResult {
        partition,
        expectations: o.iter().map(|x| x.value() / partition).collect(),
        free_spins: lat.nvars,
    })
}
