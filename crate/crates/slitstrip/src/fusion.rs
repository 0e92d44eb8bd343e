//! Ising fusion coefficients, directly from eigenvectors and through the pole-function recursion.

use crate::clifford::{mode_of_function, CliffordElement, C};
use crate::discrete_cx::{embed, EigenBasis, Extremity, SlitData};
use crate::error::{domain, Error, Result};
use crate::geometry::{signed_indicator, HalfIntSet, StripGeometry};
use crate::par::Exec;
use crate::statespace::{RowSpace, Sector, StateVector, BETA};
use crate::transfer::{perron_frobenius, PerronData, PfOptions, TransferOperator, Variant};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

/// Widest strip handled by the state-vector route.
pub const DIRECT_MAX_WIDTH: usize = 14;

/// Largest imaginary part tolerated in a fusion inner product.
const IMAG_TOL: f64 = 1e-10;

/// Index triple `(alpha, beta_L, beta_R)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FusionKey {
    pub alpha: HalfIntSet,
    pub beta_left: HalfIntSet,
    pub beta_right: HalfIntSet,
}

impl FusionKey {
    pub fn new(alpha: HalfIntSet, beta_left: HalfIntSet, beta_right: HalfIntSet) -> Self {
        Self { alpha, beta_left, beta_right }
    }

    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Builds a key from doubled values.
    pub fn from_twice(alpha: &[i32], beta_left: &[i32], beta_right: &[i32]) -> Result<Self> {
        Ok(Self::new(
            HalfIntSet::from_twice(alpha)?,
            HalfIntSet::from_twice(beta_left)?,
            HalfIntSet::from_twice(beta_right)?,
        ))
    }

    /// Parses `"alpha;beta_L;beta_R"` with comma separated doubled values.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(';').collect();
        if parts.len() != 3 {
            return domain(format!("key '{s}' must have three ';'-separated slots"));
        }
        Ok(Self::new(HalfIntSet::parse(parts[0])?, HalfIntSet::parse(parts[1])?, HalfIntSet::parse(parts[2])?))
    }

    pub fn encode(&self) -> String {
        format!("{};{};{}", self.alpha.encode(), self.beta_left.encode(), self.beta_right.encode())
    }

    pub fn depth(&self) -> usize {
        self.alpha.len() + self.beta_left.len() + self.beta_right.len()
    }

    pub fn set(&self, e: Extremity) -> &HalfIntSet {
        match e {
            Extremity::Top => &self.alpha,
            Extremity::Left => &self.beta_left,
            Extremity::Right => &self.beta_right,
        }
    }

    fn replace(&self, e: Extremity, s: HalfIntSet) -> Self {
        let mut k = self.clone();
        match e {
            Extremity::Top => k.alpha = s,
            Extremity::Left => k.beta_left = s,
            Extremity::Right => k.beta_right = s,
        }
        k
    }

    /// Checks every slot against its width.
    pub fn check(&self, geom: &StripGeometry) -> Result<()> {
        for (set, w, name) in [
            (&self.alpha, geom.width(), "alpha"),
            (&self.beta_left, geom.width_left(), "beta_L"),
            (&self.beta_right, geom.width_right(), "beta_R"),
        ] {
            if !set.fits(w) {
                return domain(format!("{name} = {set} exceeds width {w}"));
            }
        }
        Ok(())
    }

    /// Every key with slots inside the given widths and total size at most `depth`.
    pub fn enumerate(widths: [usize; 3], depth: usize) -> Vec<Self> {
        let subsets = |w: usize| small_subsets(w, depth);
        let (sa, sl, sr) = (subsets(widths[0]), subsets(widths[1]), subsets(widths[2]));
        let mut out = Vec::new();
        for a in &sa {
            for l in &sl {
                for r in &sr {
                    if a.len() + l.len() + r.len() <= depth {
                        out.push(Self::new(a.clone(), l.clone(), r.clone()));
                    }
                }
            }
        }
        out.sort();
        out
    }
}

/// Subsets of `K^(w)` with at most `depth` elements.
fn small_subsets(w: usize, depth: usize) -> Vec<HalfIntSet> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<i32>> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for cur in &frontier {
            let start = cur.last().map_or(1, |&m| m + 2);
            for k in (start..2 * w as i32).step_by(2) {
                let mut v = cur.clone();
                v.push(k);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.into_iter().map(|v| HalfIntSet::from_twice(&v).expect("valid")).collect()
}

impl fmt::Display for FusionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; {}, {})", self.alpha, self.beta_left, self.beta_right)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Direct,
    Recursive,
    Continuum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Raw,
    RatioToVacuum,
}

/// Fusion coefficients of one geometry from one route.
#[derive(Clone, Debug, Serialize)]
pub struct FusionTable {
    pub provenance: Provenance,
    pub normalization: Normalization,
    pub entries: BTreeMap<FusionKey, f64>,
}

impl FusionTable {
    pub fn new(provenance: Provenance, normalization: Normalization) -> Self {
        Self { provenance, normalization, entries: BTreeMap::new() }
    }

    pub fn get(&self, key: &FusionKey) -> Option<f64> {
        self.entries.get(key).copied()
    }

    /// Largest absolute difference over the common keys.
    pub fn max_difference(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .filter_map(|(k, v)| other.entries.get(k).map(|w| (v - w).abs()))
            .fold(0.0, f64::max)
    }
}

/// Renormalization constants of the monochromatic and the minus-plus-plus boundary conditions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Renormalization {
    pub z_mono: f64,
    pub z_mpp: f64,
}

fn real_part(z: C, what: &str) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * z.norm().max(1.0) {
        return Err(Error::Numerical(format!("{what} has imaginary part {:e}", z.im)));
    }
    Ok(z.re)
}

/// Closed form of the vacuum eigenvalue, `e^beta (2 + sqrt 2)^l prod (1 + 1/lambda_k)^{-1}`.
///
/// The product runs over the translation eigenvalues of every extremity of the
/// domain: the strip alone, or both legs of the slit-strip.
pub fn vacuum_eigenvalue(extremities: &[&EigenBasis]) -> f64 {
    let l: usize = extremities.iter().map(|b| b.width).sum();
    let prod: f64 = extremities.iter().flat_map(|b| b.lambda.iter()).map(|x| 1.0 / (1.0 + 1.0 / x)).product();
    BETA.exp() * (2.0 + std::f64::consts::SQRT_2).powi(l as i32) * prod
}

/// Perron-Frobenius vacua and the mode data of a slit-strip, on the irreducible space.
pub struct DirectFusion {
    pub space: RowSpace,
    pub data: Arc<SlitData>,
    pub exec: Exec,
    pub strip: TransferOperator,
    pub slit: TransferOperator,
    pub top_vacuum: PerronData,
    pub slit_vacuum: PerronData,
}

impl DirectFusion {
    pub fn new(geom: StripGeometry, exec: Exec) -> Result<Self> {
        Self::with_data(Arc::new(SlitData::new(geom)?), exec)
    }

    pub fn with_data(data: Arc<SlitData>, exec: Exec) -> Result<Self> {
        let geom = data.geom;
        if geom.width() > DIRECT_MAX_WIDTH {
            return domain(format!("width {} above the direct-route cap {DIRECT_MAX_WIDTH}", geom.width()));
        }
        let space = RowSpace::irreducible(geom);
        let strip = TransferOperator::with_exec(space, Variant::Strip, exec);
        let slit = TransferOperator::with_exec(space, Variant::Slit, exec);
        let opts = PfOptions { estimate_gap: false, ..PfOptions::default() };
        let top_vacuum = perron_frobenius(&strip, Sector::PP, opts)?;
        let slit_vacuum = perron_frobenius(&slit, Sector::PPP, opts)?;
        Ok(Self { space, data, exec, strip, slit, top_vacuum, slit_vacuum })
    }

    pub fn geom(&self) -> StripGeometry {
        self.data.geom
    }

    /// Creation mode of extremity `e` with index `-k`.
    pub fn creation(&self, e: Extremity, k2: i32) -> Result<CliffordElement> {
        self.mode(e, -k2)
    }

    /// Mode of extremity `e` with signed doubled index.
    pub fn mode(&self, e: Extremity, k2: i32) -> Result<CliffordElement> {
        let w = self.data.width_of(e) as i32;
        if k2 == 0 || k2 % 2 == 0 || k2.abs() >= 2 * w {
            return domain(format!("k = {k2}/2 out of range for {e:?}"));
        }
        let l = self.geom().width();
        let f = self.data.eigenfunction(e, k2);
        debug_assert_eq!(f.len(), l);
        Ok(mode_of_function(&embed(f, 0, l)))
    }

    fn create(&self, e: Extremity, set: &HalfIntSet, mut v: StateVector) -> Result<StateVector> {
        for &k2 in set.twice() {
            v = self.creation(e, k2)?.apply(&self.space, &v, self.exec)?;
        }
        Ok(v)
    }

    /// `v_alpha`, with the smallest index created first.
    pub fn top_eigenvector(&self, alpha: &HalfIntSet) -> Result<StateVector> {
        if !alpha.fits(self.geom().width()) {
            return domain(format!("alpha = {alpha} exceeds width {}", self.geom().width()));
        }
        self.create(Extremity::Top, alpha, self.top_vacuum.vector.clone())
    }

    /// `w_{beta_R; beta_L}`: left creations first, then right ones.
    pub fn slit_eigenvector(&self, beta_left: &HalfIntSet, beta_right: &HalfIntSet) -> Result<StateVector> {
        let g = self.geom();
        if !beta_left.fits(g.width_left()) || !beta_right.fits(g.width_right()) {
            return domain(format!("leg sets {beta_left}, {beta_right} exceed the leg widths"));
        }
        let v = self.create(Extremity::Left, beta_left, self.slit_vacuum.vector.clone())?;
        self.create(Extremity::Right, beta_right, v)
    }

    /// `mu_alpha = mu_0 / prod lambda_k`.
    pub fn top_eigenvalue(&self, alpha: &HalfIntSet) -> f64 {
        let lam = &self.data.top.lambda;
        alpha.twice().iter().fold(self.top_vacuum.eigenvalue, |m, &k| m / lam[crate::geometry::k_index(k)])
    }

    pub fn slit_eigenvalue(&self, beta_left: &HalfIntSet, beta_right: &HalfIntSet) -> f64 {
        let (ll, lr) = (&self.data.left.lambda, &self.data.right.lambda);
        let m = beta_left.twice().iter().fold(self.slit_vacuum.eigenvalue, |m, &k| m / ll[crate::geometry::k_index(k)]);
        beta_right.twice().iter().fold(m, |m, &k| m / lr[crate::geometry::k_index(k)])
    }

    /// `B = v_alpha^dagger w_{beta_R; beta_L}`.
    pub fn coefficient(&self, key: &FusionKey) -> Result<f64> {
        key.check(&self.geom())?;
        let v = self.top_eigenvector(&key.alpha)?;
        let w = self.slit_eigenvector(&key.beta_left, &key.beta_right)?;
        real_part(self.exec.dot(&v, &w), "fusion coefficient")
    }

    pub fn vacuum(&self) -> Result<f64> {
        self.coefficient(&FusionKey::vacuum())
    }

    /// `B / B_0`.
    pub fn ratio(&self, key: &FusionKey) -> Result<f64> {
        Ok(self.coefficient(key)? / self.vacuum()?)
    }

    /// Raw and ratio tables over `keys`, sharing the eigenvectors.
    pub fn table(&self, keys: &[FusionKey], normalization: Normalization) -> Result<FusionTable> {
        let mut tops: HashMap<&HalfIntSet, StateVector> = HashMap::new();
        let mut slits: HashMap<(&HalfIntSet, &HalfIntSet), StateVector> = HashMap::new();
        let mut table = FusionTable::new(Provenance::Direct, normalization);
        let scale = match normalization {
            Normalization::Raw => 1.0,
            Normalization::RatioToVacuum => 1.0 / self.vacuum()?,
        };
        for key in keys {
            key.check(&self.geom())?;
            if !tops.contains_key(&key.alpha) {
                tops.insert(&key.alpha, self.top_eigenvector(&key.alpha)?);
            }
            let lr = (&key.beta_left, &key.beta_right);
            if let std::collections::hash_map::Entry::Vacant(e) = slits.entry(lr) {
                e.insert(self.slit_eigenvector(lr.0, lr.1)?);
            }
            let b = real_part(self.exec.dot(&tops[&key.alpha], &slits[&lr]), "fusion coefficient")?;
            table.entries.insert(key.clone(), b * scale);
        }
        Ok(table)
    }

    /// Constants relating fusion coefficients to renormalized boundary correlations.
    pub fn renormalization_constants(&self) -> Result<Renormalization> {
        let one = |_: &[i32]| C::new(1.0, 0.0);
        let top_one = self.space.lift(one);
        let slit_one = self.space.lift_split(one, one);
        let half = HalfIntSet::from_twice(&[1])?;
        let ex = self.exec;
        let z_mono = 2.0
            * real_part(ex.dot(&self.top_vacuum.vector, &top_one), "overlap")?
            * real_part(ex.dot(&slit_one, &self.slit_vacuum.vector), "overlap")?;
        // The two overlaps carry opposite phases; only their product is real.
        let z_mpp = real_part(
            ex.dot(&self.top_eigenvector(&half)?, &top_one)
                * ex.dot(&slit_one, &self.slit_eigenvector(&half, &HalfIntSet::empty())?),
            "minus-plus-plus constant",
        )?;
        Ok(Renormalization { z_mono, z_mpp })
    }
}

/// Inner products `<f^a_{k'}, p^b_k>` consumed by the recursion.
pub trait PoleInnerProducts: Sync {
    /// Width of extremity `e`, or `None` when unbounded.
    fn bound(&self, e: Extremity) -> Option<usize>;
    fn ip(&self, a: Extremity, k2p: i32, b: Extremity, k2: i32) -> Result<f64>;
}

impl PoleInnerProducts for SlitData {
    fn bound(&self, e: Extremity) -> Option<usize> {
        Some(self.width_of(e))
    }

    fn ip(&self, a: Extremity, k2p: i32, b: Extremity, k2: i32) -> Result<f64> {
        SlitData::ip(self, a, k2p, b, k2)
    }
}

impl<T: PoleInnerProducts + Send> PoleInnerProducts for Arc<T> {
    fn bound(&self, e: Extremity) -> Option<usize> {
        (**self).bound(e)
    }

    fn ip(&self, a: Extremity, k2p: i32, b: Extremity, k2: i32) -> Result<f64> {
        (**self).ip(a, k2p, b, k2)
    }
}

/// Priority among the extremities when choosing the index to peel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PeelOrder(pub [Extremity; 3]);

impl PeelOrder {
    /// Top, then left leg, then right leg.
    pub const STANDARD: PeelOrder = PeelOrder([Extremity::Top, Extremity::Left, Extremity::Right]);

    pub fn all() -> [PeelOrder; 6] {
        use Extremity::*;
        [
            PeelOrder([Top, Left, Right]),
            PeelOrder([Top, Right, Left]),
            PeelOrder([Left, Top, Right]),
            PeelOrder([Left, Right, Top]),
            PeelOrder([Right, Top, Left]),
            PeelOrder([Right, Left, Top]),
        ]
    }
}

impl Default for PeelOrder {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Memoized recursion over keys, normalized so that the vacuum coefficient is 1.
pub struct RecursiveFusion<I: PoleInnerProducts> {
    pub ips: I,
    pub order: PeelOrder,
    memo: RwLock<HashMap<FusionKey, f64>>,
}

fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl<I: PoleInnerProducts> RecursiveFusion<I> {
    pub fn new(ips: I) -> Self {
        Self::with_order(ips, PeelOrder::STANDARD)
    }

    pub fn with_order(ips: I, order: PeelOrder) -> Self {
        Self { ips, order, memo: RwLock::new(HashMap::new()) }
    }

    pub fn check(&self, key: &FusionKey) -> Result<()> {
        for e in [Extremity::Top, Extremity::Left, Extremity::Right] {
            if let Some(w) = self.ips.bound(e) {
                if !key.set(e).fits(w) {
                    return domain(format!("{:?} indices {} exceed width {w}", e, key.set(e)));
                }
            }
        }
        Ok(())
    }

    pub fn cached(&self) -> usize {
        self.memo.read().expect("memo lock").len()
    }

    /// `B / B_0` for one key.
    pub fn value(&self, key: &FusionKey) -> Result<f64> {
        self.check(key)?;
        self.eval(key)
    }

    /// Values for many keys; the cache is shared between workers.
    pub fn values(&self, keys: &[FusionKey], exec: Exec) -> Result<Vec<f64>> {
        exec.map(keys, |k| self.value(k)).into_iter().collect()
    }

    pub fn table(&self, keys: &[FusionKey], exec: Exec) -> Result<FusionTable> {
        let vals = self.values(keys, exec)?;
        let mut t = FusionTable::new(Provenance::Recursive, Normalization::RatioToVacuum);
        t.entries.extend(keys.iter().cloned().zip(vals));
        Ok(t)
    }

    fn eval(&self, key: &FusionKey) -> Result<f64> {
        if key.depth() == 0 {
            return Ok(1.0);
        }
        if let Some(&v) = self.memo.read().expect("memo lock").get(key) {
            return Ok(v);
        }
        let v = self.step(key)?;
        self.memo.write().expect("memo lock").entry(key.clone()).or_insert(v);
        Ok(v)
    }

    fn step(&self, key: &FusionKey) -> Result<f64> {
        use Extremity::*;
        let e = *self.order.0.iter().find(|&&e| !key.set(e).is_empty()).expect("non-empty key");
        let k = key.set(e).max().expect("non-empty set");
        let base = key.replace(e, key.set(e).without(k));
        let (alpha, bl, br) = (&base.alpha, &base.beta_left, &base.beta_right);
        // Top peels carry signs (+, +, -); leg peels carry (-, -, +).
        let s = if e == Top { 1.0 } else { -1.0 };
        let mut acc = 0.0;
        for &kp in bl.twice() {
            let c = self.ips.ip(Left, kp, e, k)? * sign(br.len()) * signed_indicator(bl, kp) as f64;
            acc += s * c * self.eval(&base.replace(Left, bl.without(kp)))?;
        }
        for &kp in br.twice() {
            let c = self.ips.ip(Right, kp, e, k)? * signed_indicator(br, kp) as f64;
            acc += s * c * self.eval(&base.replace(Right, br.without(kp)))?;
        }
        for &kp in alpha.twice() {
            let c = self.ips.ip(Top, -kp, e, k)? * signed_indicator(alpha, kp) as f64;
            acc -= s * c * self.eval(&base.replace(Top, alpha.without(kp)))?;
        }
        if e == Left {
            acc *= sign(br.len());
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_round_trip() {
        let k = FusionKey::parse("1,3;;5").unwrap();
        assert_eq!(k.alpha.twice(), &[1, 3]);
        assert!(k.beta_left.is_empty());
        assert_eq!(k.encode(), "1,3;;5");
        assert_eq!(k.depth(), 3);
        assert!(FusionKey::parse("1;2;").is_err());
        assert!(FusionKey::parse("1;1").is_err());
    }

    #[test]
    fn enumeration_counts() {
        // Subsets of size <= 2 in widths 3, 1, 2: sizes (1+3+3), (1+1), (1+2+1).
        let keys = FusionKey::enumerate([3, 1, 2], 2);
        for k in &keys {
            assert!(k.depth() <= 2);
        }
        let brute = {
            let mut n = 0;
            for a in HalfIntSet::all_subsets(3) {
                for l in HalfIntSet::all_subsets(1) {
                    for r in HalfIntSet::all_subsets(2) {
                        if a.len() + l.len() + r.len() <= 2 {
                            n += 1;
                        }
                    }
                }
            }
            n
        };
        assert_eq!(keys.len(), brute);
    }

    #[test]
    fn small_direct_vs_recursive() {
        let g = StripGeometry::new(-1, 2).unwrap();
        let d = DirectFusion::new(g, Exec::Sequential).unwrap();
        let r = RecursiveFusion::new(d.data.clone());
        assert!(d.vacuum().unwrap() > 0.0);
        for key in FusionKey::enumerate([3, 1, 2], 3) {
            let a = d.ratio(&key).unwrap();
            let b = r.value(&key).unwrap();
            assert!((a - b).abs() < 1e-9, "{key}: direct {a} recursive {b}");
        }
    }
}
