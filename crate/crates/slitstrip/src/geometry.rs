//! Strip and slit-strip geometry, half-integer index sets and edge addressing.
//!
//! Half-integers are stored as the odd integer `2k`; there is no floating
//! representation of an index anywhere in the crate.

use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A lattice strip with vertical boundaries at `a < 0 < b`.
///
/// The slit (when used) runs down from the origin along `x = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StripGeometry {
    pub a: i32,
    pub b: i32,
}

impl StripGeometry {
    pub fn new(a: i32, b: i32) -> Result<Self> {
        if a >= 0 {
            return domain(format!("a must be negative (got a={a})"));
        }
        if b <= 0 {
            return domain(format!("b must be positive (got b={b})"));
        }
        Ok(Self { a, b })
    }

    /// Balanced geometry of width `width`, with the extra site on the right for odd widths.
    pub fn symmetric(width: usize) -> Result<Self> {
        if width < 2 {
            return domain(format!("width must be at least 2 (got {width})"));
        }
        let w = width as i32;
        Self::new(-(w / 2), w - w / 2)
    }

    pub fn width(&self) -> usize {
        (self.b - self.a) as usize
    }

    pub fn width_left(&self) -> usize {
        (-self.a) as usize
    }

    pub fn width_right(&self) -> usize {
        self.b as usize
    }

    /// Twice the dual cross-section sites, `2a+1, 2a+3, ..., 2b-1`.
    pub fn dual_sites(&self) -> Vec<i32> {
        (0..self.width() as i32).map(|j| 2 * self.a + 1 + 2 * j).collect()
    }

    /// Index of the dual site `x'` (given as `2x'`) in `0..width`.
    pub fn dual_index(&self, x2: i32) -> Result<usize> {
        if x2 % 2 == 0 || x2 < 2 * self.a + 1 || x2 > 2 * self.b - 1 {
            return domain(format!("dual site {}/2 outside ({}, {})", x2, self.a, self.b));
        }
        Ok(((x2 - 2 * self.a - 1) / 2) as usize)
    }

    /// Dual index where the right half of the cross-section begins.
    pub fn slit_index(&self) -> usize {
        self.width_left()
    }

    pub fn k_set(&self) -> Vec<i32> {
        k_set(self.width())
    }
}

impl fmt::Display for StripGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// `K^(w) = {1/2, 3/2, ..., w - 1/2}` in the doubled encoding.
pub fn k_set(w: usize) -> Vec<i32> {
    (0..w as i32).map(|j| 2 * j + 1).collect()
}

/// Position of `k` (doubled) in `K^(w)`.
pub fn k_index(k2: i32) -> usize {
    debug_assert!(k2 > 0 && k2 % 2 == 1);
    ((k2 - 1) / 2) as usize
}

/// A finite set of positive half-integers, kept strictly increasing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfIntSet(Vec<i32>);

impl HalfIntSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a set from doubled values; they must be positive, odd and distinct.
    pub fn from_twice(values: &[i32]) -> Result<Self> {
        let mut v = values.to_vec();
        for &x in &v {
            if x <= 0 || x % 2 == 0 {
                return domain(format!("{x} is not a positive odd integer"));
            }
        }
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return domain("repeated index");
        }
        Ok(Self(v))
    }

    pub fn twice(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> Option<i32> {
        self.0.last().copied()
    }

    pub fn contains(&self, k2: i32) -> bool {
        self.0.binary_search(&k2).is_ok()
    }

    /// True when every element lies in `K^(w)`.
    pub fn fits(&self, w: usize) -> bool {
        self.max().is_none_or(|m| m < 2 * w as i32)
    }

    pub fn without(&self, k2: i32) -> Self {
        Self(self.0.iter().copied().filter(|&x| x != k2).collect())
    }

    pub fn with(&self, k2: i32) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&k2) {
            v.insert(pos, k2);
        }
        Self(v)
    }

    /// Comma separated doubled values, the CLI encoding.
    pub fn encode(&self) -> String {
        self.0.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let mut v = Vec::new();
        for tok in s.split(',') {
            let t = tok.trim();
            match t.parse::<i32>() {
                Ok(x) => v.push(x),
                Err(_) => return domain(format!("malformed index '{t}'")),
            }
        }
        Self::from_twice(&v)
    }

    /// All subsets of `K^(w)`, in a fixed order.
    pub fn all_subsets(w: usize) -> Vec<Self> {
        let ks = k_set(w);
        (0u64..1 << w)
            .map(|mask| Self(ks.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &k)| k).collect()))
            .collect()
    }
}

impl fmt::Display for HalfIntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}/2", x)?;
        }
        write!(f, "}}")
    }
}

/// `(-1)^(m-j)` if `k` is the `j`-th smallest of the `m` elements, else 0.
pub fn signed_indicator(set: &HalfIntSet, k2: i32) -> i32 {
    match set.0.binary_search(&k2) {
        Ok(pos) => {
            let m = set.len();
            if (m - (pos + 1)).is_multiple_of(2) {
                1
            } else {
                -1
            }
        }
        Err(_) => 0,
    }
}

/// Side of the slit for doubled edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlitSide {
    Left,
    Right,
}

/// Edge midpoint as doubled real and imaginary parts.
///
/// Horizontal edges have `(odd, even)` addresses, vertical ones `(even, odd)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub re2: i32,
    pub im2: i32,
    pub side: Option<SlitSide>,
}

impl Edge {
    pub fn horizontal(x2: i32, y: i32) -> Self {
        debug_assert!(x2 % 2 != 0);
        Self { re2: x2, im2: 2 * y, side: None }
    }

    pub fn vertical(x: i32, y2: i32) -> Self {
        debug_assert!(y2 % 2 != 0);
        Self { re2: 2 * x, im2: y2, side: None }
    }

    pub fn is_horizontal(&self) -> bool {
        self.re2 % 2 != 0
    }
}

/// A unit face of the strip, identified by its lower left vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Plaquette {
    pub x: i32,
    pub y: i32,
}

impl Plaquette {
    /// Doubled coordinates of the face centre.
    pub fn centre2(&self) -> (i32, i32) {
        (2 * self.x + 1, 2 * self.y + 1)
    }

    /// Corners in counterclockwise order starting from the lower left.
    pub fn vertices(&self) -> [(i32, i32); 4] {
        let (x, y) = (self.x, self.y);
        [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)]
    }

    /// Edge `j` runs from vertex `j` to vertex `j+1` (cyclically): bottom, right, top, left.
    pub fn edges(&self) -> [Edge; 4] {
        let (x, y) = (self.x, self.y);
        [
            Edge::horizontal(2 * x + 1, y),
            Edge::vertical(x + 1, 2 * y + 1),
            Edge::horizontal(2 * x + 1, y + 1),
            Edge::vertical(x, 2 * y + 1),
        ]
    }
}

/// Faces of the strip between heights `y0` and `y1`.
pub fn plaquettes(geom: &StripGeometry, y0: i32, y1: i32) -> Vec<Plaquette> {
    let mut out = Vec::new();
    for y in y0..y1 {
        for x in geom.a..geom.b {
            out.push(Plaquette { x, y });
        }
    }
    out
}
