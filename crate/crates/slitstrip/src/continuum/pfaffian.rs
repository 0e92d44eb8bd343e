//! Pfaffians of skew-symmetric matrices by expansion along the first row.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;

/// Relative tolerance on `A + A^T`.
pub const SKEW_TOL: f64 = 1e-12;

/// `Pf(A)`; zero in odd dimension and one for the empty matrix.
pub fn pfaffian(a: &DMatrix<C>) -> Result<C> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Domain(format!("{}x{} matrix is not square", n, a.ncols())));
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for i in 0..n {
        for j in 0..=i {
            if (a[(i, j)] + a[(j, i)]).norm() > SKEW_TOL * scale {
                return Err(Error::Domain(format!("matrix is not skew-symmetric at ({i}, {j})")));
            }
        }
    }
    if n % 2 == 1 {
        return Ok(C::new(0.0, 0.0));
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(expand(a, &idx))
}

fn expand(a: &DMatrix<C>, idx: &[usize]) -> C {
    match idx.len() {
        0 => C::new(1.0, 0.0),
        2 => a[(idx[0], idx[1])],
        _ => {
            let first = idx[0];
            let mut acc = C::new(0.0, 0.0);
            for p in 1..idx.len() {
                let entry = a[(first, idx[p])];
                if entry == C::new(0.0, 0.0) {
                    continue;
                }
                let rest: Vec<usize> =
                    idx[1..].iter().enumerate().filter(|&(q, _)| q + 1 != p).map(|(_, &v)| v).collect();
                let s = if p % 2 == 1 { 1.0 } else { -1.0 };
                acc += s * entry * expand(a, &rest);
            }
            acc
        }
    }
}
