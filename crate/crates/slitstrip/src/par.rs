//! Execution mode and the small set of data-parallel primitives used by the core.
//!
//! Every reduction combines per-chunk partial results in chunk order, so values
//! do not depend on the number of worker threads.

use num_complex::Complex64;
use std::ops::Add;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "SLITSTRIP_THREADS";

/// Below this many amplitudes a pass stays on the calling thread.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 1 << 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Installs the global pool honouring `SLITSTRIP_THREADS`; later calls are no-ops.
pub fn init_threads() {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()) {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

impl Exec {
    #[cfg(feature = "parallel")]
    fn parallel(self) -> bool {
        self == Exec::Parallel
    }

    /// `f(0), ..., f(n-1)` in index order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.parallel() && n > 1 {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        self.map_range(items.len(), |i| f(&items[i]))
    }

    /// Sum of `f(i)` over `0..n`, reduced in fixed chunks then in chunk order.
    pub fn sum_range<S, F>(self, n: usize, f: F) -> S
    where
        S: Copy + Default + Add<Output = S> + Send,
        F: Fn(usize) -> S + Sync + Send,
    {
        const CHUNK: usize = 1024;
        let chunks = n.div_ceil(CHUNK);
        let partial = self.map_range(chunks, |c| {
            let mut acc = S::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                acc = acc + f(i);
            }
            acc
        });
        partial.into_iter().fold(S::default(), |a, b| a + b)
    }

    /// Fills `out[i] = f(i)`.
    pub fn fill<T, F>(self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.parallel() && out.len() >= PAR_THRESHOLD {
            use rayon::prelude::*;
            out.par_iter_mut().with_min_len(1024).enumerate().for_each(|(i, x)| *x = f(i));
            return;
        }
        for (i, x) in out.iter_mut().enumerate() {
            *x = f(i);
        }
    }

    /// Applies `f` to every pair `(data[i], data[i | 1<<bit])` with bit `bit` of `i` clear.
    pub fn pairs<F>(self, data: &mut [Complex64], bit: usize, f: F)
    where
        F: Fn(&mut Complex64, &mut Complex64) + Sync + Send,
    {
        let stride = 1usize << bit;
        let block = 2 * stride;
        debug_assert!(data.len().is_multiple_of(block));
        #[cfg(feature = "parallel")]
        if self.parallel() && data.len() >= PAR_THRESHOLD {
            use rayon::prelude::*;
            if data.len() / block >= 64 {
                data.par_chunks_mut(block).for_each(|chunk| {
                    let (lo, hi) = chunk.split_at_mut(stride);
                    lo.iter_mut().zip(hi.iter_mut()).for_each(|(x, y)| f(x, y));
                });
            } else {
                for chunk in data.chunks_mut(block) {
                    let (lo, hi) = chunk.split_at_mut(stride);
                    lo.par_iter_mut().zip(hi.par_iter_mut()).with_min_len(1024).for_each(|(x, y)| f(x, y));
                }
            }
            return;
        }
        for chunk in data.chunks_mut(block) {
            let (lo, hi) = chunk.split_at_mut(stride);
            lo.iter_mut().zip(hi.iter_mut()).for_each(|(x, y)| f(x, y));
        }
    }

    /// Pointwise `data[i] *= w[i]`.
    pub fn scale(self, data: &mut [Complex64], w: &[f64]) {
        #[cfg(feature = "parallel")]
        if self.parallel() && data.len() >= PAR_THRESHOLD {
            use rayon::prelude::*;
            data.par_iter_mut().zip(w.par_iter()).with_min_len(1024).for_each(|(x, &s)| *x *= s);
            return;
        }
        data.iter_mut().zip(w).for_each(|(x, &s)| *x *= s);
    }

    /// `data *= s`.
    pub fn scale_by(self, data: &mut [Complex64], s: f64) {
        #[cfg(feature = "parallel")]
        if self.parallel() && data.len() >= PAR_THRESHOLD {
            use rayon::prelude::*;
            data.par_iter_mut().with_min_len(1024).for_each(|x| *x *= s);
            return;
        }
        data.iter_mut().for_each(|x| *x *= s);
    }

    /// Hermitian product `u^dagger v`.
    pub fn dot(self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        self.sum_range(u.len(), |i| u[i].conj() * v[i])
    }

    pub fn norm(self, v: &[Complex64]) -> f64 {
        self.sum_range(v.len(), |i| v[i].norm_sqr()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_on_reductions() {
        let n = 50_000;
        let f = |i: usize| ((i as f64) * 0.37).sin();
        let a: f64 = Exec::Sequential.sum_range(n, f);
        let b: f64 = Exec::Parallel.sum_range(n, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn pairs_touch_every_amplitude_once() {
        for mode in [Exec::Sequential, Exec::Parallel] {
            for bit in 0..14 {
                let mut v = vec![Complex64::new(1.0, 0.0); 1 << 14];
                mode.pairs(&mut v, bit, |x, y| {
                    *x += 1.0;
                    *y += 2.0;
                });
                for (i, z) in v.iter().enumerate() {
                    let want = if i >> bit & 1 == 0 { 2.0 } else { 3.0 };
                    assert_eq!(z.re, want);
                }
            }
        }
    }
}
