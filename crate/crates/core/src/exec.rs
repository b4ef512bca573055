//! Execution policy for the data-parallel loops (mesh cells, matrix rows,
//! quadrature sums, candidate sweeps).
//!
//! Every parallel path has a sequential twin that produces bit-identical
//! output: maps preserve order and reductions are performed over fixed-size
//! chunks whose partial sums are combined in index order, so the floating
//! point summation order never depends on the thread count.

use num_complex::Complex64;
use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used by the deterministic reductions.
pub const REDUCE_CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    /// Falls back to sequential execution when the `parallel` feature is off.
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

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `(0..n).map(f).collect()`, possibly in parallel, order preserved.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Fallible map; the first error in index order is returned.
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }

    /// Deterministic complex sum of `f(i)` over `0..n`.
    pub fn sum_c<F>(self, n: usize, f: F) -> Complex64
    where
        F: Fn(usize) -> Complex64 + Sync + Send,
    {
        self.reduce_chunks(n, |r| r.map(&f).sum::<Complex64>())
            .into_iter()
            .sum()
    }

    /// Deterministic real sum of `f(i)` over `0..n`.
    pub fn sum_f<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        self.reduce_chunks(n, |r| r.map(&f).sum::<f64>())
            .into_iter()
            .sum()
    }

    /// Applies `f` to consecutive index chunks of length [`REDUCE_CHUNK`] and
    /// returns the per-chunk results in order.
    pub fn reduce_chunks<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<usize>) -> T + Sync + Send,
    {
        let chunks = n.div_ceil(REDUCE_CHUNK);
        self.map(chunks, |c| {
            let lo = c * REDUCE_CHUNK;
            f(lo..(lo + REDUCE_CHUNK).min(n))
        })
    }

    /// Fills the rows of a row-major buffer, one call per row.
    pub fn fill_rows<T, F>(self, data: &mut [T], row_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        if row_len == 0 {
            return;
        }
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            data.par_chunks_mut(row_len)
                .enumerate()
                .for_each(|(i, row)| f(i, row));
            return;
        }
        data.chunks_mut(row_len)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
    }
}
