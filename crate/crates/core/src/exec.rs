//! Execution policy for the amplitude-level kernels.
//!
//! Every kernel splits its index range into fixed-size chunks and combines
//! chunk results in index order, so the sequential and parallel paths
//! produce bitwise-identical output regardless of thread count. Without the
//! `parallel` feature [`Exec::Parallel`] runs sequentially.

use std::ops::Range;

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Amplitudes per work chunk. Also the reduction granularity, so changing it
/// changes rounding.
pub const CHUNK: usize = 2048;

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

impl Exec {
    /// Whether work of `len` items is worth handing to the thread pool.
    #[cfg(feature = "parallel")]
    #[inline]
    fn fans_out(self, len: usize) -> bool {
        self == Exec::Parallel && len > CHUNK
    }

    /// Fill `out[i] = f(i)`.
    pub fn fill<F>(self, out: &mut [Complex64], f: F)
    where
        F: Fn(usize) -> Complex64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.fans_out(out.len()) {
            out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
                let base = c * CHUNK;
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = f(base + k);
                }
            });
            return;
        }
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
    }

    /// Mutate disjoint chunks in place; `f` receives the chunk's base index.
    pub fn for_each_chunk<F>(self, data: &mut [Complex64], f: F)
    where
        F: Fn(usize, &mut [Complex64]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.fans_out(data.len()) {
            data.par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| f(c * CHUNK, chunk));
            return;
        }
        for (c, chunk) in data.chunks_mut(CHUNK).enumerate() {
            f(c * CHUNK, chunk);
        }
    }

    /// Deterministic sum of `f(range)` over fixed chunks of `0..len`.
    pub fn sum<F>(self, len: usize, f: F) -> Complex64
    where
        F: Fn(Range<usize>) -> Complex64 + Sync + Send,
    {
        let n_chunks = len.div_ceil(CHUNK);
        let chunk_range = |c: usize| c * CHUNK..((c + 1) * CHUNK).min(len);
        #[cfg(feature = "parallel")]
        if self.fans_out(len) {
            let partials: Vec<Complex64> =
                (0..n_chunks).into_par_iter().map(|c| f(chunk_range(c))).collect();
            return partials.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b);
        }
        (0..n_chunks)
            .map(|c| f(chunk_range(c)))
            .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    }

    /// Map over `0..n` items that are each expensive (matrix columns, sweep
    /// cells), preserving order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if cfg!(feature = "parallel") && self == Exec::Parallel && n > 1 {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}
