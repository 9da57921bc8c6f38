//! Data-parallel execution helpers.
//!
//! Every parallel loop in the crate goes through this module so that the
//! `rayon` feature can be switched off without touching call sites. With the
//! feature disabled the same functions run sequentially.
//!
//! Reductions use a fixed partition of the index range into blocks of
//! [`BLOCK`] elements. Each block is summed left to right and the block
//! partials are combined by a pairwise tree whose shape depends only on the
//! number of blocks, so results are bit-identical for any thread count and for
//! the sequential build.

use std::ops::Range;

use num_complex::Complex64;

/// Elements per reduction block.
pub const BLOCK: usize = 4096;

macro_rules! if_rayon {
    ($rayon_value: expr, $else_value: expr) => {{
        #[cfg(feature = "rayon")]
        {
            $rayon_value
        }
        #[cfg(not(feature = "rayon"))]
        {
            $else_value
        }
    }};
}

#[cfg(feature = "rayon")]
use rayon::prelude::*;

/// A value that can be accumulated by the deterministic reduction tree.
pub trait Reduce: Copy + Send + Sync {
    fn zero() -> Self;
    fn combine(self, other: Self) -> Self;
}

impl Reduce for f64 {
    fn zero() -> Self {
        0.0
    }
    fn combine(self, other: Self) -> Self {
        self + other
    }
}

impl Reduce for u64 {
    fn zero() -> Self {
        0
    }
    fn combine(self, other: Self) -> Self {
        self + other
    }
}

impl Reduce for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn combine(self, other: Self) -> Self {
        self + other
    }
}

impl<A: Reduce, B: Reduce> Reduce for (A, B) {
    fn zero() -> Self {
        (A::zero(), B::zero())
    }
    fn combine(self, other: Self) -> Self {
        (self.0.combine(other.0), self.1.combine(other.1))
    }
}

impl<A: Reduce, B: Reduce, C: Reduce> Reduce for (A, B, C) {
    fn zero() -> Self {
        (A::zero(), B::zero(), C::zero())
    }
    fn combine(self, other: Self) -> Self {
        (
            self.0.combine(other.0),
            self.1.combine(other.1),
            self.2.combine(other.2),
        )
    }
}

impl<T: Reduce, const N: usize> Reduce for [T; N] {
    fn zero() -> Self {
        [T::zero(); N]
    }
    fn combine(mut self, other: Self) -> Self {
        for (a, b) in self.iter_mut().zip(other) {
            *a = a.combine(b);
        }
        self
    }
}

/// Pairwise reduction with a shape fixed by `values.len()`.
pub fn tree_reduce<T: Reduce>(mut values: Vec<T>) -> T {
    if values.is_empty() {
        return T::zero();
    }
    while values.len() > 1 {
        let next = values
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a.combine(*b),
                [a] => *a,
                _ => unreachable!(),
            })
            .collect();
        values = next;
    }
    values[0]
}

/// Sum `block(range)` over the fixed [`BLOCK`] partition of `0..n`.
///
/// `block` must accumulate its range in ascending index order.
pub fn block_sum<T, F>(n: usize, block: F) -> T
where
    T: Reduce,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    let range_of = |b: usize| b * BLOCK..((b + 1) * BLOCK).min(n);
    let partials: Vec<T> = if_rayon!(
        (0..blocks).into_par_iter().map(|b| block(range_of(b))).collect(),
        (0..blocks).map(|b| block(range_of(b))).collect()
    );
    tree_reduce(partials)
}

/// Convenience wrapper: sum `term(i)` for `i in 0..n` deterministically.
pub fn sum_by<T, F>(n: usize, term: F) -> T
where
    T: Reduce,
    F: Fn(usize) -> T + Sync + Send,
{
    block_sum(n, |r| r.fold(T::zero(), |acc, i| acc.combine(term(i))))
}

/// `(0..n).map(f).collect()`, in parallel when available. Order is preserved.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if_rayon!(
        (0..n).into_par_iter().map(f).collect(),
        (0..n).map(f).collect()
    )
}

/// Apply `f(chunk_index, chunk)` to consecutive chunks of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if_rayon!(
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c)),
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c))
    )
}

/// Map over consecutive mutable chunks of `data`, collecting results in order.
pub fn map_chunks_mut<T, R, F>(data: &mut [T], chunk: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, &mut [T]) -> R + Sync + Send,
{
    if_rayon!(
        data.par_chunks_mut(chunk)
            .enumerate()
            .map(|(i, c)| f(i, c))
            .collect(),
        data.chunks_mut(chunk)
            .enumerate()
            .map(|(i, c)| f(i, c))
            .collect()
    )
}

/// Unstable sort; callers supply a total order so the result is unique.
pub fn sort_by<T, F>(data: &mut [T], cmp: F)
where
    T: Send,
    F: Fn(&T, &T) -> std::cmp::Ordering + Sync,
{
    if_rayon!(data.par_sort_unstable_by(cmp), data.sort_unstable_by(cmp))
}

/// Cap the worker count of the global pool. A no-op in sequential builds.
///
/// Only the first call has an effect; later calls return an error message.
pub fn configure_threads(threads: usize) -> Result<(), String> {
    if_rayon!(
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string()),
        {
            let _ = threads;
            Ok(())
        }
    )
}

/// Whether this build runs loops in parallel.
pub const fn is_parallel() -> bool {
    cfg!(feature = "rayon")
}
