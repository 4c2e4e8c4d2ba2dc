//! Deterministic chunked execution with a rayon backend and a sequential
//! fallback.
//!
//! Work over `0..n` is cut into chunks of a fixed size that does not depend on
//! the number of threads. Each chunk is evaluated independently and the
//! per-chunk results are returned in chunk order, so a caller that reduces the
//! returned vector sequentially gets bit-identical results for every thread
//! count and for [`ExecMode::Sequential`].

use std::ops::Range;

/// Execution strategy for chunked loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Data-parallel over chunks (rayon). Falls back to sequential execution
    /// when the crate is built without the `parallel` feature.
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Sets the size of the global worker pool. Must be called before any
/// parallel work; a no-op without the `parallel` feature.
pub fn init_thread_pool(threads: usize) -> crate::Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| crate::Error::Param(format!("threads: {e}")))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}

/// Splits `0..n` into consecutive ranges of length `chunk` (last one shorter).
pub fn chunk_ranges(n: usize, chunk: usize) -> Vec<Range<usize>> {
    let chunk = chunk.max(1);
    (0..n.div_ceil(chunk))
        .map(|c| c * chunk..((c + 1) * chunk).min(n))
        .collect()
}

/// Evaluates `f` on every chunk of `0..n` and returns the results in chunk
/// order.
pub fn map_chunks<R, F>(n: usize, chunk: usize, mode: ExecMode, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<usize>) -> R + Sync + Send,
{
    let ranges = chunk_ranges(n, chunk);
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            ranges.into_par_iter().map(f).collect()
        }
        _ => ranges.into_iter().map(f).collect(),
    }
}

/// Evaluates `f(i)` for every `i in 0..n`, returning results in index order.
pub fn map_indexed<R, F>(n: usize, mode: ExecMode, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sum::NeumaierSum;

    #[test]
    fn chunks_cover_range_exactly_once() {
        let r = chunk_ranges(10, 3);
        assert_eq!(r, vec![0..3, 3..6, 6..9, 9..10]);
        assert!(chunk_ranges(0, 4).is_empty());
    }

    #[test]
    fn parallel_and_sequential_reductions_are_bitwise_equal() {
        let f = |r: Range<usize>| -> NeumaierSum {
            r.map(|i| ((i as f64) * 0.37).sin() / (1.0 + i as f64)).sum()
        };
        let total = |parts: Vec<NeumaierSum>| {
            parts
                .into_iter()
                .fold(NeumaierSum::new(), |a, b| a + b)
                .value()
        };
        let a = total(map_chunks(100_000, 4096, ExecMode::Sequential, f));
        let b = total(map_chunks(100_000, 4096, ExecMode::Parallel, f));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
