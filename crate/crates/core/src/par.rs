//! Data-parallel helpers. With the `parallel` feature these fan out over
//! rayon; without it they run the same closures sequentially. Results are
//! always collected in index order, so reductions are reproducible either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..len).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Worker threads available to the data-parallel helpers.
pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Whether this build fans work out over threads.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Batched Monte-Carlo mean: `samples` draws of `draw(batch, count)` split
/// into fixed batches of `BATCH` so the stream assignment does not depend on
/// scheduling. Returns `(sum, sum_sq)` over all draws.
pub const BATCH: usize = 4096;

pub fn batched_sums<F>(samples: usize, draw: F) -> (f64, f64)
where
    F: Fn(u64, usize) -> (f64, f64) + Sync + Send,
{
    let batches = samples.div_ceil(BATCH);
    let parts = map_range(batches, |b| {
        let count = BATCH.min(samples - b * BATCH);
        draw(b as u64, count)
    });
    parts.into_iter().fold((0.0, 0.0), |(s, q), (a, b)| (s + a, q + b))
}
