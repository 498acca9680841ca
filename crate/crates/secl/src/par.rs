//! Data-parallel helpers. With the `parallel` feature the row loops below run on
//! the rayon global pool; without it they compile to plain iterator loops.
//!
//! Every helper writes disjoint outputs per index, so results never depend on
//! scheduling. Reductions across rows are always finished sequentially by the
//! caller.

use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Work below this many scalar outputs is not worth a fork/join.
pub const MIN_PARALLEL_WORK: usize = 1 << 14;

static ENABLED: AtomicBool = AtomicBool::new(cfg!(feature = "parallel"));

/// Turns data parallelism on or off at runtime. Has no effect when the crate is
/// built without the `parallel` feature.
pub fn set_enabled(on: bool) {
    ENABLED.store(on && cfg!(feature = "parallel"), Ordering::Relaxed);
}

pub fn enabled() -> bool {
    ENABLED.load(Ordering::Relaxed)
}

#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
fn worth_it(work: usize) -> bool {
    enabled() && work >= MIN_PARALLEL_WORK
}

/// Calls `f(row_index, row)` for every `cols`-wide row of `data`.
pub fn rows_mut<F>(data: &mut [f64], cols: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if cols == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if worth_it(data.len()) {
        data.par_chunks_mut(cols)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
        return;
    }
    data.chunks_mut(cols).enumerate().for_each(|(i, row)| f(i, row));
}

/// `(0..n).map(f).collect()`, possibly in parallel. `cost` is a rough per-item
/// work estimate used to decide whether to fork.
pub fn map_range<T, F>(n: usize, cost: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if worth_it(n.saturating_mul(cost.max(1))) {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = cost;
    (0..n).map(f).collect()
}

/// Maps independent jobs (training runs, K-means restarts, sweep cells). Always
/// forks when parallelism is enabled since each job is expensive.
pub fn map_jobs<I, T, F>(items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if enabled() {
        return items.into_par_iter().map(f).collect();
    }
    items.into_iter().map(f).collect()
}
