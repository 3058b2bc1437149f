//! Seeded, block-partitioned random streams.
//!
//! Draw `i` always comes from block `i / BLOCK`, whose generator is the ChaCha
//! stream numbered by the block index. Output is therefore independent of the
//! thread count and of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub(crate) const BLOCK: usize = 1 << 14;

pub(crate) fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Builds `n` values in parallel; `f` receives the block generator and the global index.
pub(crate) fn par_generate<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let parts: Vec<Vec<T>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let start = b * BLOCK;
            let end = (start + BLOCK).min(n);
            (start..end).map(|i| f(&mut rng, i)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Sums `f` over `items` in fixed-size chunks, reducing the chunk totals in order.
pub(crate) fn ordered_sum<T, F, const K: usize>(items: &[T], f: F) -> [f64; K]
where
    T: Sync,
    F: Fn(&T) -> [f64; K] + Sync,
{
    let partial: Vec<[f64; K]> = items
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut acc = [0.0; K];
            for item in chunk {
                let v = f(item);
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0; K];
    for p in partial {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    total
}
