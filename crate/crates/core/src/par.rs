//! Trial-level data parallelism.
//!
//! With the `parallel` feature (on by default) trials fan out over rayon's
//! global pool; without it they run in a plain loop. Each trial draws from its
//! own ChaCha stream keyed by `(seed, stream)`, and results are always
//! returned in trial order, so both builds produce bit-identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random stream for one unit of work.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Packs a purpose tag and two indices into a stream id.
pub fn stream_id(tag: u8, outer: u32, inner: u32) -> u64 {
    ((tag as u64) << 56) | (((outer as u64) & 0x00ff_ffff) << 32) | inner as u64
}

/// Evaluates `f(0..n)` and returns results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential reference for [`map_indexed`], used by benches and tests.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: u64 = stream_rng(7, 0).random();
        let b: u64 = stream_rng(7, 1).random();
        let a2: u64 = stream_rng(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }

    #[test]
    fn parallel_matches_sequential() {
        let work = |i: usize| {
            let mut rng = stream_rng(3, i as u64);
            (0..100).map(|_| rng.random::<f64>()).sum::<f64>()
        };
        assert_eq!(map_indexed(64, work), map_indexed_seq(64, work));
    }
}
