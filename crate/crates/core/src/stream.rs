use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream for work unit `index` of a job seeded with `seed`.
///
/// Work is always split into the same units regardless of how many threads
/// run them, so results do not depend on the worker count.
pub(crate) fn unit_stream(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64))
}

/// Sizes of `units` near-equal chunks covering `total` items.
pub(crate) fn split_evenly(total: usize, units: usize) -> Vec<usize> {
    let base = total / units;
    let extra = total % units;
    (0..units).map(|u| base + usize::from(u < extra)).collect()
}
