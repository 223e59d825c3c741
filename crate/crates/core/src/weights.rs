//! Exact weighted index draws over arbitrary-precision weights.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The reproducible generator used by every sampler.
pub type SeededRng = ChaCha8Rng;

/// Generator for `seed`; identical to worker 0 of [`worker_rng`].
pub fn seeded_rng(seed: u64) -> SeededRng {
    worker_rng(seed, 0)
}

/// An independent stream for one worker of a parallel run.
pub fn worker_rng(seed: u64, worker: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker);
    rng
}

/// Uniform integer in `[0, bound)` by rejection over 32-bit chunks.
///
/// Panics if `bound` is zero.
pub fn uniform_below<R: Rng + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "empty range");
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let top_bits = (bits % 32) as u32;
    let mask = if top_bits == 0 { u32::MAX } else { (1u32 << top_bits) - 1 };
    let mut buf = vec![0u32; words];
    loop {
        for w in buf.iter_mut() {
            *w = rng.next_u32();
        }
        buf[words - 1] &= mask;
        let candidate = BigUint::from_slice(&buf);
        if &candidate < bound {
            return candidate;
        }
    }
}

/// Smallest `i` in `lo..hi` with `cumulative(i) > target`, for nondecreasing `cumulative`.
///
/// Returns `hi` when no such index exists.
pub fn partition_by<T: Ord>(lo: usize, hi: usize, target: &T, cumulative: impl Fn(usize) -> T) -> usize {
    let (mut lo, mut hi) = (lo, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if cumulative(mid) > *target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Cumulative sums of nonnegative big-integer weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightTable {
    cumulative: Vec<BigUint>,
}

impl WeightTable {
    pub fn new(weights: impl IntoIterator<Item = BigUint>) -> Self {
        let mut acc = BigUint::zero();
        let cumulative = weights
            .into_iter()
            .map(|w| {
                acc += w;
                acc.clone()
            })
            .collect();
        Self { cumulative }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn cumulative(&self) -> &[BigUint] {
        &self.cumulative
    }

    pub fn total(&self) -> BigUint {
        self.cumulative.last().cloned().unwrap_or_default()
    }

    pub fn weight(&self, i: usize) -> BigUint {
        match i {
            0 => self.cumulative[0].clone(),
            _ => &self.cumulative[i] - &self.cumulative[i - 1],
        }
    }

    /// Index whose weight interval `[C(i-1), C(i))` contains `target`.
    pub fn locate(&self, target: &BigUint) -> usize {
        self.cumulative.partition_point(|c| c <= target)
    }

    /// Draws index `i` with probability `weight(i) / total()`.
    ///
    /// Panics if the total weight is zero.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let last = self.cumulative.last().expect("empty weight table");
        let target = uniform_below(rng, last);
        self.locate(&target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn locate_skips_zero_weights() {
        let table = WeightTable::new([2u32, 0, 3, 0].map(BigUint::from));
        let idx: Vec<usize> = (0u32..5).map(|t| table.locate(&BigUint::from(t))).collect();
        assert_eq!(idx, vec![0, 0, 2, 2, 2]);
        assert_eq!(table.total(), BigUint::from(5u32));
        assert_eq!(table.weight(1), BigUint::zero());
    }

    #[test]
    fn uniform_below_small_range_is_unbiased() {
        let mut rng = seeded_rng(3);
        let bound = BigUint::from(3u32);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            let v = uniform_below(&mut rng, &bound);
            counts[usize::try_from(v.to_u32_digits().first().copied().unwrap_or(0)).unwrap()] += 1;
        }
        for c in counts {
            assert!((9_500..10_500).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn uniform_below_wide_range() {
        let mut rng = seeded_rng(9);
        let bound = (BigUint::from(1u32) << 200u32) + 7u32;
        let mut saw_high = false;
        for _ in 0..200 {
            let v = uniform_below(&mut rng, &bound);
            assert!(v < bound);
            saw_high |= v.bits() >= 199;
        }
        assert!(saw_high);
        assert_eq!(uniform_below(&mut rng, &BigUint::from(1u32)), BigUint::zero());
    }

    #[test]
    fn partition_by_finds_first_exceeding() {
        let c = [1, 1, 4, 4, 9];
        assert_eq!(partition_by(0, 5, &0, |i| c[i]), 0);
        assert_eq!(partition_by(0, 5, &1, |i| c[i]), 2);
        assert_eq!(partition_by(0, 5, &8, |i| c[i]), 4);
        assert_eq!(partition_by(0, 5, &9, |i| c[i]), 5);
        assert_eq!(partition_by(2, 5, &0, |i| c[i]), 2);
    }

    #[test]
    fn worker_streams_differ() {
        let a: Vec<u32> = (0..4).map(|_| worker_rng(1, 0).next_u32()).collect();
        let mut w1 = worker_rng(1, 1);
        assert_ne!(a[0], w1.next_u32());
        assert_eq!(seeded_rng(1).next_u32(), a[0]);
    }
}
