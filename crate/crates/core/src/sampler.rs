//! Uniform front over the four sampling methods.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::baselines::{sample_random_cover, sample_uniform_naive};
use crate::dataset::NumericalDataset;
use crate::fips::FipsState;
use crate::hips::{HipsError, HipsState};
use crate::patterns::IntervalPattern;
use crate::weights::worker_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Fips,
    Hips,
    RandomCover,
    UniformNaive,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Fips, Method::Hips, Method::RandomCover, Method::UniformNaive];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fips => "fips",
            Method::Hips => "hips",
            Method::RandomCover => "random-cover",
            Method::UniformNaive => "uniform-naive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?} (expected fips, hips, random-cover or uniform-naive)"))
    }
}

/// A preprocessed sampler ready to draw.
#[derive(Debug, Clone)]
pub enum Sampler<'a> {
    Fips(FipsState<'a>),
    Hips(HipsState<'a>),
    RandomCover(&'a NumericalDataset),
    UniformNaive(&'a NumericalDataset),
}

impl<'a> Sampler<'a> {
    pub fn prepare(method: Method, dataset: &'a NumericalDataset) -> Result<Self, HipsError> {
        Ok(match method {
            Method::Fips => Sampler::Fips(FipsState::new(dataset)),
            Method::Hips => Sampler::Hips(HipsState::new(dataset)?),
            Method::RandomCover => Sampler::RandomCover(dataset),
            Method::UniformNaive => Sampler::UniformNaive(dataset),
        })
    }

    pub fn method(&self) -> Method {
        match self {
            Sampler::Fips(_) => Method::Fips,
            Sampler::Hips(_) => Method::Hips,
            Sampler::RandomCover(_) => Method::RandomCover,
            Sampler::UniformNaive(_) => Method::UniformNaive,
        }
    }

    pub fn dataset(&self) -> &'a NumericalDataset {
        match self {
            Sampler::Fips(s) => s.dataset(),
            Sampler::Hips(s) => s.dataset(),
            Sampler::RandomCover(d) | Sampler::UniformNaive(d) => d,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> IntervalPattern {
        match self {
            Sampler::Fips(s) => s.sample(rng),
            Sampler::Hips(s) => s.sample(rng),
            Sampler::RandomCover(d) => sample_random_cover(d, rng),
            Sampler::UniformNaive(d) => sample_uniform_naive(d, rng),
        }
    }

    pub fn sample_k<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Vec<IntervalPattern> {
        (0..k).map(|_| self.sample(rng)).collect()
    }

    /// `k` draws split into contiguous blocks, block `w` drawn from `worker_rng(seed, w)`.
    ///
    /// The output is ordered by draw index and depends only on `(seed, k, workers)`.
    /// With one worker it equals `sample_k(k, &mut seeded_rng(seed))`.
    pub fn sample_parallel(&self, k: usize, seed: u64, workers: usize) -> Vec<IntervalPattern> {
        let workers = workers.clamp(1, k.max(1));
        if workers == 1 {
            return self.sample_k(k, &mut worker_rng(seed, 0));
        }
        let block = k.div_ceil(workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let count = block.min(k.saturating_sub(w * block));
                    scope.spawn(move || self.sample_k(count, &mut worker_rng(seed, w as u64)))
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("sampling worker panicked"))
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::seeded_rng;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("uniform".parse::<Method>().is_err());
    }

    #[test]
    fn parallel_single_worker_matches_sequential() {
        let ds = NumericalDataset::from_integer_rows(vec![vec![1, 4], vec![2, 3], vec![5, 9]]).unwrap();
        for method in Method::ALL {
            let s = Sampler::prepare(method, &ds).unwrap();
            let seq = s.sample_k(50, &mut seeded_rng(3));
            assert_eq!(s.sample_parallel(50, 3, 1), seq);
            let par = s.sample_parallel(50, 3, 4);
            assert_eq!(par.len(), 50);
            assert_eq!(par, s.sample_parallel(50, 3, 4));
        }
    }
}
