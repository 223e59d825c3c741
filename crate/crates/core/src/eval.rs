//! Evaluation metrics over sampled pattern sets: measure curves, long tail,
//! cover diversity, pairwise Jaccard CDF, plausibility under swap
//! randomization, rejection sampling in a frequency band, and timing.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{format_scaled, NumericalDataset};
use crate::hips::HipsError;
use crate::patterns::{IntervalPattern, Measure};
use crate::sampler::{Method, Sampler};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no patterns to evaluate")]
    EmptyPatternList,
    #[error("need at least 2 patterns, got {found}")]
    TooFewPatterns { found: usize },
    #[error("swap randomization needs at least 2 objects")]
    TooFewObjects,
    #[error("pattern {index} does not occur in the original dataset")]
    ZeroFrequencyPattern { index: usize },
    #[error("the number of randomized datasets must be at least 1")]
    ZeroRepetitions,
    #[error("invalid frequency band [{lo}, {hi}]")]
    InvalidBand { lo: f64, hi: f64 },
    #[error("time limit reached with {} of the requested patterns after {} draws", .partial.patterns.len(), .partial.draws)]
    TimeLimitExceeded { partial: Box<BandSample> },
    #[error(transparent)]
    Hips(#[from] HipsError),
}

/// One row of an evaluation output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRecord {
    pub method: String,
    pub draw_index: usize,
    pub freq: usize,
    pub vol: String,
    pub vol_freq: String,
    /// Only recorded by timing runs, so other outputs stay reproducible.
    pub wall_time_us: Option<f64>,
    pub seed: u64,
}

impl MetricRecord {
    pub fn new(
        method: Method,
        draw_index: usize,
        pattern: &IntervalPattern,
        dataset: &NumericalDataset,
        wall_time: Option<Duration>,
        seed: u64,
    ) -> Self {
        let freq = pattern.frequency(dataset);
        let vol = pattern.hyper_volume();
        let scale = dataset.volume_scale_exponent();
        Self {
            method: method.name().to_string(),
            draw_index,
            freq,
            vol: format_scaled(&BigInt::from(vol.clone()), scale),
            vol_freq: format_scaled(&BigInt::from(vol * freq), scale),
            wall_time_us: wall_time.map(|t| t.as_secs_f64() * 1e6),
            seed,
        }
    }
}

fn unscaled_f64(value: &BigUint, exponent: u32) -> f64 {
    value.to_f64().unwrap_or(f64::INFINITY) / 10f64.powi(exponent as i32)
}

fn measure_exponent(dataset: &NumericalDataset, measure: Measure) -> u32 {
    match measure {
        Measure::VolumeFrequency => dataset.volume_scale_exponent(),
        Measure::Frequency | Measure::Uniform => 0,
    }
}

/// Measure values (unscaled) sorted in descending order.
pub fn measure_curve(patterns: &[IntervalPattern], dataset: &NumericalDataset, measure: Measure) -> Vec<f64> {
    let mut values: Vec<BigUint> = patterns.iter().map(|p| measure.evaluate(p, dataset)).collect();
    values.sort_unstable_by(|a, b| b.cmp(a));
    let exp = measure_exponent(dataset, measure);
    values.iter().map(|v| unscaled_f64(v, exp)).collect()
}

/// Pointwise mean of equally long curves.
pub fn mean_curve(curves: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = curves.first() else {
        return Vec::new();
    };
    assert!(curves.iter().all(|c| c.len() == first.len()), "curves differ in length");
    (0..first.len())
        .map(|i| curves.iter().map(|c| c[i]).sum::<f64>() / curves.len() as f64)
        .collect()
}

/// Fraction of rank positions where `a[i] >= b[i]`.
pub fn dominance_fraction(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 1.0;
    }
    a.iter().zip(b).filter(|(x, y)| x >= y).count() as f64 / n as f64
}

/// What a relative tail threshold is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailReference {
    /// |G| for frequency; max hyper-volume × |G| for volume × frequency.
    #[default]
    Attainable,
    /// The largest measure value among the evaluated patterns.
    MaxObserved,
}

/// Largest value the measure can take on the dataset, in scaled units.
pub fn max_attainable(dataset: &NumericalDataset, measure: Measure) -> BigUint {
    let n = BigUint::from(dataset.n_objects());
    match measure {
        Measure::Frequency => n,
        Measure::VolumeFrequency => IntervalPattern::unconstrained(dataset).hyper_volume() * n,
        Measure::Uniform => BigUint::from(1u32),
    }
}

/// Fraction of patterns whose measure is below `threshold` × reference value.
pub fn tail_fraction(
    patterns: &[IntervalPattern],
    dataset: &NumericalDataset,
    measure: Measure,
    threshold: f64,
    reference: TailReference,
) -> f64 {
    if patterns.is_empty() {
        return 0.0;
    }
    let values: Vec<BigUint> = patterns.iter().map(|p| measure.evaluate(p, dataset)).collect();
    let reference = match reference {
        TailReference::Attainable => max_attainable(dataset, measure),
        TailReference::MaxObserved => values.iter().max().cloned().unwrap_or_default(),
    };
    let Some(threshold) = decimal_rational(threshold) else {
        return 0.0;
    };
    let cutoff = threshold * BigRational::from_integer(BigInt::from(reference));
    let below = values
        .into_iter()
        .filter(|v| BigRational::from_integer(BigInt::from(v.clone())) < cutoff)
        .count();
    below as f64 / patterns.len() as f64
}

/// Exact value of the shortest decimal that round-trips to `x`, so `0.2` means 1/5.
fn decimal_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let text = format!("{}", x.abs());
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = BigRational::new(digits, denom);
    Some(if x < 0.0 { -value } else { value })
}

/// Distinct cover sets divided by the number of patterns.
pub fn diversity_eq_classes(patterns: &[IntervalPattern], dataset: &NumericalDataset) -> Result<f64, EvalError> {
    if patterns.is_empty() {
        return Err(EvalError::EmptyPatternList);
    }
    let classes: HashSet<Vec<usize>> = patterns.iter().map(|p| p.cover_unchecked(dataset)).collect();
    Ok(classes.len() as f64 / patterns.len() as f64)
}

/// Cover as a bitset over object ids.
fn cover_bits(pattern: &IntervalPattern, dataset: &NumericalDataset) -> Vec<u64> {
    let mut bits = vec![0u64; dataset.n_objects().div_ceil(64)];
    for g in pattern.cover_unchecked(dataset) {
        bits[g / 64] |= 1 << (g % 64);
    }
    bits
}

/// Jaccard index of two covers; two empty covers count as identical.
pub fn jaccard(a: &IntervalPattern, b: &IntervalPattern, dataset: &NumericalDataset) -> f64 {
    jaccard_bits(&cover_bits(a, dataset), &cover_bits(b, dataset))
}

fn jaccard_bits(a: &[u64], b: &[u64]) -> f64 {
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.iter().zip(b) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        1.0
    } else {
        f64::from(inter) / f64::from(union)
    }
}

/// For each threshold θ, the fraction of unordered pattern pairs with Jaccard ≤ θ.
pub fn jaccard_cdf(
    patterns: &[IntervalPattern],
    dataset: &NumericalDataset,
    thresholds: &[f64],
) -> Result<Vec<f64>, EvalError> {
    let k = patterns.len();
    if k < 2 {
        return Err(EvalError::TooFewPatterns { found: k });
    }
    let covers: Vec<Vec<u64>> = patterns.iter().map(|p| cover_bits(p, dataset)).collect();
    let mut indices = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            indices.push(jaccard_bits(&covers[i], &covers[j]));
        }
    }
    indices.sort_unstable_by(f64::total_cmp);
    let pairs = indices.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&theta| indices.partition_point(|&j| j <= theta) as f64 / pairs)
        .collect())
}

/// A swap-randomized copy of a dataset.
#[derive(Debug, Clone)]
pub struct RandomizedDataset<'a> {
    pub base: &'a NumericalDataset,
    pub swaps_per_attribute: Vec<usize>,
    pub dataset: NumericalDataset,
}

/// Swaps the values of two distinct random objects, `swaps_per_attribute` times per attribute.
pub fn randomize<'a, R: Rng + ?Sized>(
    dataset: &'a NumericalDataset,
    rng: &mut R,
    swaps_per_attribute: usize,
) -> Result<RandomizedDataset<'a>, EvalError> {
    let n = dataset.n_objects();
    if n < 2 {
        return Err(EvalError::TooFewObjects);
    }
    let mut rows = dataset.to_rows();
    for m in 0..dataset.n_attributes() {
        for _ in 0..swaps_per_attribute {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let tmp = rows[i][m];
            rows[i][m] = rows[j][m];
            rows[j][m] = tmp;
        }
    }
    Ok(RandomizedDataset {
        base: dataset,
        swaps_per_attribute: vec![swaps_per_attribute; dataset.n_attributes()],
        dataset: dataset.with_rows(rows).expect("same shape as base"),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlausibilityReport {
    pub value: f64,
    /// Σ_i Σ_j (freq(P_i, N) − freq(P_i, N_rand^j)).
    pub numerator: i64,
    /// Σ_i R · freq(P_i, N).
    pub denominator: i64,
}

/// Relative frequency drop of the patterns across `repetitions` randomized datasets.
pub fn plausibility<R: Rng + ?Sized>(
    patterns: &[IntervalPattern],
    dataset: &NumericalDataset,
    repetitions: usize,
    rng: &mut R,
    swaps_per_attribute: usize,
) -> Result<PlausibilityReport, EvalError> {
    if repetitions == 0 {
        return Err(EvalError::ZeroRepetitions);
    }
    if patterns.is_empty() {
        return Err(EvalError::EmptyPatternList);
    }
    let original: Vec<i64> = patterns.iter().map(|p| p.frequency(dataset) as i64).collect();
    if let Some(index) = original.iter().position(|&f| f == 0) {
        return Err(EvalError::ZeroFrequencyPattern { index });
    }
    let mut numerator = 0i64;
    for _ in 0..repetitions {
        let randomized = randomize(dataset, rng, swaps_per_attribute)?;
        for (p, &f) in patterns.iter().zip(&original) {
            numerator += f - p.frequency(&randomized.dataset) as i64;
        }
    }
    let denominator = repetitions as i64 * original.iter().sum::<i64>();
    Ok(PlausibilityReport {
        value: numerator as f64 / denominator as f64,
        numerator,
        denominator,
    })
}

/// Patterns accepted by band rejection and the number of draws spent.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSample {
    pub patterns: Vec<IntervalPattern>,
    pub draws: u64,
}

/// Draws until `k` patterns have relative frequency in `[lo, hi]` or the time limit passes.
pub fn rejection_sample_in_band<R: Rng + ?Sized>(
    sampler: &Sampler<'_>,
    band: (f64, f64),
    k: usize,
    time_limit: Duration,
    rng: &mut R,
) -> Result<BandSample, EvalError> {
    let (lo, hi) = band;
    if !(0.0..=hi).contains(&lo) || hi.is_nan() {
        return Err(EvalError::InvalidBand { lo, hi });
    }
    let dataset = sampler.dataset();
    let n = dataset.n_objects() as f64;
    let start = Instant::now();
    let mut sample = BandSample {
        patterns: Vec::with_capacity(k),
        draws: 0,
    };
    while sample.patterns.len() < k {
        if start.elapsed() >= time_limit {
            return Err(EvalError::TimeLimitExceeded {
                partial: Box::new(sample),
            });
        }
        let p = sampler.sample(rng);
        sample.draws += 1;
        let rel = p.frequency(dataset) as f64 / n;
        if lo <= rel && rel <= hi {
            sample.patterns.push(p);
        }
    }
    Ok(sample)
}

#[derive(Debug, Clone)]
pub struct TimingReport {
    pub preprocessing: Duration,
    pub per_draw: Vec<Duration>,
    pub total: Duration,
    pub patterns: Vec<IntervalPattern>,
}

impl TimingReport {
    pub fn mean_draw(&self) -> Duration {
        if self.per_draw.is_empty() {
            return Duration::ZERO;
        }
        self.per_draw.iter().sum::<Duration>() / self.per_draw.len() as u32
    }
}

/// Times preprocessing once and each of `k` draws separately.
pub fn timing_run<R: Rng + ?Sized>(
    method: Method,
    dataset: &NumericalDataset,
    k: usize,
    rng: &mut R,
) -> Result<TimingReport, EvalError> {
    let start = Instant::now();
    let sampler = Sampler::prepare(method, dataset)?;
    let preprocessing = start.elapsed();
    let mut per_draw = Vec::with_capacity(k);
    let mut patterns = Vec::with_capacity(k);
    for _ in 0..k {
        let t = Instant::now();
        let p = sampler.sample(rng);
        per_draw.push(t.elapsed());
        patterns.push(p);
    }
    Ok(TimingReport {
        preprocessing,
        per_draw,
        total: start.elapsed(),
        patterns,
    })
}
