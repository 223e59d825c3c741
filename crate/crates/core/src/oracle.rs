//! Brute-force ground truth over the complete interval pattern space.
//!
//! Only usable on small datasets. Everything here is exact: frequencies,
//! volumes, normalization constants and probabilities as big rationals.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::dataset::NumericalDataset;
use crate::hips::{BoundWeightView, HipsError, HipsState};
use crate::fips::FipsState;
use crate::patterns::{IntervalPattern, Measure};

pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("search space of {size} patterns exceeds the cap of {cap}")]
    SpaceTooLarge { size: BigUint, cap: u64 },
    #[error("the measure is zero on every pattern")]
    ZeroMeasure,
    #[error(transparent)]
    Hips(#[from] HipsError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumeratedPattern {
    pub pattern: IntervalPattern,
    pub ranks: Vec<(usize, usize)>,
    pub freq: usize,
    pub vol: BigUint,
}

#[derive(Debug, Clone)]
pub struct EnumeratedSpace {
    pub patterns: Vec<EnumeratedPattern>,
    /// Σ freq over the space.
    pub z_f: BigUint,
    /// Σ vol·freq over the space.
    pub z_hf: BigUint,
    positions: HashMap<IntervalPattern, usize>,
}

impl EnumeratedSpace {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn position(&self, pattern: &IntervalPattern) -> Option<usize> {
        self.positions.get(pattern).copied()
    }

    pub fn measure(&self, i: usize, measure: Measure) -> BigUint {
        let p = &self.patterns[i];
        match measure {
            Measure::Frequency => BigUint::from(p.freq),
            Measure::VolumeFrequency => &p.vol * p.freq,
            Measure::Uniform => BigUint::one(),
        }
    }
}

/// Enumerates every pattern, attribute 0 outermost, each attribute by (lower rank, upper rank).
pub fn enumerate_all(dataset: &NumericalDataset, cap: u64) -> Result<EnumeratedSpace, OracleError> {
    let size = dataset.search_space_size();
    if size > BigUint::from(cap) {
        return Err(OracleError::SpaceTooLarge { size, cap });
    }
    let n_attr = dataset.n_attributes();
    let mut patterns = Vec::new();
    let mut ranks = Vec::with_capacity(n_attr);
    let all: Vec<usize> = (0..dataset.n_objects()).collect();
    enumerate_from(dataset, 0, &all, &mut ranks, &mut patterns);

    let z_f = patterns.iter().map(|p| BigUint::from(p.freq)).sum();
    let z_hf = patterns.iter().map(|p| &p.vol * p.freq).sum();
    let positions = patterns
        .iter()
        .enumerate()
        .map(|(i, p)| (p.pattern.clone(), i))
        .collect();
    Ok(EnumeratedSpace {
        patterns,
        z_f,
        z_hf,
        positions,
    })
}

fn enumerate_from(
    dataset: &NumericalDataset,
    m: usize,
    covered: &[usize],
    ranks: &mut Vec<(usize, usize)>,
    out: &mut Vec<EnumeratedPattern>,
) {
    if m == dataset.n_attributes() {
        let pattern = IntervalPattern::from_ranks(dataset, ranks);
        let vol = pattern.hyper_volume();
        out.push(EnumeratedPattern {
            pattern,
            ranks: ranks.clone(),
            freq: covered.len(),
            vol,
        });
        return;
    }
    let k = dataset.index(m).len();
    for lo in 0..k {
        for hi in lo..k {
            let next: Vec<usize> = covered
                .iter()
                .copied()
                .filter(|&g| (lo..=hi).contains(&dataset.rank(g, m)))
                .collect();
            ranks.push((lo, hi));
            enumerate_from(dataset, m + 1, &next, ranks, out);
            ranks.pop();
        }
    }
}

/// `measure(P) / Σ measure` for every pattern, aligned with `space.patterns`.
pub fn exact_target(space: &EnumeratedSpace, measure: Measure) -> Result<Vec<BigRational>, OracleError> {
    let values: Vec<BigUint> = (0..space.len()).map(|i| space.measure(i, measure)).collect();
    let total: BigUint = values.iter().sum();
    if total.is_zero() {
        return Err(OracleError::ZeroMeasure);
    }
    let total = BigInt::from(total);
    Ok(values
        .into_iter()
        .map(|v| BigRational::new(BigInt::from(v), total.clone()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditedSampler {
    Fips,
    Hips,
}

fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// P((lower rank, upper rank) | object) for one attribute.
type Conditional = HashMap<(usize, usize), BigRational>;

/// The distribution a sampler induces, composed analytically from its step
/// probabilities and summed over all objects. No random draws.
pub fn audit_sampler(
    space: &EnumeratedSpace,
    sampler: AuditedSampler,
    dataset: &NumericalDataset,
) -> Result<Vec<BigRational>, OracleError> {
    let n_objects = dataset.n_objects();
    let n_attr = dataset.n_attributes();
    // conditional[g][m] maps (lower rank, upper rank) to P(interval | g)
    let (object_probs, conditional): (Vec<BigRational>, Vec<Vec<Conditional>>) =
        match sampler {
            AuditedSampler::Fips => {
                let state = FipsState::new(dataset);
                let total = state.total();
                let objects = state.nip_weights().iter().map(|w| ratio(w, &total)).collect();
                let conditional = (0..n_objects)
                    .map(|g| (0..n_attr).map(|m| fips_conditional(dataset, m, g)).collect())
                    .collect();
                (objects, conditional)
            }
            AuditedSampler::Hips => {
                let state = HipsState::new(dataset)?;
                let total = state.total();
                let objects = state.iph_weights().iter().map(|w| ratio(w, &total)).collect();
                let conditional = (0..n_objects)
                    .map(|g| (0..n_attr).map(|m| hips_conditional(dataset, m, g)).collect())
                    .collect();
                (objects, conditional)
            }
        };

    Ok(space
        .patterns
        .iter()
        .map(|p| {
            let mut prob = BigRational::zero();
            for g in 0..n_objects {
                let mut term = object_probs[g].clone();
                for (m, r) in p.ranks.iter().enumerate() {
                    match conditional[g][m].get(r) {
                        Some(c) => term *= c,
                        None => {
                            term = BigRational::zero();
                            break;
                        }
                    }
                }
                prob += term;
            }
            prob
        })
        .collect())
}

fn fips_conditional(dataset: &NumericalDataset, m: usize, g: usize) -> Conditional {
    let idx = dataset.index(m);
    let r = dataset.rank(g, m);
    let p_lower = BigRational::new(BigInt::one(), BigInt::from(idx.lower_count(r)));
    let p_upper = BigRational::new(BigInt::one(), BigInt::from(idx.upper_count(r)));
    let p = p_lower * p_upper;
    (0..=r)
        .flat_map(|a| (r..idx.len()).map(move |b| (a, b)))
        .map(|key| (key, p.clone()))
        .collect()
}

fn hips_conditional(dataset: &NumericalDataset, m: usize, g: usize) -> Conditional {
    let view = BoundWeightView::new(dataset, m, g);
    let til = view.total();
    let r = view.rank();
    let mut out = HashMap::new();
    for (a, w_lb) in view.lb_weights().iter().enumerate() {
        if w_lb.is_zero() {
            continue;
        }
        let p_lower = ratio(w_lb, &til);
        for (offset, w_ub) in view.ub_weights(a).iter().enumerate() {
            if !w_ub.is_zero() {
                out.insert((a, r + offset), &p_lower * ratio(w_ub, w_lb));
            }
        }
    }
    out
}

/// Σ (b − a) over intervals `[a, b]` of attribute `m` containing `v_{g,m}`, by double loop.
pub fn til_brute_force(dataset: &NumericalDataset, m: usize, g: usize) -> BigInt {
    let values = dataset.index(m).values();
    let v = dataset.value(g, m);
    let mut total = BigInt::zero();
    for &a in values.iter().filter(|&&a| a <= v) {
        for &b in values.iter().filter(|&&b| b >= v) {
            total += i128::from(b) - i128::from(a);
        }
    }
    total
}

/// Number of enumerated patterns covering `g`.
pub fn nip_brute_force(space: &EnumeratedSpace, dataset: &NumericalDataset, g: usize) -> BigUint {
    BigUint::from(
        space
            .patterns
            .iter()
            .filter(|p| p.pattern.covers(dataset, g).unwrap_or(false))
            .count(),
    )
}

/// Probability that the naive uniform baseline returns a pattern with empty cover.
///
/// Under that baseline an interval with lower rank `a` and upper rank `b` has
/// probability `(a == b ? 1 : 2) / |W|²`, independently per attribute.
pub fn naive_uniform_empty_cover_probability(space: &EnumeratedSpace, dataset: &NumericalDataset) -> BigRational {
    let mut total = BigRational::zero();
    for p in space.patterns.iter().filter(|p| p.freq == 0) {
        let mut prob = BigRational::one();
        for (m, &(a, b)) in p.ranks.iter().enumerate() {
            let w = dataset.index(m).len();
            let num = if a == b { 1 } else { 2 };
            prob *= BigRational::new(BigInt::from(num), BigInt::from(w * w));
        }
        total += prob;
    }
    total
}

/// Total variation distance between empirical counts and an exact distribution.
///
/// `counts[i]` aligns with `target[i]`; `outside` counts draws that fell outside the space.
pub fn total_variation(counts: &[u64], outside: u64, target: &[BigRational]) -> f64 {
    use num_traits::ToPrimitive;
    let n = (counts.iter().sum::<u64>() + outside) as f64;
    let inside: f64 = counts
        .iter()
        .zip(target)
        .map(|(&c, p)| (c as f64 / n - p.to_f64().unwrap_or(0.0)).abs())
        .sum();
    0.5 * (inside + outside as f64 / n)
}
