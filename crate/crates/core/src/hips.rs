//! Hyper-volume × frequency proportional sampling.
//!
//! `TIL(m, g)` is the total length of all intervals of attribute `m` that
//! contain `v_{g,m}`, and `IPH(g) = ∏_m TIL(m, g)` is the total hyper-volume of
//! the patterns covering `g`. Objects are drawn by `IPH`, then each attribute's
//! lower bound `a` by `w_lb(a) = Σ_{x∈J} x − |J|·a` and upper bound `b` by
//! `w_ub(b) = b − a`.
//!
//! Draws run on a per-attribute lattice: values are shifted to start at zero
//! and divided by the gcd of their gaps. All weights then shrink by a constant
//! factor per attribute, so probabilities are unchanged, and the drawn ranks
//! do not depend on the attribute's offset or unit.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::dataset::{AttributeIndex, NumericalDataset};
use crate::fips::RankDraw;
use crate::patterns::IntervalPattern;
use crate::weights::{partition_by, uniform_below, WeightTable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HipsError {
    #[error(
        "every interval pattern has zero hyper-volume (constant attributes: {})",
        constant_attributes.join(", ")
    )]
    DegenerateVolumeSpace { constant_attributes: Vec<String> },
}

fn to_biguint(v: BigInt) -> BigUint {
    v.to_biguint().expect("nonnegative weight")
}

fn til_from_index(idx: &AttributeIndex, rank: usize) -> BigUint {
    let k = idx.len();
    let sum_upper = idx.range_sum(rank, k - 1);
    let sum_lower = idx.range_sum(0, rank);
    let til = sum_upper * idx.lower_count(rank) - sum_lower * idx.upper_count(rank);
    to_biguint(til)
}

/// Total length of the intervals of attribute `m` containing `v_{g,m}`, in scaled units.
pub fn til(dataset: &NumericalDataset, m: usize, g: usize) -> BigUint {
    til_from_index(dataset.index(m), dataset.rank(g, m))
}

/// Total hyper-volume of the patterns covering `g`, in scaled units.
pub fn iph(dataset: &NumericalDataset, g: usize) -> BigUint {
    (0..dataset.n_attributes()).fold(BigUint::one(), |acc, m| acc * til(dataset, m, g))
}

/// `weight / total >= 1 / n`, decided by integer comparison.
pub fn at_least_uniform_share(weight: &BigUint, total: &BigUint, n: usize) -> bool {
    weight * n >= *total
}

/// Materialized lower-bound weights of one (object, attribute) pair, in scaled units.
#[derive(Debug, Clone)]
pub struct BoundWeightView<'a> {
    index: &'a AttributeIndex,
    rank: usize,
    lb_weights: Vec<BigUint>,
    lb_cumulative: WeightTable,
}

impl<'a> BoundWeightView<'a> {
    pub fn new(dataset: &'a NumericalDataset, m: usize, g: usize) -> Self {
        let index = dataset.index(m);
        let rank = dataset.rank(g, m);
        let upper_sum = index.range_sum(rank, index.len() - 1);
        let upper_count = BigInt::from(index.upper_count(rank));
        let lb_weights: Vec<BigUint> = (0..=rank)
            .map(|a| to_biguint(&upper_sum - &upper_count * index.value(a)))
            .collect();
        let lb_cumulative = WeightTable::new(lb_weights.iter().cloned());
        Self {
            index,
            rank,
            lb_weights,
            lb_cumulative,
        }
    }

    /// Rank of the object's value; lower candidates are ranks `0..=rank`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `w_lb` for each candidate lower bound rank `0..=rank`.
    pub fn lb_weights(&self) -> &[BigUint] {
        &self.lb_weights
    }

    pub fn lb_cumulative(&self) -> &[BigUint] {
        self.lb_cumulative.cumulative()
    }

    /// Σ w_lb, which equals `TIL`.
    pub fn total(&self) -> BigUint {
        self.lb_cumulative.total()
    }

    /// `w_ub(b) = b − a` for each candidate upper bound rank `rank..|W|`.
    pub fn ub_weights(&self, lower_rank: usize) -> Vec<BigUint> {
        let a = i128::from(self.index.value(lower_rank));
        (self.rank..self.index.len())
            .map(|b| BigUint::try_from(i128::from(self.index.value(b)) - a).expect("b >= a"))
            .collect()
    }
}

/// One attribute in lattice coordinates `(v − min) / unit`.
#[derive(Debug, Clone)]
struct LatticeAxis {
    unit: BigUint,
    coords: Vec<BigInt>,
    prefix: Vec<BigInt>,
}

impl LatticeAxis {
    fn new(index: &AttributeIndex) -> Self {
        let base = i128::from(index.min());
        let gaps: Vec<i128> = index.values().iter().map(|&v| i128::from(v) - base).collect();
        let unit = gaps.iter().fold(0i128, |g, &d| g.gcd(&d)).max(1);
        let coords: Vec<BigInt> = gaps.iter().map(|&d| BigInt::from(d / unit)).collect();
        let mut acc = BigInt::zero();
        let prefix = coords
            .iter()
            .map(|c| {
                acc += c;
                acc.clone()
            })
            .collect();
        Self {
            unit: BigUint::try_from(unit).expect("positive unit"),
            coords,
            prefix,
        }
    }

    fn len(&self) -> usize {
        self.coords.len()
    }

    fn prefix_before(&self, rank: usize) -> BigInt {
        if rank == 0 {
            BigInt::zero()
        } else {
            self.prefix[rank - 1].clone()
        }
    }

    /// Σ of the upper candidates' coordinates for `rank`.
    fn upper_sum(&self, rank: usize) -> BigInt {
        &self.prefix[self.len() - 1] - self.prefix_before(rank)
    }

    /// Cumulative lower-bound weight up to and including `a`.
    fn lower_cumulative(&self, upper_sum: &BigInt, upper_count: &BigInt, a: usize) -> BigInt {
        upper_sum * BigInt::from(a + 1) - upper_count * &self.prefix[a]
    }

    fn til(&self, rank: usize) -> BigUint {
        let upper_count = BigInt::from(self.len() - rank);
        to_biguint(self.lower_cumulative(&self.upper_sum(rank), &upper_count, rank))
    }

    /// Draws (lower rank, upper rank) for an object value at `rank`; requires `til(rank) > 0`.
    fn draw<R: Rng + ?Sized>(&self, rank: usize, rng: &mut R) -> (usize, usize) {
        let k = self.len();
        let upper_sum = self.upper_sum(rank);
        let upper_count = BigInt::from(k - rank);
        let lower_cdf = |a: usize| self.lower_cumulative(&upper_sum, &upper_count, a);

        let til = to_biguint(lower_cdf(rank));
        let target = BigInt::from_biguint(Sign::Plus, uniform_below(rng, &til));
        let lower = partition_by(0, rank + 1, &target, lower_cdf);

        let x_lower = &self.coords[lower];
        let before = self.prefix_before(rank);
        let upper_cdf = |b: usize| (&self.prefix[b] - &before) - x_lower * BigInt::from(b - rank + 1);
        let w_lb = to_biguint(upper_cdf(k - 1));
        let target = BigInt::from_biguint(Sign::Plus, uniform_below(rng, &w_lb));
        let upper = partition_by(rank, k, &target, upper_cdf);
        (lower, upper)
    }
}

#[derive(Debug, Clone)]
pub struct HipsState<'a> {
    dataset: &'a NumericalDataset,
    axes: Vec<LatticeAxis>,
    lattice_weights: WeightTable,
    volume_unit: BigUint,
}

impl<'a> HipsState<'a> {
    pub fn new(dataset: &'a NumericalDataset) -> Result<Self, HipsError> {
        let constant_attributes: Vec<String> = (0..dataset.n_attributes())
            .filter(|&m| dataset.index(m).len() < 2)
            .map(|m| dataset.attribute_names()[m].clone())
            .collect();
        if !constant_attributes.is_empty() {
            return Err(HipsError::DegenerateVolumeSpace { constant_attributes });
        }
        let axes: Vec<LatticeAxis> = dataset.indexes().iter().map(LatticeAxis::new).collect();
        let volume_unit = axes.iter().fold(BigUint::one(), |acc, a| acc * &a.unit);
        let lattice_weights = WeightTable::new((0..dataset.n_objects()).map(|g| {
            axes.iter()
                .enumerate()
                .fold(BigUint::one(), |acc, (m, axis)| acc * axis.til(dataset.rank(g, m)))
        }));
        if lattice_weights.total().is_zero() {
            return Err(HipsError::DegenerateVolumeSpace {
                constant_attributes: Vec::new(),
            });
        }
        Ok(Self {
            dataset,
            axes,
            lattice_weights,
            volume_unit,
        })
    }

    pub fn dataset(&self) -> &'a NumericalDataset {
        self.dataset
    }

    /// `IPH(g)` in scaled units.
    pub fn iph_weight(&self, g: usize) -> BigUint {
        self.lattice_weights.weight(g) * &self.volume_unit
    }

    pub fn iph_weights(&self) -> Vec<BigUint> {
        (0..self.dataset.n_objects()).map(|g| self.iph_weight(g)).collect()
    }

    /// `Z_hf` in scaled units.
    pub fn total(&self) -> BigUint {
        self.lattice_weights.total() * &self.volume_unit
    }

    /// Object weights as used for drawing (IPH divided by the lattice unit).
    pub fn lattice_weights(&self) -> &WeightTable {
        &self.lattice_weights
    }

    /// Cumulative lower-bound weights in lattice units for `(m, g)`; used to cross-check
    /// the closed form against [`BoundWeightView`].
    pub fn lattice_lower_cumulative(&self, m: usize, g: usize) -> Vec<BigUint> {
        let axis = &self.axes[m];
        let rank = self.dataset.rank(g, m);
        let upper_sum = axis.upper_sum(rank);
        let upper_count = BigInt::from(axis.len() - rank);
        (0..=rank)
            .map(|a| to_biguint(axis.lower_cumulative(&upper_sum, &upper_count, a)))
            .collect()
    }

    /// Per-attribute lattice unit; scaled weights of attribute `m` are this multiple of lattice weights.
    pub fn lattice_unit(&self, m: usize) -> &BigUint {
        &self.axes[m].unit
    }

    /// Whether `g` is drawn at least as often as under uniform object sampling.
    pub fn uniform_comparison(&self, g: usize) -> bool {
        at_least_uniform_share(
            &self.lattice_weights.weight(g),
            &self.lattice_weights.total(),
            self.dataset.n_objects(),
        )
    }

    pub fn sample_ranks<R: Rng + ?Sized>(&self, rng: &mut R) -> RankDraw {
        let object = self.lattice_weights.sample(rng);
        let ranks = self
            .axes
            .iter()
            .enumerate()
            .map(|(m, axis)| axis.draw(self.dataset.rank(object, m), rng))
            .collect();
        RankDraw { object, ranks }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> IntervalPattern {
        self.sample_ranks(rng).to_pattern(self.dataset)
    }

    pub fn sample_k<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Vec<IntervalPattern> {
        (0..k).map(|_| self.sample(rng)).collect()
    }
}
