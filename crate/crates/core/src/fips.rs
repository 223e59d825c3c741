//! Frequency-proportional sampling.
//!
//! Each object is weighted by the number of interval patterns covering it,
//! `NIP(g) = ∏_m |I(v_{g,m})| · |J(v_{g,m})|`. Drawing an object by that weight
//! and then a uniform covering pattern gives every pattern a probability of
//! `freq / Z_f` with `Z_f = Σ_g NIP(g)`.

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;

use crate::dataset::NumericalDataset;
use crate::patterns::IntervalPattern;
use crate::weights::WeightTable;

/// Number of interval patterns covering object `g`.
pub fn nip(dataset: &NumericalDataset, g: usize) -> BigUint {
    (0..dataset.n_attributes()).fold(BigUint::one(), |acc, m| {
        let idx = dataset.index(m);
        let r = dataset.rank(g, m);
        acc * (idx.lower_count(r) as u128 * idx.upper_count(r) as u128)
    })
}

/// A drawn object together with the drawn (lower rank, upper rank) per attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankDraw {
    pub object: usize,
    pub ranks: Vec<(usize, usize)>,
}

impl RankDraw {
    pub fn to_pattern(&self, dataset: &NumericalDataset) -> IntervalPattern {
        IntervalPattern::from_ranks(dataset, &self.ranks)
    }
}

#[derive(Debug, Clone)]
pub struct FipsState<'a> {
    dataset: &'a NumericalDataset,
    nip_weights: Vec<BigUint>,
    table: WeightTable,
}

impl<'a> FipsState<'a> {
    pub fn new(dataset: &'a NumericalDataset) -> Self {
        let nip_weights: Vec<BigUint> = (0..dataset.n_objects()).map(|g| nip(dataset, g)).collect();
        let table = WeightTable::new(nip_weights.iter().cloned());
        Self {
            dataset,
            nip_weights,
            table,
        }
    }

    pub fn dataset(&self) -> &'a NumericalDataset {
        self.dataset
    }

    pub fn nip_weights(&self) -> &[BigUint] {
        &self.nip_weights
    }

    pub fn cumulative(&self) -> &[BigUint] {
        self.table.cumulative()
    }

    /// `Z_f`, the sum of all pattern frequencies.
    pub fn total(&self) -> BigUint {
        self.table.total()
    }

    pub fn sample_ranks<R: Rng + ?Sized>(&self, rng: &mut R) -> RankDraw {
        let object = self.table.sample(rng);
        let ranks = (0..self.dataset.n_attributes())
            .map(|m| {
                let r = self.dataset.rank(object, m);
                let k = self.dataset.index(m).len();
                (rng.random_range(0..=r), rng.random_range(r..k))
            })
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::seeded_rng;

    fn table1() -> NumericalDataset {
        NumericalDataset::from_integer_rows(vec![
            vec![2, 8, 130],
            vec![4, 12, 102],
            vec![3, 7, 91],
            vec![2, 9, 101],
            vec![6, 12, 110],
        ])
        .unwrap()
    }

    #[test]
    fn nip_of_g3() {
        assert_eq!(nip(&table1(), 2), BigUint::from(120u32));
    }

    #[test]
    fn single_object_weights() {
        let ds = NumericalDataset::from_integer_rows(vec![vec![4, -1]]).unwrap();
        assert_eq!(nip(&ds, 0), BigUint::one());
        let ds = NumericalDataset::from_integer_rows(vec![vec![7]]).unwrap();
        assert_eq!(FipsState::new(&ds).total(), BigUint::one());
        let ds = NumericalDataset::from_integer_rows(vec![vec![7], vec![7]]).unwrap();
        assert_eq!(FipsState::new(&ds).total(), BigUint::from(2u32));
    }

    #[test]
    fn cumulative_is_nondecreasing_and_bounded_below() {
        let ds = table1();
        let state = FipsState::new(&ds);
        assert!(state.cumulative().windows(2).all(|w| w[0] <= w[1]));
        assert!(state.total() >= BigUint::from(ds.n_objects()));
    }

    #[test]
    fn draws_cover_their_object() {
        let ds = table1();
        let state = FipsState::new(&ds);
        let mut rng = seeded_rng(11);
        for _ in 0..500 {
            let draw = state.sample_ranks(&mut rng);
            let p = draw.to_pattern(&ds);
            assert!(p.covers(&ds, draw.object).unwrap());
        }
    }

    #[test]
    fn k_draws_and_determinism() {
        let ds = table1();
        let state = FipsState::new(&ds);
        assert!(state.sample_k(0, &mut seeded_rng(1)).is_empty());
        let a = state.sample_k(500, &mut seeded_rng(5));
        let b = state.sample_k(500, &mut seeded_rng(5));
        assert_eq!(a.len(), 500);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.frequency(&ds) >= 1));
    }
}
