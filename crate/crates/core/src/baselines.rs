//! Comparison samplers without any measure-proportional guarantee.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::NumericalDataset;
use crate::patterns::IntervalPattern;

/// Draws two values of each attribute uniformly and independently and sorts them.
///
/// No coverage control: the result may cover no object.
pub fn sample_uniform_naive<R: Rng + ?Sized>(dataset: &NumericalDataset, rng: &mut R) -> IntervalPattern {
    let bounds = dataset
        .indexes()
        .iter()
        .map(|idx| {
            let x = idx.value(rng.random_range(0..idx.len()));
            let y = idx.value(rng.random_range(0..idx.len()));
            (x.min(y), x.max(y))
        })
        .collect();
    IntervalPattern::from_bounds_unchecked(bounds)
}

/// Pairs `(a, b)` of ranks with `a <= b` where at least one endpoint is marked,
/// counted per lower rank.
fn pair_counts(marked: &[bool]) -> Vec<u64> {
    let k = marked.len();
    let mut counts = vec![0u64; k];
    let mut marked_from = 0u64;
    for i in (0..k).rev() {
        if marked[i] {
            marked_from += 1;
            counts[i] = (k - i) as u64;
        } else {
            counts[i] = marked_from;
        }
    }
    counts
}

/// Uniform over valid pairs; returns (lower rank, upper rank).
fn draw_pair<R: Rng + ?Sized>(marked: &[bool], rng: &mut R) -> (usize, usize) {
    let counts = pair_counts(marked);
    let total: u64 = counts.iter().sum();
    let mut target = rng.random_range(0..total);
    let lower = counts
        .iter()
        .position(|&c| {
            if target < c {
                true
            } else {
                target -= c;
                false
            }
        })
        .expect("target below total");
    let offset = target as usize;
    let upper = if marked[lower] {
        lower + offset
    } else {
        (lower..marked.len())
            .filter(|&j| marked[j])
            .nth(offset)
            .expect("offset below marked count")
    };
    (lower, upper)
}

/// Coverage-controlled uniform sampler.
///
/// Attributes are visited in a uniformly random order. For each attribute, an
/// interval is drawn uniformly among the pairs `a <= b` over the attribute's
/// values where at least one endpoint is the value of an object still covered
/// by the partial pattern. That endpoint lies inside `[a, b]`, so the cover
/// never becomes empty.
pub fn sample_random_cover<R: Rng + ?Sized>(dataset: &NumericalDataset, rng: &mut R) -> IntervalPattern {
    let n_attr = dataset.n_attributes();
    let mut order: Vec<usize> = (0..n_attr).collect();
    order.shuffle(rng);
    let mut covered: Vec<usize> = (0..dataset.n_objects()).collect();
    let mut ranks = vec![(0usize, 0usize); n_attr];
    for m in order {
        let mut marked = vec![false; dataset.index(m).len()];
        for &g in &covered {
            marked[dataset.rank(g, m)] = true;
        }
        let (lo, hi) = draw_pair(&marked, rng);
        ranks[m] = (lo, hi);
        covered.retain(|&g| (lo..=hi).contains(&dataset.rank(g, m)));
        assert!(!covered.is_empty(), "random-cover interval left the cover empty");
    }
    IntervalPattern::from_ranks(dataset, &ranks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::seeded_rng;
    use std::collections::HashMap;

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
    fn pair_counts_match_brute_force() {
        let masks = [
            vec![true],
            vec![false, true, false, false],
            vec![true, false, true, false, true],
            vec![false, false, true],
        ];
        for marked in masks {
            let k = marked.len();
            let counts = pair_counts(&marked);
            for (a, &count) in counts.iter().enumerate() {
                let brute = (a..k).filter(|&b| marked[a] || marked[b]).count() as u64;
                assert_eq!(count, brute, "{marked:?} a={a}");
            }
        }
    }

    #[test]
    fn draw_pair_is_uniform_over_valid_pairs() {
        let marked = [false, true, false, false, true];
        let valid: Vec<(usize, usize)> = (0..5)
            .flat_map(|a| (a..5).map(move |b| (a, b)))
            .filter(|&(a, b)| marked[a] || marked[b])
            .collect();
        let mut rng = seeded_rng(8);
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        let n = 60_000;
        for _ in 0..n {
            *counts.entry(draw_pair(&marked, &mut rng)).or_default() += 1;
        }
        assert_eq!(counts.len(), valid.len());
        let expected = n as f64 / valid.len() as f64;
        for pair in valid {
            let c = counts[&pair] as f64;
            assert!((c - expected).abs() < 0.08 * expected, "{pair:?}: {c} vs {expected}");
        }
    }

    #[test]
    fn random_cover_never_empty() {
        let ds = table1();
        let mut rng = seeded_rng(2);
        for _ in 0..10_000 {
            let p = sample_random_cover(&ds, &mut rng);
            p.validate(&ds).unwrap();
            assert!(p.frequency(&ds) >= 1);
        }
    }

    #[test]
    fn single_object_random_cover() {
        let ds = NumericalDataset::from_integer_rows(vec![vec![3, 1]]).unwrap();
        let p = sample_random_cover(&ds, &mut seeded_rng(0));
        assert_eq!(p.cover(&ds).unwrap(), vec![0]);
    }

    #[test]
    fn naive_uniform_bounds_are_attribute_values() {
        let ds = table1();
        let mut rng = seeded_rng(1);
        let mut empty = 0;
        for _ in 0..2000 {
            let p = sample_uniform_naive(&ds, &mut rng);
            p.validate(&ds).unwrap();
            empty += usize::from(p.frequency(&ds) == 0);
        }
        assert!(empty > 0);
    }
}
