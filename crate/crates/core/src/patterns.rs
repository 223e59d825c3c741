//! Interval patterns: one closed interval per attribute, in column order.

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{format_scaled, NumericalDataset, ScaledValue};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern has {found} intervals but the dataset has {expected} attributes")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("attribute {attribute}: lower bound exceeds upper bound")]
    InvertedInterval { attribute: usize },
    #[error("attribute {attribute}: bound {value} is not a value of the attribute")]
    UnknownBound { attribute: usize, value: String },
    #[error("cannot describe an empty set of objects")]
    EmptySet,
    #[error("object {0} is out of range")]
    UnknownObject(usize),
    #[error("malformed pattern record: {0}")]
    Malformed(String),
}

/// Interestingness measures over interval patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Frequency,
    VolumeFrequency,
    /// Constant 1 for every pattern.
    Uniform,
}

impl Measure {
    /// Exact measure value in scaled units.
    pub fn evaluate(self, pattern: &IntervalPattern, dataset: &NumericalDataset) -> BigUint {
        match self {
            Measure::Frequency => BigUint::from(pattern.frequency(dataset)),
            Measure::VolumeFrequency => pattern.hyper_volume() * pattern.frequency(dataset),
            Measure::Uniform => BigUint::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntervalPattern {
    bounds: Vec<(ScaledValue, ScaledValue)>,
}

impl IntervalPattern {
    pub fn new(bounds: Vec<(ScaledValue, ScaledValue)>) -> Result<Self, PatternError> {
        if let Some(attribute) = bounds.iter().position(|(a, b)| a > b) {
            return Err(PatternError::InvertedInterval { attribute });
        }
        Ok(Self { bounds })
    }

    pub(crate) fn from_bounds_unchecked(bounds: Vec<(ScaledValue, ScaledValue)>) -> Self {
        debug_assert!(bounds.iter().all(|(a, b)| a <= b));
        Self { bounds }
    }

    /// Builds a pattern from per-attribute (lower rank, upper rank) pairs.
    pub fn from_ranks(dataset: &NumericalDataset, ranks: &[(usize, usize)]) -> Self {
        let bounds = ranks
            .iter()
            .enumerate()
            .map(|(m, &(lo, hi))| (dataset.index(m).value(lo), dataset.index(m).value(hi)))
            .collect();
        Self::from_bounds_unchecked(bounds)
    }

    /// `B[g]`: the degenerate pattern of a single object.
    pub fn point(dataset: &NumericalDataset, g: usize) -> Self {
        Self::from_bounds_unchecked(dataset.row(g).iter().map(|&v| (v, v)).collect())
    }

    /// Each interval spans the whole attribute range.
    pub fn unconstrained(dataset: &NumericalDataset) -> Self {
        Self::from_bounds_unchecked(dataset.indexes().iter().map(|i| (i.min(), i.max())).collect())
    }

    pub fn bounds(&self) -> &[(ScaledValue, ScaledValue)] {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    fn check_dimension(&self, dataset: &NumericalDataset) -> Result<(), PatternError> {
        if self.len() != dataset.n_attributes() {
            return Err(PatternError::DimensionMismatch {
                expected: dataset.n_attributes(),
                found: self.len(),
            });
        }
        Ok(())
    }

    /// Checks dimension and that every bound is a value occurring in its attribute.
    pub fn validate(&self, dataset: &NumericalDataset) -> Result<(), PatternError> {
        self.check_dimension(dataset)?;
        for (m, &(a, b)) in self.bounds.iter().enumerate() {
            for v in [a, b] {
                if dataset.index(m).rank_of(v).is_none() {
                    return Err(PatternError::UnknownBound {
                        attribute: m,
                        value: dataset.format_value(m, v),
                    });
                }
            }
        }
        Ok(())
    }

    fn covers_row(&self, row: &[ScaledValue]) -> bool {
        self.bounds
            .iter()
            .zip(row)
            .all(|(&(a, b), &v)| a <= v && v <= b)
    }

    pub fn covers(&self, dataset: &NumericalDataset, g: usize) -> Result<bool, PatternError> {
        self.check_dimension(dataset)?;
        if g >= dataset.n_objects() {
            return Err(PatternError::UnknownObject(g));
        }
        Ok(self.covers_row(dataset.row(g)))
    }

    /// Object ids covered by the pattern, ascending.
    pub fn cover(&self, dataset: &NumericalDataset) -> Result<Vec<usize>, PatternError> {
        self.check_dimension(dataset)?;
        Ok(self.cover_unchecked(dataset))
    }

    pub(crate) fn cover_unchecked(&self, dataset: &NumericalDataset) -> Vec<usize> {
        dataset
            .rows()
            .enumerate()
            .filter(|(_, row)| self.covers_row(row))
            .map(|(g, _)| g)
            .collect()
    }

    /// |cover|. Panics on a dimension mismatch.
    pub fn frequency(&self, dataset: &NumericalDataset) -> usize {
        assert_eq!(self.len(), dataset.n_attributes(), "pattern dimension");
        dataset.rows().filter(|row| self.covers_row(row)).count()
    }

    /// ∏ (upper − lower) in scaled units.
    pub fn hyper_volume(&self) -> BigUint {
        self.bounds.iter().fold(BigUint::one(), |acc, &(a, b)| {
            acc * BigUint::try_from(i128::from(b) - i128::from(a)).expect("lower <= upper")
        })
    }

    /// Hyper-volume as an unscaled decimal string.
    pub fn hyper_volume_decimal(&self, dataset: &NumericalDataset) -> String {
        format_scaled(&BigInt::from(self.hyper_volume()), dataset.volume_scale_exponent())
    }

    pub fn is_degenerate(&self) -> bool {
        self.bounds.iter().any(|(a, b)| a == b)
    }

    /// True if every interval of `self` contains the matching interval of `other`.
    pub fn contains(&self, other: &IntervalPattern) -> bool {
        self.len() == other.len()
            && self
                .bounds
                .iter()
                .zip(&other.bounds)
                .all(|(&(a, b), &(c, d))| a <= c && d <= b)
    }
}

/// The smallest pattern covering every object in `objects`.
pub fn desc(objects: &[usize], dataset: &NumericalDataset) -> Result<IntervalPattern, PatternError> {
    let (&first, rest) = objects.split_first().ok_or(PatternError::EmptySet)?;
    if let Some(&g) = objects.iter().find(|&&g| g >= dataset.n_objects()) {
        return Err(PatternError::UnknownObject(g));
    }
    let mut bounds: Vec<(ScaledValue, ScaledValue)> =
        dataset.row(first).iter().map(|&v| (v, v)).collect();
    for &g in rest {
        for (bound, &v) in bounds.iter_mut().zip(dataset.row(g)) {
            bound.0 = bound.0.min(v);
            bound.1 = bound.1.max(v);
        }
    }
    Ok(IntervalPattern::from_bounds_unchecked(bounds))
}

/// One line of a pattern file: bounds and volume in unscaled decimals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub bounds: Vec<[String; 2]>,
    pub freq: usize,
    pub vol: String,
}

impl PatternRecord {
    pub fn from_pattern(pattern: &IntervalPattern, dataset: &NumericalDataset) -> Self {
        let bounds = pattern
            .bounds()
            .iter()
            .enumerate()
            .map(|(m, &(a, b))| [dataset.format_value(m, a), dataset.format_value(m, b)])
            .collect();
        Self {
            bounds,
            freq: pattern.frequency(dataset),
            vol: pattern.hyper_volume_decimal(dataset),
        }
    }

    /// Converts back to scaled bounds; fails if a bound is not representable or not in `W_m`.
    pub fn to_pattern(&self, dataset: &NumericalDataset) -> Result<IntervalPattern, PatternError> {
        if self.bounds.len() != dataset.n_attributes() {
            return Err(PatternError::DimensionMismatch {
                expected: dataset.n_attributes(),
                found: self.bounds.len(),
            });
        }
        let bounds = self
            .bounds
            .iter()
            .enumerate()
            .map(|(m, [a, b])| {
                let parse = |s: &String| {
                    dataset
                        .scale_cell(m, s)
                        .ok_or_else(|| PatternError::UnknownBound {
                            attribute: m,
                            value: s.clone(),
                        })
                };
                Ok((parse(a)?, parse(b)?))
            })
            .collect::<Result<Vec<_>, PatternError>>()?;
        let pattern = IntervalPattern::new(bounds)?;
        pattern.validate(dataset)?;
        Ok(pattern)
    }
}

/// Serializes a pattern as a single JSON line (no trailing newline).
pub fn to_json_line(pattern: &IntervalPattern, dataset: &NumericalDataset) -> String {
    let record = PatternRecord::from_pattern(pattern, dataset);
    // bounds are emitted as JSON numbers, so build the value by hand
    let bounds: Vec<serde_json::Value> = record
        .bounds
        .iter()
        .map(|[a, b]| serde_json::json!([number(a), number(b)]))
        .collect();
    serde_json::json!({ "bounds": bounds, "freq": record.freq, "vol": record.vol }).to_string()
}

fn number(decimal: &str) -> serde_json::Value {
    serde_json::from_str::<serde_json::Number>(decimal)
        .map(serde_json::Value::Number)
        .unwrap_or_else(|_| serde_json::Value::String(decimal.to_string()))
}

/// Parses a line produced by [`to_json_line`].
pub fn from_json_line(line: &str, dataset: &NumericalDataset) -> Result<IntervalPattern, PatternError> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| PatternError::Malformed(e.to_string()))?;
    let bounds = value
        .get("bounds")
        .and_then(|b| b.as_array())
        .ok_or_else(|| PatternError::Malformed("missing bounds".into()))?;
    let as_text = |v: &serde_json::Value| match v {
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::String(s) => Ok(s.clone()),
        _ => Err(PatternError::Malformed("bound is not a number".into())),
    };
    let bounds = bounds
        .iter()
        .map(|pair| match pair.as_array().map(Vec::as_slice) {
            Some([a, b]) => Ok([as_text(a)?, as_text(b)?]),
            _ => Err(PatternError::Malformed("bound is not a pair".into())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let record = PatternRecord {
        bounds,
        freq: 0,
        vol: String::new(),
    };
    record.to_pattern(dataset)
}
