//! Exact sampling of interval patterns from numerical data.
//!
//! Two samplers draw patterns without enumerating the pattern space:
//!
//! - [`fips`] draws a pattern with probability proportional to its frequency.
//! - [`hips`] draws with probability proportional to hyper-volume × frequency.
//!
//! [`baselines`] holds the comparison samplers, [`oracle`] enumerates small
//! pattern spaces to give exact target distributions, and [`eval`] computes
//! the evaluation metrics used to compare methods.

pub mod baselines;
pub mod dataset;
pub mod eval;
pub mod fips;
pub mod hips;
pub mod oracle;
pub mod patterns;
pub mod sampler;
pub mod weights;

pub use dataset::{parse_csv, read_csv_path, AttributeIndex, DatasetError, NumericalDataset, ScaledValue};
pub use fips::{nip, FipsState, RankDraw};
pub use hips::{iph, til, BoundWeightView, HipsError, HipsState};
pub use patterns::{desc, IntervalPattern, Measure, PatternError};
pub use sampler::{Method, Sampler};
pub use weights::{seeded_rng, worker_rng, SeededRng, WeightTable};
