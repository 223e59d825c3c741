//! Numerical tables stored as exact scaled integers.
//!
//! Every column is scaled by the smallest power of ten that turns each of its
//! decimal cells into an integer, so all downstream weight arithmetic is exact.
//! Each attribute carries an [`AttributeIndex`] over its distinct values.

use std::io::Read;
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

/// A cell value after per-attribute decimal scaling.
pub type ScaledValue = i64;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: cannot parse {cell:?} as a decimal number")]
    NonNumericCell {
        line: usize,
        column: usize,
        cell: String,
    },
    #[error("dataset has no data rows")]
    EmptyDataset,
    #[error("dataset has no attributes")]
    NoAttributes,
    #[error("column {column}: value {cell:?} overflows the scaled integer range")]
    ValueOverflow { column: usize, cell: String },
    #[error("row {row} has {found} values, expected {expected}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sorted distinct values of one attribute with exact prefix sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeIndex {
    distinct_sorted: Vec<ScaledValue>,
    prefix_sums: Vec<BigInt>,
}

impl AttributeIndex {
    pub fn from_values(values: impl IntoIterator<Item = ScaledValue>) -> Self {
        let mut distinct_sorted: Vec<ScaledValue> = values.into_iter().collect();
        distinct_sorted.sort_unstable();
        distinct_sorted.dedup();
        let mut prefix_sums = Vec::with_capacity(distinct_sorted.len());
        let mut acc = BigInt::zero();
        for &v in &distinct_sorted {
            acc += v;
            prefix_sums.push(acc.clone());
        }
        Self {
            distinct_sorted,
            prefix_sums,
        }
    }

    /// Number of distinct values, |W_m|.
    pub fn len(&self) -> usize {
        self.distinct_sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distinct_sorted.is_empty()
    }

    pub fn values(&self) -> &[ScaledValue] {
        &self.distinct_sorted
    }

    pub fn value(&self, rank: usize) -> ScaledValue {
        self.distinct_sorted[rank]
    }

    pub fn min(&self) -> ScaledValue {
        self.distinct_sorted[0]
    }

    pub fn max(&self) -> ScaledValue {
        self.distinct_sorted[self.len() - 1]
    }

    pub fn rank_of(&self, value: ScaledValue) -> Option<usize> {
        self.distinct_sorted.binary_search(&value).ok()
    }

    pub fn prefix_sums(&self) -> &[BigInt] {
        &self.prefix_sums
    }

    /// Σ of the distinct values with rank in `lo..=hi`.
    pub fn range_sum(&self, lo: usize, hi: usize) -> BigInt {
        debug_assert!(lo <= hi && hi < self.len());
        if lo == 0 {
            self.prefix_sums[hi].clone()
        } else {
            &self.prefix_sums[hi] - &self.prefix_sums[lo - 1]
        }
    }

    /// |I(v)| for the value at `rank`: candidate lower bounds.
    pub fn lower_count(&self, rank: usize) -> usize {
        rank + 1
    }

    /// |J(v)| for the value at `rank`: candidate upper bounds.
    pub fn upper_count(&self, rank: usize) -> usize {
        self.len() - rank
    }

    /// Number of closed intervals over the distinct values.
    pub fn interval_count(&self) -> u128 {
        let w = self.len() as u128;
        w * (w + 1) / 2
    }
}

/// Objects × attributes table of scaled integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumericalDataset {
    attributes: Vec<String>,
    n_objects: usize,
    values: Vec<ScaledValue>,
    ranks: Vec<u32>,
    scale_exponents: Vec<u32>,
    indexes: Vec<AttributeIndex>,
}

impl NumericalDataset {
    /// Builds a dataset from already scaled rows.
    pub fn new(
        attributes: Vec<String>,
        rows: Vec<Vec<ScaledValue>>,
        scale_exponents: Vec<u32>,
    ) -> Result<Self, DatasetError> {
        let n_attr = attributes.len();
        if n_attr == 0 {
            return Err(DatasetError::NoAttributes);
        }
        if rows.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }
        if scale_exponents.len() != n_attr {
            return Err(DatasetError::DimensionMismatch {
                row: 0,
                expected: n_attr,
                found: scale_exponents.len(),
            });
        }
        let n_objects = rows.len();
        let mut values = Vec::with_capacity(n_objects * n_attr);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n_attr {
                return Err(DatasetError::DimensionMismatch {
                    row,
                    expected: n_attr,
                    found: r.len(),
                });
            }
            values.extend(r);
        }
        let indexes: Vec<AttributeIndex> = (0..n_attr)
            .map(|m| AttributeIndex::from_values((0..n_objects).map(|g| values[g * n_attr + m])))
            .collect();
        let ranks = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let rank = indexes[i % n_attr]
                    .rank_of(v)
                    .expect("value present in its own column index");
                u32::try_from(rank).expect("fewer than 2^32 distinct values per attribute")
            })
            .collect();
        Ok(Self {
            attributes,
            n_objects,
            values,
            ranks,
            scale_exponents,
            indexes,
        })
    }

    /// Builds an unscaled integer dataset with generated attribute names `m1, m2, ...`.
    pub fn from_integer_rows(rows: Vec<Vec<ScaledValue>>) -> Result<Self, DatasetError> {
        let n_attr = rows.first().map_or(0, Vec::len);
        let names = (1..=n_attr).map(|i| format!("m{i}")).collect();
        Self::new(names, rows, vec![0; n_attr])
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attributes
    }

    pub fn scale_exponents(&self) -> &[u32] {
        &self.scale_exponents
    }

    pub fn value(&self, g: usize, m: usize) -> ScaledValue {
        self.values[g * self.n_attributes() + m]
    }

    /// Rank of `v_{g,m}` within `W_m`.
    pub fn rank(&self, g: usize, m: usize) -> usize {
        self.ranks[g * self.n_attributes() + m] as usize
    }

    pub fn row(&self, g: usize) -> &[ScaledValue] {
        let n = self.n_attributes();
        &self.values[g * n..(g + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[ScaledValue]> {
        self.values.chunks(self.n_attributes())
    }

    pub fn column(&self, m: usize) -> impl Iterator<Item = ScaledValue> + '_ {
        self.values
            .iter()
            .skip(m)
            .step_by(self.n_attributes())
            .copied()
    }

    pub fn index(&self, m: usize) -> &AttributeIndex {
        &self.indexes[m]
    }

    pub fn indexes(&self) -> &[AttributeIndex] {
        &self.indexes
    }

    /// Σ_m |W_m|.
    pub fn total_distinct_values(&self) -> usize {
        self.indexes.iter().map(AttributeIndex::len).sum()
    }

    /// ∏_m |W_m|(|W_m|+1)/2, the number of interval patterns.
    pub fn search_space_size(&self) -> BigUint {
        self.indexes
            .iter()
            .fold(BigUint::one(), |acc, idx| acc * idx.interval_count())
    }

    /// Sum of the per-attribute scale exponents; hyper-volumes are scaled by 10 to this power.
    pub fn volume_scale_exponent(&self) -> u32 {
        self.scale_exponents.iter().sum()
    }

    /// Renders a stored value of attribute `m` as an unscaled decimal.
    pub fn format_value(&self, m: usize, v: ScaledValue) -> String {
        format_scaled(&BigInt::from(v), self.scale_exponents[m])
    }

    /// Converts an unscaled decimal cell into the stored integer for attribute `m`.
    pub fn scale_cell(&self, m: usize, cell: &str) -> Option<ScaledValue> {
        let dec = Decimal::parse(cell)?;
        dec.scaled(self.scale_exponents[m])
    }

    /// A copy of this dataset with the value matrix replaced, keeping names and scales.
    pub fn with_rows(&self, rows: Vec<Vec<ScaledValue>>) -> Result<Self, DatasetError> {
        Self::new(self.attributes.clone(), rows, self.scale_exponents.clone())
    }

    pub fn to_rows(&self) -> Vec<Vec<ScaledValue>> {
        self.rows().map(<[ScaledValue]>::to_vec).collect()
    }

    /// Writes the dataset as CSV with unscaled decimals.
    pub fn to_csv_string(&self) -> String {
        let mut out = self.attributes.join(",");
        out.push('\n');
        for g in 0..self.n_objects {
            let cells: Vec<String> = (0..self.n_attributes())
                .map(|m| self.format_value(m, self.value(g, m)))
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Builds the index of attribute `m` from the column values.
pub fn build_index(dataset: &NumericalDataset, m: usize) -> AttributeIndex {
    AttributeIndex::from_values(dataset.column(m))
}

/// Formats `value / 10^exponent` exactly, trimming trailing fractional zeros.
pub fn format_scaled(value: &BigInt, exponent: u32) -> String {
    let negative = value.sign() == num_bigint::Sign::Minus;
    let digits = value.magnitude().to_str_radix(10);
    let exp = exponent as usize;
    let (int_part, frac_part) = if digits.len() > exp {
        let split = digits.len() - exp;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        ("0".to_string(), format!("{}{}", "0".repeat(exp - digits.len()), digits))
    };
    let frac = frac_part.trim_end_matches('0');
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&int_part);
    if !frac.is_empty() {
        out.push('.');
        out.push_str(frac);
    }
    out
}

/// A parsed decimal literal `mantissa × 10^-frac_digits` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Decimal {
    mantissa: i128,
    frac_digits: u32,
}

impl Decimal {
    fn parse(cell: &str) -> Option<Self> {
        let s = cell.trim();
        let (body, exponent) = match s.find(['e', 'E']) {
            Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
            None => (s, 0),
        };
        let (negative, body) = match body.as_bytes().first()? {
            b'-' => (true, &body[1..]),
            b'+' => (false, &body[1..]),
            _ => (false, body),
        };
        let (int_digits, frac_digits) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_digits.is_empty() && frac_digits.is_empty() {
            return None;
        }
        if !int_digits.bytes().chain(frac_digits.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut mantissa: i128 = 0;
        for b in int_digits.bytes().chain(frac_digits.bytes()) {
            mantissa = mantissa.checked_mul(10)?.checked_add(i128::from(b - b'0'))?;
        }
        if negative {
            mantissa = -mantissa;
        }
        let mut frac = frac_digits.len() as i64 - i64::from(exponent);
        while frac < 0 {
            mantissa = mantissa.checked_mul(10)?;
            frac += 1;
        }
        let mut frac = u32::try_from(frac).ok()?;
        while frac > 0 && mantissa % 10 == 0 {
            mantissa /= 10;
            frac -= 1;
        }
        Some(Self {
            mantissa,
            frac_digits: frac,
        })
    }

    fn scaled(self, exponent: u32) -> Option<ScaledValue> {
        let shift = exponent.checked_sub(self.frac_digits)?;
        let factor = 10i128.checked_pow(shift)?;
        let v = self.mantissa.checked_mul(factor)?;
        ScaledValue::try_from(v).ok()
    }
}

/// Parses a numeric CSV with a mandatory header row.
pub fn parse_csv<R: Read>(reader: R) -> Result<NumericalDataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let attributes: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if attributes.is_empty() || attributes.iter().all(String::is_empty) {
        return Err(DatasetError::NoAttributes);
    }
    let n_attr = attributes.len();

    let mut cells: Vec<Vec<(Decimal, String)>> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i + 2, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != n_attr {
            return Err(DatasetError::RaggedRow {
                line,
                expected: n_attr,
                found: record.len(),
            });
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(column, cell)| {
                Decimal::parse(cell)
                    .map(|d| (d, cell.to_string()))
                    .ok_or_else(|| DatasetError::NonNumericCell {
                        line,
                        column,
                        cell: cell.to_string(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        cells.push(row);
    }
    if cells.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }

    let scale_exponents: Vec<u32> = (0..n_attr)
        .map(|m| cells.iter().map(|r| r[m].0.frac_digits).max().unwrap_or(0))
        .collect();
    let rows = cells
        .into_iter()
        .map(|r| {
            r.into_iter()
                .enumerate()
                .map(|(m, (d, cell))| {
                    d.scaled(scale_exponents[m])
                        .ok_or(DatasetError::ValueOverflow { column: m, cell })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    NumericalDataset::new(attributes, rows, scale_exponents)
}

pub fn read_csv_path(path: impl AsRef<Path>) -> Result<NumericalDataset, DatasetError> {
    let file = std::fs::File::open(path)?;
    parse_csv(std::io::BufReader::new(file))
}
