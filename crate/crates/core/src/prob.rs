//! Count histograms, probability vectors and joint tables.
//!
//! Every two-distribution formula in this crate goes through
//! [`validate_pair`] first. Sums are accumulated left to right in component
//! order so that results are reproducible bit for bit on a given platform.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|Σ p - 1|` accepted by [`ProbVector::new`] and [`JointTable::new`].
pub const SUM_TOL: f64 = 1e-9;

fn check_entries(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeValue { index, value });
        }
    }
    Ok(())
}

pub(crate) fn sequential_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| acc + v)
}

/// Raw nonnegative per-component counts, optionally labelled.
///
/// Counts may be fractional (weighted histograms). Labels are metadata only;
/// components are identified by position.
#[derive(Debug, Clone, PartialEq)]
pub struct CountHistogram {
    counts: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl CountHistogram {
    pub fn new(counts: Vec<f64>) -> Result<Self> {
        Self::build(counts, None)
    }

    pub fn with_labels(counts: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        Self::build(counts, Some(labels))
    }

    fn build(counts: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Empty);
        }
        check_entries(&counts)?;
        if !counts.iter().any(|&c| c > 0.0) {
            return Err(Error::ZeroMass);
        }
        if let Some(labels) = &labels {
            if labels.len() != counts.len() {
                return Err(Error::LabelCount {
                    labels: labels.len(),
                    counts: counts.len(),
                });
            }
            let mut seen = HashSet::with_capacity(labels.len());
            for label in labels {
                if !seen.insert(label.as_str()) {
                    return Err(Error::DuplicateLabel(label.clone()));
                }
            }
        }
        Ok(Self { counts, labels })
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> f64 {
        sequential_sum(self.counts.iter().copied())
    }
}

/// Divides every count by the total mass.
///
/// This is the one sanctioned renormalizer: [`ProbVector::new`] rejects
/// inputs that are not already normalized.
pub fn normalize(h: &CountHistogram) -> Result<ProbVector> {
    let total = h.total();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::ZeroMass);
    }
    let probs = h.counts.iter().map(|&c| c / total).collect();
    ProbVector::new(probs)
}

/// A discrete probability distribution over `s >= 1` components.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty);
        }
        check_entries(&probs)?;
        let sum = sequential_sum(probs.iter().copied());
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::NotNormalized { sum, tol: SUM_TOL });
        }
        Ok(Self { probs })
    }

    /// Uniform distribution over `s` components.
    pub fn uniform(s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::Empty);
        }
        Self::new(vec![1.0 / s as f64; s])
    }

    /// Point mass on component `index` of an `s`-component distribution.
    pub fn one_hot(s: usize, index: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::Empty);
        }
        let mut probs = vec![0.0; s];
        *probs
            .get_mut(index)
            .ok_or(Error::DimensionMismatch { left: s, right: index + 1 })? = 1.0;
        Self::new(probs)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.probs
    }
}

impl<'de> Deserialize<'de> for ProbVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(deserializer)?;
        ProbVector::new(probs).map_err(serde::de::Error::custom)
    }
}

impl AsRef<[f64]> for ProbVector {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}

/// Succeeds iff both distributions have the same number of components.
pub fn validate_pair(p: &ProbVector, q: &ProbVector) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    Ok(())
}

/// `max_i |p[i] - q[i]| <= tol`.
pub fn approx_equal(p: &ProbVector, q: &ProbVector, tol: f64) -> Result<bool> {
    validate_pair(p, q)?;
    Ok(max_abs_diff(p, q) <= tol)
}

pub(crate) fn max_abs_diff(p: &ProbVector, q: &ProbVector) -> f64 {
    p.probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// An `r x c` joint probability table, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
}

impl JointTable {
    pub fn new(grid: Vec<Vec<f64>>) -> Result<Self> {
        let (rows, cols, cells) = flatten(grid)?;
        check_entries(&cells)?;
        let sum = sequential_sum(cells.iter().copied());
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::NotNormalized { sum, tol: SUM_TOL });
        }
        Ok(Self { rows, cols, cells })
    }

    /// Builds a table from nonnegative counts, dividing by the grand total.
    pub fn from_counts(grid: Vec<Vec<f64>>) -> Result<Self> {
        let (_, cols, cells) = flatten(grid)?;
        check_entries(&cells)?;
        let total = sequential_sum(cells.iter().copied());
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::ZeroMass);
        }
        let cells: Vec<f64> = cells.into_iter().map(|c| c / total).collect();
        Self::new(cells.chunks(cols).map(<[f64]>::to_vec).collect())
    }

    /// Outer product `p(x) * p(y)`.
    pub fn product(px: &ProbVector, py: &ProbVector) -> Result<Self> {
        let grid = px
            .as_slice()
            .iter()
            .map(|&a| py.as_slice().iter().map(|&b| a * b).collect())
            .collect();
        Self::new(grid)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }
}

fn flatten(grid: Vec<Vec<f64>>) -> Result<(usize, usize, Vec<f64>)> {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::Empty);
    }
    let mut cells = Vec::with_capacity(rows * cols);
    for (row, values) in grid.into_iter().enumerate() {
        if values.len() != cols {
            return Err(Error::RaggedTable {
                row,
                expected: cols,
                found: values.len(),
            });
        }
        cells.extend(values);
    }
    Ok((rows, cols, cells))
}

/// Row sums (marginal of X) and column sums (marginal of Y).
pub fn marginals(j: &JointTable) -> (ProbVector, ProbVector) {
    let px: Vec<f64> = (0..j.rows)
        .map(|r| sequential_sum(j.row(r).iter().copied()))
        .collect();
    let py: Vec<f64> = (0..j.cols)
        .map(|c| sequential_sum((0..j.rows).map(|r| j.get(r, c))))
        .collect();
    // Each marginal sums to the table total, which is already within SUM_TOL.
    (ProbVector { probs: px }, ProbVector { probs: py })
}

/// Logarithm base, ε smoothing and the equality tolerance shared by all measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericPolicy {
    epsilon: f64,
    log_base: f64,
    equality_tol: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            epsilon: 1e-12,
            log_base: 2.0,
            equality_tol: 1e-12,
        }
    }
}

impl NumericPolicy {
    pub fn new(epsilon: f64, log_base: f64, equality_tol: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
                reason: "must be finite and >= 0",
            });
        }
        if !(log_base.is_finite() && log_base > 1.0) {
            return Err(Error::InvalidParameter {
                name: "base",
                value: log_base,
                reason: "must be finite and > 1",
            });
        }
        if !(equality_tol.is_finite() && equality_tol >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "equality_tol",
                value: equality_tol,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self {
            epsilon,
            log_base,
            equality_tol,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn log_base(&self) -> f64 {
        self.log_base
    }

    pub fn equality_tol(&self) -> f64 {
        self.equality_tol
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.log_base, self.equality_tol)
    }

    pub fn with_log_base(self, log_base: f64) -> Result<Self> {
        Self::new(self.epsilon, log_base, self.equality_tol)
    }

    /// `log_base(x)`. Bases 2, e and 10 use the dedicated routines.
    pub fn log(&self, x: f64) -> f64 {
        if self.log_base == 2.0 {
            x.log2()
        } else if self.log_base == std::f64::consts::E {
            x.ln()
        } else if self.log_base == 10.0 {
            x.log10()
        } else {
            x.ln() / self.log_base.ln()
        }
    }

    /// Converts a natural-log quantity into units of `log_base`.
    pub fn from_nats(&self, nats: f64) -> f64 {
        if self.log_base == std::f64::consts::E {
            nats
        } else {
            nats / self.log_base.ln()
        }
    }
}
