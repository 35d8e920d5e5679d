//! Empirical distributions over prediction tables.
//!
//! Features never appear here: every algorithm consumes a unit only through
//! its label and the two stored prediction vectors, so a unit is identified
//! by an integer id. Rows are kept sorted by id and every reduction walks
//! them in that order, which makes metrics bit-reproducible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total probability mass of a dataset.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// One of the two predictors being reconciled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Predictor {
    First,
    Second,
}

impl Predictor {
    pub const BOTH: [Predictor; 2] = [Predictor::First, Predictor::Second];

    /// Zero-based slot, for indexing `[T; 2]` arrays.
    pub fn index(self) -> usize {
        match self {
            Predictor::First => 0,
            Predictor::Second => 1,
        }
    }

    /// One-based number as used in files and on the command line.
    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn other(self) -> Predictor {
        match self {
            Predictor::First => Predictor::Second,
            Predictor::Second => Predictor::First,
        }
    }

    pub fn from_number(n: u8) -> Result<Predictor> {
        match n {
            1 => Ok(Predictor::First),
            2 => Ok(Predictor::Second),
            other => Err(Error::config(format!(
                "unknown predictor index {other}, expected 1 or 2"
            ))),
        }
    }
}

impl From<Predictor> for u8 {
    fn from(p: Predictor) -> u8 {
        p.number()
    }
}

impl TryFrom<u8> for Predictor {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        Predictor::from_number(n)
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.number())
    }
}

/// Owned description of a single unit, used to build datasets.
#[derive(Clone, Debug, PartialEq)]
pub struct Unit {
    pub id: u64,
    pub weight: f64,
    pub label: Vec<f64>,
    pub predictions: [Vec<f64>; 2],
}

impl Unit {
    pub fn new(id: u64, weight: f64, label: Vec<f64>, f1: Vec<f64>, f2: Vec<f64>) -> Self {
        Unit {
            id,
            weight,
            label,
            predictions: [f1, f2],
        }
    }
}

/// A weighted empirical distribution with labels and two base prediction tables.
///
/// Tables are stored row-major: row `i` occupies `[i * dim, (i + 1) * dim)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDataset {
    dim: usize,
    ids: Vec<u64>,
    weights: Vec<f64>,
    labels: Vec<f64>,
    predictions: [Vec<f64>; 2],
}

impl EmpiricalDataset {
    /// Validates and sorts `units` by id.
    ///
    /// Range violations report the position of the offending unit in `units`
    /// and a column name following the CSV convention (`y_j`, `f1_j`, `f2_j`).
    pub fn new(dim: usize, units: Vec<Unit>) -> Result<Self> {
        Self::from_units(dim, units, false)
    }

    /// Like [`EmpiricalDataset::new`] but overwrites every weight with `1/n`.
    pub fn uniform(dim: usize, units: Vec<Unit>) -> Result<Self> {
        Self::from_units(dim, units, true)
    }

    fn from_units(dim: usize, units: Vec<Unit>, uniform: bool) -> Result<Self> {
        let n = units.len();
        let mut cols = Columns::with_capacity(dim, n);
        for u in units {
            for v in [&u.label, &u.predictions[0], &u.predictions[1]] {
                if v.len() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        found: v.len(),
                    });
                }
            }
            cols.ids.push(u.id);
            cols.weights.push(u.weight);
            cols.labels.extend_from_slice(&u.label);
            let [f1, f2] = u.predictions;
            cols.predictions[0].extend_from_slice(&f1);
            cols.predictions[1].extend_from_slice(&f2);
        }
        Self::from_columns(cols, uniform)
    }

    /// Validates flat row-major columns, sorts rows by id and, when
    /// `uniform` is set, replaces the weights by `1/n`.
    pub(crate) fn from_columns(cols: Columns, uniform: bool) -> Result<Self> {
        let Columns { dim, ids, mut weights, labels, predictions } = cols;
        if dim == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        let n = ids.len();
        if n == 0 {
            return Err(Error::input("dataset has no units"));
        }
        if uniform {
            weights = vec![1.0 / n as f64; n];
        }
        for row in 0..n {
            let w = weights[row];
            if !(w.is_finite() && w > 0.0 && w <= 1.0) {
                return Err(Error::RangeViolation {
                    row,
                    column: "weight".into(),
                    value: w.to_string(),
                });
            }
            let span = row * dim..(row + 1) * dim;
            check_vector(row, "y", &labels[span.clone()])?;
            check_vector(row, "f1", &predictions[0][span.clone()])?;
            check_vector(row, "f2", &predictions[1][span])?;
        }
        let sorted = ids.windows(2).all(|w| w[0] < w[1]);
        let data = if sorted {
            EmpiricalDataset { dim, ids, weights, labels, predictions }
        } else {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&r| ids[r]);
            if let Some(w) = order.windows(2).find(|w| ids[w[0]] == ids[w[1]]) {
                return Err(Error::input(format!("duplicate unit_id {}", ids[w[0]])));
            }
            let gather = |v: &[f64]| -> Vec<f64> {
                order.iter().flat_map(|&r| v[r * dim..(r + 1) * dim].iter().copied()).collect()
            };
            EmpiricalDataset {
                dim,
                ids: order.iter().map(|&r| ids[r]).collect(),
                weights: order.iter().map(|&r| weights[r]).collect(),
                labels: gather(&labels),
                predictions: [gather(&predictions[0]), gather(&predictions[1])],
            }
        };
        let sum: f64 = data.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::WeightSum { sum });
        }
        Ok(data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, row: usize) -> f64 {
        self.weights[row]
    }

    pub fn label(&self, row: usize) -> &[f64] {
        &self.labels[row * self.dim..(row + 1) * self.dim]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Flat base prediction table of `p`.
    pub fn predictions(&self, p: Predictor) -> &[f64] {
        &self.predictions[p.index()]
    }

    pub fn prediction(&self, p: Predictor, row: usize) -> &[f64] {
        &self.predictions[p.index()][row * self.dim..(row + 1) * self.dim]
    }

    /// Row position of a unit id.
    pub fn position(&self, id: u64) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    /// Copy of this dataset whose base predictions are replaced by `tables`.
    pub fn with_predictions(&self, tables: [&[f64]; 2]) -> Result<Self> {
        for t in tables {
            if t.len() != self.labels.len() {
                return Err(Error::Dimension {
                    expected: self.labels.len(),
                    found: t.len(),
                });
            }
        }
        let mut out = self.clone();
        out.predictions = [tables[0].to_vec(), tables[1].to_vec()];
        Ok(out)
    }

    pub fn to_units(&self) -> Vec<Unit> {
        (0..self.len())
            .map(|i| Unit {
                id: self.ids[i],
                weight: self.weights[i],
                label: self.label(i).to_vec(),
                predictions: [
                    self.prediction(Predictor::First, i).to_vec(),
                    self.prediction(Predictor::Second, i).to_vec(),
                ],
            })
            .collect()
    }

    /// Sub-distribution on `rows`, renormalized to total mass one.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let all = self.to_units();
        let mut units: Vec<Unit> = rows.iter().map(|&r| all[r].clone()).collect();
        let total: f64 = units.iter().map(|u| u.weight).sum();
        if total <= 0.0 {
            return Err(Error::input("subset has zero mass"));
        }
        for u in &mut units {
            u.weight /= total;
        }
        Self::new(self.dim, units)
    }
}

fn check_vector(row: usize, prefix: &str, v: &[f64]) -> Result<()> {
    for (j, &x) in v.iter().enumerate() {
        if !(x.is_finite() && (0.0..=1.0).contains(&x)) {
            return Err(Error::RangeViolation {
                row,
                column: format!("{prefix}_{j}"),
                value: x.to_string(),
            });
        }
    }
    Ok(())
}

/// Row-major columns of a dataset under construction.
pub(crate) struct Columns {
    pub dim: usize,
    pub ids: Vec<u64>,
    pub weights: Vec<f64>,
    pub labels: Vec<f64>,
    pub predictions: [Vec<f64>; 2],
}

impl Columns {
    pub fn with_capacity(dim: usize, rows: usize) -> Self {
        Columns {
            dim,
            ids: Vec::with_capacity(rows),
            weights: Vec::with_capacity(rows),
            labels: Vec::with_capacity(rows * dim),
            predictions: [Vec::with_capacity(rows * dim), Vec::with_capacity(rows * dim)],
        }
    }
}
