use serde::{Deserialize, Serialize};

use crate::dataset::{EmpiricalDataset, Predictor};

/// Sorted row positions of the units belonging to an event.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Members(Vec<usize>);

impl Members {
    /// `rows` must be strictly increasing.
    pub fn from_sorted(rows: Vec<usize>) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        Members(rows)
    }

    pub fn all(n: usize) -> Self {
        Members((0..n).collect())
    }

    pub fn rows(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, row: usize) -> bool {
        self.0.binary_search(&row).is_ok()
    }

    /// Unit ids of the members.
    pub fn ids(&self, data: &EmpiricalDataset) -> Vec<u64> {
        self.0.iter().map(|&r| data.ids()[r]).collect()
    }
}

impl<'a> IntoIterator for &'a Members {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Step counters of a run, split by stage and by patched predictor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCounters {
    pub total: u64,
    /// Disagreement-event patches per predictor (`T_1`, `T_2`).
    pub reconcile: [u64; 2],
    /// Decision-calibration patches per predictor.
    pub calibration: [u64; 2],
    /// Baseline region patches per predictor.
    pub baseline: [u64; 2],
}

/// The evolving pair of prediction tables.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictorPair {
    dim: usize,
    tables: [Vec<f64>; 2],
    counters: StepCounters,
}

impl PredictorPair {
    pub fn from_dataset(data: &EmpiricalDataset) -> Self {
        PredictorPair {
            dim: data.dim(),
            tables: [
                data.predictions(Predictor::First).to_vec(),
                data.predictions(Predictor::Second).to_vec(),
            ],
            counters: StepCounters::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tables[0].len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.tables[0].is_empty()
    }

    pub fn table(&self, p: Predictor) -> &[f64] {
        &self.tables[p.index()]
    }

    pub fn tables(&self) -> [&[f64]; 2] {
        [&self.tables[0], &self.tables[1]]
    }

    pub fn prediction(&self, p: Predictor, row: usize) -> &[f64] {
        &self.tables[p.index()][row * self.dim..(row + 1) * self.dim]
    }

    pub fn counters(&self) -> &StepCounters {
        &self.counters
    }

    pub(crate) fn counters_mut(&mut self) -> &mut StepCounters {
        &mut self.counters
    }

    /// Adds `phi` to `p` on every member and clips each coordinate to `[0,1]`.
    pub fn patch(&mut self, p: Predictor, members: &Members, phi: &[f64]) {
        debug_assert_eq!(phi.len(), self.dim);
        let d = self.dim;
        let table = &mut self.tables[p.index()];
        for &row in members {
            for (x, delta) in table[row * d..(row + 1) * d].iter_mut().zip(phi) {
                *x = (*x + delta).clamp(0.0, 1.0);
            }
        }
    }
}
