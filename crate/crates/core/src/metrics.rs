//! Scalar metrics of a prediction table against an empirical distribution.
//!
//! Every function takes a flat row-major table aligned with the dataset rows
//! and sums in row order.

use crate::dataset::EmpiricalDataset;
use crate::loss::LossFunction;

/// `Σ_i w_i ‖f(x_i) − y_i‖²`.
pub fn brier_score(data: &EmpiricalDataset, table: &[f64]) -> f64 {
    let d = data.dim();
    let mut total = 0.0;
    for i in 0..data.len() {
        let f = &table[i * d..(i + 1) * d];
        let sq: f64 = f
            .iter()
            .zip(data.label(i))
            .map(|(p, y)| (p - y) * (p - y))
            .sum();
        total += data.weight(i) * sq;
    }
    total
}

/// Expected loss of acting on the best response to each prediction.
pub fn decision_loss(data: &EmpiricalDataset, loss: &LossFunction, table: &[f64]) -> f64 {
    let d = data.dim();
    let mut total = 0.0;
    for i in 0..data.len() {
        let a = loss.best_response(&table[i * d..(i + 1) * d]);
        total += data.weight(i) * loss.value(a, data.label(i));
    }
    total
}

/// Expected loss of the per-unit best action chosen with the label in hand.
pub fn oracle_loss(data: &EmpiricalDataset, loss: &LossFunction) -> f64 {
    (0..data.len())
        .map(|i| data.weight(i) * loss.oracle_value(data.label(i)))
        .sum()
}

/// Decision loss minus the label-oracle loss. Non-negative for one-hot labels.
pub fn loss_gap(data: &EmpiricalDataset, loss: &LossFunction, table: &[f64]) -> f64 {
    decision_loss(data, loss, table) - oracle_loss(data, loss)
}
