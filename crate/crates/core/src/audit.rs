//! Brute-force recomputation of every quantity the algorithms promise.
//!
//! Deliberately written without the fast paths in `events` and `metrics`:
//! each quantity is a fresh loop over units, losses and actions.

use serde::Serialize;

use crate::config::ResolvedConfig;
use crate::dataset::{EmpiricalDataset, Predictor};
use crate::loss::LossFamily;
use crate::state::PredictorPair;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisagreementMass {
    pub loss: usize,
    pub a1: usize,
    pub a2: usize,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualNorm {
    pub predictor: Predictor,
    pub loss: usize,
    pub action: usize,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub brier: [f64; 2],
    /// `[predictor][loss]`.
    pub decision_loss: [Vec<f64>; 2],
    pub disagreement: Vec<DisagreementMass>,
    pub max_disagreement_mass: f64,
    pub residual_norms: Vec<ResidualNorm>,
    pub max_residual_norm: f64,
    /// Largest `|𝔼[ℓ(y,a')·1_E] − 𝔼[ℓ(f,a')·1_E]|` over predictors, losses,
    /// best-response events `E` and actions `a'`.
    pub max_loss_estimation_error: f64,
    pub eta: f64,
    pub beta: f64,
    pub d: usize,
    /// Every disagreement mass is below `η`.
    pub disagreement_ok: bool,
    /// Every residual norm is at most `β`.
    pub calibration_ok: bool,
    /// Every loss-estimation error is at most `β√d`.
    pub loss_estimation_ok: bool,
}

fn naive_loss(row: &[f64], v: &[f64]) -> f64 {
    if row.len() == v.len() {
        let mut s = 0.0;
        for j in 0..v.len() {
            s += row[j] * v[j];
        }
        s
    } else {
        row[0] * (1.0 - v[0]) + row[1] * v[0]
    }
}

fn naive_best(rows: &[Vec<f64>], p: &[f64]) -> usize {
    let mut best = 0;
    for a in 1..rows.len() {
        if naive_loss(&rows[a], p) < naive_loss(&rows[best], p) {
            best = a;
        }
    }
    best
}

pub fn audit(state: &PredictorPair, data: &EmpiricalDataset, family: &LossFamily, config: &ResolvedConfig) -> AuditReport {
    let n = data.len();
    let d = data.dim();
    let k = family.actions();
    let matrices: Vec<Vec<Vec<f64>>> = family.iter().map(|l| l.rows()).collect();

    let mut brier = [0.0; 2];
    let mut decision_loss = [vec![0.0; family.len()], vec![0.0; family.len()]];
    for p in Predictor::BOTH {
        for i in 0..n {
            let f = state.prediction(p, i);
            let y = data.label(i);
            let mut sq = 0.0;
            for j in 0..d {
                sq += (f[j] - y[j]) * (f[j] - y[j]);
            }
            brier[p.index()] += data.weight(i) * sq;
            for (li, rows) in matrices.iter().enumerate() {
                decision_loss[p.index()][li] += data.weight(i) * naive_loss(&rows[naive_best(rows, f)], y);
            }
        }
    }

    let mut disagreement = Vec::new();
    for (li, rows) in matrices.iter().enumerate() {
        for a1 in 0..k {
            for a2 in 0..k {
                if a1 == a2 {
                    continue;
                }
                let mut mass = 0.0;
                for i in 0..n {
                    let f1 = state.prediction(Predictor::First, i);
                    let f2 = state.prediction(Predictor::Second, i);
                    if naive_best(rows, f1) != a1 || naive_best(rows, f2) != a2 {
                        continue;
                    }
                    let g1 = naive_loss(&rows[a2], f1) - naive_loss(&rows[a1], f1);
                    let g2 = naive_loss(&rows[a1], f2) - naive_loss(&rows[a2], f2);
                    if g1 > config.alpha || g2 > config.alpha {
                        mass += data.weight(i);
                    }
                }
                disagreement.push(DisagreementMass { loss: li, a1, a2, mass });
            }
        }
    }

    let mut residual_norms = Vec::new();
    let mut max_est: f64 = 0.0;
    for p in Predictor::BOTH {
        for (li, rows) in matrices.iter().enumerate() {
            for a in 0..k {
                let mut r = vec![0.0; d];
                let mut est = vec![0.0; k];
                for i in 0..n {
                    let f = state.prediction(p, i);
                    if naive_best(rows, f) != a {
                        continue;
                    }
                    let y = data.label(i);
                    let w = data.weight(i);
                    for j in 0..d {
                        r[j] += w * (y[j] - f[j]);
                    }
                    for (b, e) in est.iter_mut().enumerate() {
                        *e += w * (naive_loss(&rows[b], y) - naive_loss(&rows[b], f));
                    }
                }
                let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                residual_norms.push(ResidualNorm { predictor: p, loss: li, action: a, norm });
                for e in est {
                    max_est = max_est.max(e.abs());
                }
            }
        }
    }

    let max_disagreement_mass = disagreement.iter().map(|x| x.mass).fold(0.0, f64::max);
    let max_residual_norm = residual_norms.iter().map(|x| x.norm).fold(0.0, f64::max);
    AuditReport {
        brier,
        decision_loss,
        disagreement,
        max_disagreement_mass,
        residual_norms,
        max_residual_norm,
        max_loss_estimation_error: max_est,
        eta: config.eta,
        beta: config.beta,
        d,
        disagreement_ok: max_disagreement_mass < config.eta,
        calibration_ok: max_residual_norm <= config.beta,
        loss_estimation_ok: max_est <= config.beta * (d as f64).sqrt(),
    }
}
