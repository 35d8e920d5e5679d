//! Patching algorithms: decision calibration, the two-predictor loop built on
//! it, and the prediction-disagreement baseline.
//!
//! All three share one step recorder. Each accepted patch is appended to the
//! transcript, reported to an optional observer and counted against the
//! configured step cap.

mod baseline;
mod decal;
pub mod grid;
mod redcal;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use baseline::{reconcile_baseline, reconcile_baseline_with};
pub use decal::{decision_calibrate, decision_calibrate_with};
pub use grid::{round_to_grid, Phi};
pub use redcal::{adaptive_beta_delta, redcal, redcal_with, RoundSummary};

use crate::config::ResolvedConfig;
use crate::dataset::{EmpiricalDataset, Predictor};
use crate::error::{Error, Result};
use crate::events::{event_mass, EventDescriptor};
use crate::loss::LossFamily;
use crate::metrics::{brier_score, decision_loss, loss_gap};
use crate::state::{Members, PredictorPair};
use crate::transcript::{PatchStep, Transcript};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Reconcile,
    DecisionCal,
    Baseline,
}

/// Metrics of one accepted patch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub t: u64,
    pub stage: Stage,
    pub target: Predictor,
    pub event: EventDescriptor,
    pub phi: Vec<f64>,
    pub mass: f64,
    pub members: usize,
    /// Tolerance in force for calibration steps.
    pub beta: Option<f64>,
    pub brier_before: [f64; 2],
    pub brier_after: [f64; 2],
    /// After the step, indexed `[predictor][loss]`.
    pub decision_loss: [Vec<f64>; 2],
    pub loss_gap: [Vec<f64>; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    /// The step cap was reached before the stopping rule held.
    Truncated,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub status: RunStatus,
    pub transcript: Transcript,
    pub reports: Vec<StepReport>,
    /// One entry per disagreement round; empty for the other algorithms.
    pub rounds: Vec<RoundSummary>,
}

impl RunOutput {
    pub fn steps(&self) -> u64 {
        self.transcript.steps.len() as u64
    }

    /// Turns a truncated run into [`Error::TruncatedRun`].
    pub fn ensure_converged(&self) -> Result<()> {
        match self.status {
            RunStatus::Converged => Ok(()),
            RunStatus::Truncated => Err(Error::TruncatedRun { steps: self.steps() }),
        }
    }
}

/// Per-predictor metrics snapshot used in reports and round summaries.
pub(crate) fn losses_of(
    data: &EmpiricalDataset,
    family: &LossFamily,
    state: &PredictorPair,
    p: Predictor,
) -> Vec<f64> {
    family
        .iter()
        .map(|l| decision_loss(data, l, state.table(p)))
        .collect()
}

pub(crate) struct Session<'a> {
    data: &'a EmpiricalDataset,
    family: &'a LossFamily,
    max_steps: u64,
    steps: Vec<PatchStep>,
    reports: Vec<StepReport>,
    frozen: BTreeMap<u64, Members>,
    observer: &'a mut dyn FnMut(&StepReport),
}

impl<'a> Session<'a> {
    pub(crate) fn new(
        data: &'a EmpiricalDataset,
        family: &'a LossFamily,
        config: &ResolvedConfig,
        observer: &'a mut dyn FnMut(&StepReport),
    ) -> Self {
        Session {
            data,
            family,
            max_steps: config.max_steps,
            steps: Vec::new(),
            reports: Vec::new(),
            frozen: BTreeMap::new(),
            observer,
        }
    }

    pub(crate) fn exhausted(&self) -> bool {
        self.steps.len() as u64 >= self.max_steps
    }

    pub(crate) fn next_seq(&self) -> u64 {
        self.steps.len() as u64
    }

    pub(crate) fn frozen(&self) -> &BTreeMap<u64, Members> {
        &self.frozen
    }

    /// Applies one patch, logs it and returns its sequence number. `freeze`
    /// stores `members` under that number for later intersect steps.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn apply(
        &mut self,
        state: &mut PredictorPair,
        stage: Stage,
        target: Predictor,
        event: EventDescriptor,
        members: &Members,
        phi: Phi,
        beta: Option<f64>,
        freeze: bool,
    ) -> u64 {
        let data = self.data;
        let brier_before = [
            brier_score(data, state.table(Predictor::First)),
            brier_score(data, state.table(Predictor::Second)),
        ];
        state.patch(target, members, phi.values());
        let counters = state.counters_mut();
        counters.total += 1;
        let slot = target.index();
        match stage {
            Stage::Reconcile => counters.reconcile[slot] += 1,
            Stage::DecisionCal => counters.calibration[slot] += 1,
            Stage::Baseline => counters.baseline[slot] += 1,
        }
        let seq = self.next_seq();
        let report = StepReport {
            t: seq,
            stage,
            target,
            event,
            phi: phi.values().to_vec(),
            mass: event_mass(members, data),
            members: members.len(),
            beta,
            brier_before,
            brier_after: [
                brier_score(data, state.table(Predictor::First)),
                brier_score(data, state.table(Predictor::Second)),
            ],
            decision_loss: [
                losses_of(data, self.family, state, Predictor::First),
                losses_of(data, self.family, state, Predictor::Second),
            ],
            loss_gap: [Predictor::First, Predictor::Second].map(|p| {
                self.family
                    .iter()
                    .map(|l| loss_gap(data, l, state.table(p)))
                    .collect()
            }),
        };
        (self.observer)(&report);
        self.reports.push(report);
        self.steps.push(PatchStep {
            seq,
            stage,
            target,
            event,
            phi,
        });
        if freeze {
            self.frozen.insert(seq, members.clone());
        }
        seq
    }

    pub(crate) fn finish(
        self,
        algorithm: &str,
        config: &ResolvedConfig,
        status: RunStatus,
        rounds: Vec<RoundSummary>,
    ) -> RunOutput {
        let transcript = Transcript::new(algorithm, self.data.dim(), self.family, config.clone(), self.steps);
        RunOutput {
            status,
            transcript,
            reports: self.reports,
            rounds,
        }
    }
}

pub(crate) fn check_state(data: &EmpiricalDataset, state: &PredictorPair) -> Result<()> {
    if state.dim() != data.dim() {
        return Err(Error::Dimension {
            expected: data.dim(),
            found: state.dim(),
        });
    }
    if state.len() != data.len() {
        return Err(Error::input(format!(
            "state has {} units, dataset has {}",
            state.len(),
            data.len()
        )));
    }
    Ok(())
}
