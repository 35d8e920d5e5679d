//! Reconciling two equally accurate predictors for downstream decisions.
//!
//! Two predictors with similar Brier scores can still recommend different
//! actions to a decision-maker on a sizeable share of the population. This
//! crate patches such a pair until, for every loss in a given family, the
//! units where their best responses disagree by more than a margin `α`
//! carry mass below `η`, while keeping each predictor decision-calibrated on
//! the events it was patched on.
//!
//! Predictors are stored as prediction tables over a weighted empirical
//! distribution ([`EmpiricalDataset`]). Every run yields a [`Transcript`]
//! that re-applies the same patches to fresh data.
//!
//! ```
//! use redcal::{gen_reconcile_counterexample, redcal, PredictorPair, RunConfig};
//!
//! let (data, family) = gen_reconcile_counterexample(0.2).unwrap();
//! let config = RunConfig::new(0.05, 0.25).with_beta(1e-4).resolve(&data, &family).unwrap();
//! let mut state = PredictorPair::from_dataset(&data);
//! let out = redcal(&data, &family, &config, &mut state).unwrap();
//! assert!(out.ensure_converged().is_ok());
//! ```

pub mod audit;
pub mod bounds;
pub mod calibration;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod events;
pub mod instances;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod state;
pub mod transcript;

pub use audit::{audit, AuditReport};
pub use bounds::{
    deviation_bounds, exact_iteration_bound, grid_iteration_bound, transcript_space_log, BoundInputs,
    DeviationBounds, GridBound,
};
pub use calibration::{
    adaptive_beta_delta, decision_calibrate, decision_calibrate_with, reconcile_baseline, reconcile_baseline_with,
    redcal, redcal_with, round_to_grid, Phi, RoundSummary, RunOutput, RunStatus, Stage, StepReport,
};
pub use config::{GridResolution, ResolvedConfig, RunConfig};
pub use dataset::{EmpiricalDataset, Predictor, Unit};
pub use error::{Error, Result};
pub use events::{
    best_responses, br_event_members, calibration_residual_norm, conditional_mean_residual, disagreement_events,
    disagreement_members, event_mass, BestResponseEvent, DisagreementEvent, EventDescriptor, RegionSide,
};
pub use instances::{
    gen_decal_counterexample, gen_random_instance, gen_reconcile_counterexample, split_dataset, LabelRealization,
    RandomInstanceSpec,
};
pub use loss::{rescale_loss, LossFamily, LossFunction};
pub use metrics::{brier_score, decision_loss, loss_gap, oracle_loss};
pub use state::{Members, PredictorPair, StepCounters};
pub use transcript::{replay, transcript_digest, PatchStep, Transcript};
