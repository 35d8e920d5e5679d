//! Run hyperparameters and how unset ones are filled in.

use serde::{Deserialize, Serialize};

use crate::bounds::{
    baseline_iteration_bound, baseline_min_resolution, exact_iteration_bound, grid_iteration_bound, BoundInputs,
};
use crate::dataset::{EmpiricalDataset, Predictor};
use crate::error::{Error, Result};
use crate::loss::LossFamily;
use crate::metrics::brier_score;

/// Multiplier applied to the theoretical step bound to get the default cap.
pub const STEP_CAP_FACTOR: u64 = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GridResolution {
    /// Smallest resolution the step bound allows.
    #[default]
    Auto,
    /// No rounding.
    Exact,
    /// A requested resolution; raised to the minimum if it is below it.
    Fixed(u64),
}

impl GridResolution {
    /// Command-line convention: `0` means exact.
    pub fn from_flag(m: Option<u64>) -> Self {
        match m {
            None => GridResolution::Auto,
            Some(0) => GridResolution::Exact,
            Some(m) => GridResolution::Fixed(m),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Loss margin of disagreement events; the prediction gap `ε` for the baseline.
    pub alpha: f64,
    /// Mass threshold below which disagreement is tolerated.
    pub eta: f64,
    /// Calibration tolerance. `None` picks the loss-preserving default.
    pub beta: Option<f64>,
    pub grid: GridResolution,
    pub max_steps: Option<u64>,
    pub seed: u64,
    pub adaptive_beta: bool,
}

impl RunConfig {
    pub fn new(alpha: f64, eta: f64) -> Self {
        RunConfig {
            alpha,
            eta,
            beta: None,
            grid: GridResolution::Auto,
            max_steps: None,
            seed: 0,
            adaptive_beta: false,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_grid(mut self, grid: GridResolution) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = Some(max_steps);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_adaptive_beta(mut self, on: bool) -> Self {
        self.adaptive_beta = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::config(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if let Some(beta) = self.beta {
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::config(format!("beta must be positive, got {beta}")));
            }
        }
        if self.max_steps == Some(0) {
            return Err(Error::config("max_steps must be at least 1"));
        }
        Ok(())
    }

    fn bound_inputs(&self, data: &EmpiricalDataset, family: &LossFamily) -> BoundInputs {
        BoundInputs {
            d: data.dim(),
            k: family.actions(),
            loss_count: family.len(),
            alpha: self.alpha,
            eta: self.eta,
            beta: self.beta.unwrap_or(f64::NAN),
            m: 0,
            n: data.len(),
            delta: 0.05,
            brier_1: brier_score(data, data.predictions(Predictor::First)),
            brier_2: brier_score(data, data.predictions(Predictor::Second)),
        }
    }

    /// Fills in defaults for the decision-calibration algorithms.
    ///
    /// The default `β` is `α / (T·√d·K)` with `T` the exact-mode step bound,
    /// which keeps the total loss drift of every predictor below `α`.
    pub fn resolve(&self, data: &EmpiricalDataset, family: &LossFamily) -> Result<ResolvedConfig> {
        self.validate()?;
        family.check_dim(data.dim())?;
        let mut inputs = self.bound_inputs(data, family);
        let beta = match self.beta {
            Some(b) => b,
            None => {
                let t = exact_iteration_bound(&inputs).max(1) as f64;
                self.alpha / (t * (data.dim() as f64).sqrt() * family.actions() as f64)
            }
        };
        inputs.beta = beta;
        let bound = grid_iteration_bound(&inputs);
        let (grid_m, requested) = match self.grid {
            GridResolution::Auto => (bound.min_resolution, None),
            GridResolution::Exact => (0, Some(0)),
            GridResolution::Fixed(m) => (m.max(bound.min_resolution), Some(m)),
        };
        Ok(ResolvedConfig {
            alpha: self.alpha,
            eta: self.eta,
            beta,
            grid_m,
            requested_grid_m: requested,
            max_steps: self
                .max_steps
                .unwrap_or_else(|| bound.max_steps.saturating_mul(STEP_CAP_FACTOR).max(1)),
            seed: self.seed,
            adaptive_beta: self.adaptive_beta,
        })
    }

    /// Fills in defaults for the prediction-disagreement baseline, where
    /// `alpha` plays the role of the prediction gap `ε`.
    pub fn resolve_baseline(&self, data: &EmpiricalDataset) -> Result<ResolvedConfig> {
        self.validate()?;
        if data.dim() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                found: data.dim(),
            });
        }
        let inputs = BoundInputs {
            d: 1,
            alpha: self.alpha,
            eta: self.eta,
            brier_1: brier_score(data, data.predictions(Predictor::First)),
            brier_2: brier_score(data, data.predictions(Predictor::Second)),
            ..BoundInputs::default()
        };
        let floor = baseline_min_resolution(self.alpha, self.eta);
        let (grid_m, requested) = match self.grid {
            GridResolution::Auto => (floor, None),
            GridResolution::Exact => (0, Some(0)),
            GridResolution::Fixed(m) => (m.max(floor), Some(m)),
        };
        Ok(ResolvedConfig {
            alpha: self.alpha,
            eta: self.eta,
            beta: self.beta.unwrap_or(0.0),
            grid_m,
            requested_grid_m: requested,
            max_steps: self.max_steps.unwrap_or_else(|| {
                baseline_iteration_bound(&inputs)
                    .saturating_mul(STEP_CAP_FACTOR)
                    .max(1)
            }),
            seed: self.seed,
            adaptive_beta: false,
        })
    }
}

/// A configuration with every default decided; echoed into transcripts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub alpha: f64,
    pub eta: f64,
    pub beta: f64,
    /// Effective grid resolution; 0 means exact patches.
    pub grid_m: u64,
    /// What was asked for, when it differs from automatic selection.
    pub requested_grid_m: Option<u64>,
    pub max_steps: u64,
    pub seed: u64,
    pub adaptive_beta: bool,
}

impl ResolvedConfig {
    /// Grid resolution to use with tolerance `beta`: never below the
    /// configured one, raised if a smaller tolerance needs a finer grid.
    pub fn grid_for_beta(&self, d: usize, beta: f64) -> u64 {
        if self.grid_m == 0 {
            return 0;
        }
        let need = grid_iteration_bound(&BoundInputs {
            d,
            alpha: self.alpha,
            eta: self.eta,
            beta,
            ..BoundInputs::default()
        })
        .min_resolution;
        self.grid_m.max(need)
    }
}
