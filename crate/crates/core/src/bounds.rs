//! Closed-form iteration and sample-size bounds.
//!
//! Everything that could overflow a double (the transcript count grows like
//! `(m+1)^{dT}`) is carried as a natural logarithm.

use serde::Serialize;

/// Inputs shared by the bound calculators. Fields a calculator does not use
/// are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundInputs {
    pub d: usize,
    pub k: usize,
    pub loss_count: usize,
    pub alpha: f64,
    pub eta: f64,
    pub beta: f64,
    pub m: u64,
    pub n: usize,
    pub delta: f64,
    pub brier_1: f64,
    pub brier_2: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        BoundInputs {
            d: 1,
            k: 2,
            loss_count: 1,
            alpha: 0.1,
            eta: 0.1,
            beta: 0.1,
            m: 10,
            n: 1000,
            delta: 0.05,
            brier_1: 1.0,
            brier_2: 1.0,
        }
    }
}

/// Relative slack under which a real is treated as already integral before
/// taking the ceiling, so `1216.0000000000002` counts as 1216.
const CEIL_SNAP: f64 = 1e-9;

/// Ceiling that forgives floating-point noise just above an integer.
/// Saturates at `u64::MAX`; negative and NaN inputs give 0.
pub fn tolerant_ceil(x: f64) -> u64 {
    if x.is_nan() || x <= 0.0 {
        return 0;
    }
    let r = x.round();
    let snapped = if (x - r).abs() <= CEIL_SNAP * r.max(1.0) { r } else { x.ceil() };
    // `as` saturates for values beyond the range
    snapped as u64
}

/// Step bound with exact (unrounded) patches: `⌈4d(B₁+B₂)/(α²η)⌉`.
pub fn exact_iteration_bound(input: &BoundInputs) -> u64 {
    let d = input.d as f64;
    tolerant_ceil(4.0 * d * (input.brier_1 + input.brier_2) / (input.alpha * input.alpha * input.eta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridBound {
    /// Bound on all patch steps, inner calibration included.
    pub max_steps: u64,
    /// Smallest grid resolution for which the bound holds.
    pub min_resolution: u64,
}

/// `min{β², ηα²/(4d)}`: the per-step progress scale in grid mode.
pub fn grid_progress(d: usize, alpha: f64, eta: f64, beta: f64) -> f64 {
    (beta * beta).min(eta * alpha * alpha / (4.0 * d as f64))
}

/// `⌈2d / min{β², ηα²/4d}⌉` steps, valid for `m ≥ ⌈√(d / (2·min{…}))⌉`.
pub fn grid_iteration_bound(input: &BoundInputs) -> GridBound {
    let d = input.d as f64;
    let progress = grid_progress(input.d, input.alpha, input.eta, input.beta);
    GridBound {
        max_steps: tolerant_ceil(2.0 * d / progress),
        min_resolution: tolerant_ceil((d / (2.0 * progress)).sqrt()).max(1),
    }
}

/// `ln |S|` with `|S| ≤ (4|ℒ|²K³(m+1)^d)^{T+1}`, for `T = t_max`.
pub fn transcript_space_log(input: &BoundInputs, t_max: u64) -> f64 {
    let per_step = 4f64.ln()
        + 2.0 * (input.loss_count as f64).ln()
        + 3.0 * (input.k as f64).ln()
        + input.d as f64 * ((input.m + 1) as f64).ln();
    (t_max as f64 + 1.0) * per_step
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeviationBounds {
    /// Uniform deviation of the empirical Brier score.
    pub brier_dev: f64,
    /// Uniform deviation of every event's calibration residual.
    pub calib_dev: f64,
    /// Uniform deviation of every disagreement event's mass.
    pub mass_dev: f64,
}

/// High-probability deviations between empirical and population quantities,
/// uniformly over every predictor reachable by a transcript.
pub fn deviation_bounds(input: &BoundInputs, ln_s: f64) -> DeviationBounds {
    let d = input.d as f64;
    let k = input.k as f64;
    let ln_l = (input.loss_count as f64).ln();
    let ln_delta = input.delta.ln();
    let two_n = 2.0 * input.n as f64;
    let brier_log = (6.0 * d).ln() + ln_s - ln_delta;
    let calib_log = (6.0 * d * k).ln() + ln_s + ln_l - ln_delta;
    let mass_log = (6.0 * k).ln() + ln_s + ln_l - ln_delta;
    DeviationBounds {
        brier_dev: (d * brier_log / two_n).sqrt(),
        calib_dev: (3.0 * d * calib_log / two_n).sqrt(),
        mass_dev: (2.0 * mass_log / two_n).sqrt(),
    }
}

/// Round bound of the prediction-disagreement baseline: `(B₁+B₂)·16/(ηε²)`.
pub fn baseline_iteration_bound(input: &BoundInputs) -> u64 {
    tolerant_ceil((input.brier_1 + input.brier_2) * 16.0 / (input.eta * input.alpha * input.alpha))
}

/// Smallest resolution at which a rounded baseline patch still makes the
/// progress the round bound assumes: `⌈2/(ε√η)⌉`.
pub fn baseline_min_resolution(eps: f64, eta: f64) -> u64 {
    tolerant_ceil(2.0 / (eps * eta.sqrt())).max(1)
}
