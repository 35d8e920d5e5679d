use super::{check_state, Phi, RunOutput, RunStatus, Session, Stage, StepReport};
use crate::config::ResolvedConfig;
use crate::dataset::{EmpiricalDataset, Predictor};
use crate::error::{Error, Result};
use crate::events::{conditional_mean_residual, event_mass, region_members, EventDescriptor, RegionSide};
use crate::loss::LossFamily;
use crate::state::PredictorPair;

/// Prediction-disagreement baseline for scalar outcomes.
///
/// While the units where `|f₁ − f₂| > ε` (`ε = config.alpha`) carry mass at
/// least `η`, pick the side and predictor with the largest
/// `μ(U)·(𝔼[y|U] − 𝔼[f_i|U])²` and shift that predictor by the rounded mean
/// residual on that side. `family` is only used for reporting decision losses.
pub fn reconcile_baseline(
    data: &EmpiricalDataset,
    family: &LossFamily,
    config: &ResolvedConfig,
    state: &mut PredictorPair,
) -> Result<RunOutput> {
    reconcile_baseline_with(data, family, config, state, &mut |_| {})
}

pub fn reconcile_baseline_with(
    data: &EmpiricalDataset,
    family: &LossFamily,
    config: &ResolvedConfig,
    state: &mut PredictorPair,
    observer: &mut dyn FnMut(&StepReport),
) -> Result<RunOutput> {
    if data.dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            found: data.dim(),
        });
    }
    check_state(data, state)?;
    family.check_dim(1)?;
    let eps = config.alpha;
    let mut session = Session::new(data, family, config, observer);
    let status = loop {
        let regions = RegionSide::BOTH.map(|side| region_members(state, eps, side));
        let masses = regions.clone().map(|m| event_mass(&m, data));
        if masses[0] + masses[1] < config.eta {
            break RunStatus::Converged;
        }
        if session.exhausted() {
            break RunStatus::Truncated;
        }
        let mut best: Option<(f64, Predictor, usize, f64)> = None;
        for p in Predictor::BOTH {
            for (s, members) in regions.iter().enumerate() {
                if members.is_empty() {
                    continue;
                }
                let gap = conditional_mean_residual(members, data, state.table(p))?[0];
                let score = masses[s] * gap * gap;
                if best.map_or(true, |b| score > b.0) {
                    best = Some((score, p, s, gap));
                }
            }
        }
        let (_, target, s, gap) = best.expect("a region with positive mass exists");
        let phi = Phi::rounded(&[gap], config.grid_m);
        let side = RegionSide::BOTH[s];
        session.apply(
            state,
            Stage::Baseline,
            target,
            EventDescriptor::Region { eps, side },
            &regions[s],
            phi,
            None,
            false,
        );
    };
    Ok(session.finish("reconcile", config, status, Vec::new()))
}
