use serde::Serialize;

use super::decal::{calibrate_loop, LoopEnd};
use super::{check_state, losses_of, Phi, RunOutput, RunStatus, Session, Stage, StepReport};
use crate::config::ResolvedConfig;
use crate::dataset::{EmpiricalDataset, Predictor};
use crate::error::Result;
use crate::events::{conditional_mean_residual, disagreement_events, event_mass, DisagreementEvent, EventDescriptor};
use crate::loss::{LossFamily, LossFunction};
use crate::metrics::brier_score;
use crate::state::{Members, PredictorPair};

/// What happened in one disagreement round: the reconcile patch plus the
/// calibration steps that followed it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundSummary {
    pub round: u64,
    /// Sequence number of the reconcile patch; intersect steps refer to it.
    pub seq: u64,
    pub target: Predictor,
    pub event: DisagreementEvent,
    pub mass: f64,
    /// Average-suboptimality of the target's action on the event.
    pub delta: f64,
    /// Tolerance used by the inner calibration.
    pub beta: f64,
    pub adapted: bool,
    pub grid_m: u64,
    pub inner_steps: u64,
    /// Target's decision loss per family member, before the round.
    pub loss_before: Vec<f64>,
    pub loss_after: Vec<f64>,
    pub brier_before: f64,
    pub brier_after: f64,
}

/// `max_a 𝔼[(ℓ(y, action) − ℓ(y, a))·1_E]`: how much better than `action`
/// the best fixed action does on `members`. Zero when `action` is already
/// average-optimal.
pub fn adaptive_beta_delta(members: &Members, action: usize, loss: &LossFunction, data: &EmpiricalDataset) -> f64 {
    let mut totals = vec![0.0; loss.actions()];
    for &r in members {
        let w = data.weight(r);
        for (a, t) in totals.iter_mut().enumerate() {
            *t += w * loss.value(a, data.label(r));
        }
    }
    let own = totals[action];
    totals.iter().map(|t| own - t).fold(0.0, f64::max)
}

/// `|𝔼[ℓ(y,a₁) − ℓ(y,a₂) | E] − 𝔼[ℓ(f,a₁) − ℓ(f,a₂) | E]|`.
fn loss_difference_error(
    members: &Members,
    data: &EmpiricalDataset,
    state: &PredictorPair,
    p: Predictor,
    loss: &LossFunction,
    a1: usize,
    a2: usize,
) -> f64 {
    let mut acc = 0.0;
    let mut mass = 0.0;
    for &r in members {
        let w = data.weight(r);
        let y = data.label(r);
        let f = state.prediction(p, r);
        acc += w * ((loss.value(a1, y) - loss.value(a2, y)) - (loss.value(a1, f) - loss.value(a2, f)));
        mass += w;
    }
    (acc / mass).abs()
}

/// Runs the disagreement-reduction loop until every disagreement event of
/// every loss has mass below `η`.
pub fn redcal(
    data: &EmpiricalDataset,
    family: &LossFamily,
    config: &ResolvedConfig,
    state: &mut PredictorPair,
) -> Result<RunOutput> {
    redcal_with(data, family, config, state, &mut |_| {})
}

pub fn redcal_with(
    data: &EmpiricalDataset,
    family: &LossFamily,
    config: &ResolvedConfig,
    state: &mut PredictorPair,
    observer: &mut dyn FnMut(&StepReport),
) -> Result<RunOutput> {
    check_state(data, state)?;
    family.check_dim(data.dim())?;
    let d = data.dim();
    let mut session = Session::new(data, family, config, observer);
    let mut rounds = Vec::new();
    let status = loop {
        let events = disagreement_events(family, config.alpha, state);
        let mut chosen: Option<((usize, usize, usize), Members, f64)> = None;
        for (key, members) in events {
            let mass = event_mass(&members, data);
            if chosen.as_ref().map_or(true, |c| mass > c.2) {
                chosen = Some((key, members, mass));
            }
        }
        let Some(((li, a1, a2), members, mass)) = chosen else {
            break RunStatus::Converged;
        };
        if mass < config.eta {
            break RunStatus::Converged;
        }
        if session.exhausted() {
            break RunStatus::Truncated;
        }
        let loss = family.get(li)?;
        let scores = Predictor::BOTH.map(|p| loss_difference_error(&members, data, state, p, loss, a1, a2));
        let target = if scores[1] > scores[0] { Predictor::Second } else { Predictor::First };
        let own_action = if target == Predictor::First { a1 } else { a2 };

        let loss_before = losses_of(data, family, state, target);
        let brier_before = brier_score(data, state.table(target));
        let raw = conditional_mean_residual(&members, data, state.table(target))?;
        let phi = Phi::rounded(&raw, config.grid_m);
        let event = DisagreementEvent {
            loss: li,
            action_1: a1,
            action_2: a2,
            alpha: config.alpha,
        };
        let seq = session.apply(
            state,
            Stage::Reconcile,
            target,
            EventDescriptor::Disagree(event),
            &members,
            phi,
            None,
            true,
        );

        let delta = adaptive_beta_delta(&members, own_action, loss, data);
        let adapted = config.adaptive_beta && delta > 0.0;
        let beta = if adapted { delta / (d as f64).sqrt() } else { config.beta };
        let grid_m = config.grid_for_beta(d, beta);
        let inner = calibrate_loop(&mut session, state, target, beta, grid_m, Some(seq))?;

        rounds.push(RoundSummary {
            round: rounds.len() as u64,
            seq,
            target,
            event,
            mass,
            delta,
            beta,
            adapted,
            grid_m,
            inner_steps: session.next_seq() - seq - 1,
            loss_before,
            loss_after: losses_of(data, family, state, target),
            brier_before,
            brier_after: brier_score(data, state.table(target)),
        });
        if let LoopEnd::Truncated = inner {
            break RunStatus::Truncated;
        }
    };
    Ok(session.finish("redcal", config, status, rounds))
}
