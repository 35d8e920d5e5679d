use super::{check_state, Phi, RunOutput, RunStatus, Session, Stage, StepReport};
use crate::config::ResolvedConfig;
use crate::dataset::{EmpiricalDataset, Predictor};
use crate::error::Result;
use crate::events::{conditional_mean_residual, l2_norm, BestResponseEvent, EventDescriptor};
use crate::loss::LossFamily;
use crate::state::{Members, PredictorPair};

pub(crate) enum LoopEnd {
    Converged,
    Truncated,
}

/// The best-response event of `target` with the largest unconditional
/// residual norm, optionally restricted to a frozen set.
pub(crate) fn worst_event(
    data: &EmpiricalDataset,
    family: &LossFamily,
    state: &PredictorPair,
    target: Predictor,
    restrict: Option<&Members>,
) -> Option<(f64, BestResponseEvent, Members)> {
    let d = data.dim();
    let k = family.actions();
    let all;
    let rows: &[usize] = match restrict {
        Some(m) => m.rows(),
        None => {
            all = Members::all(data.len());
            all.rows()
        }
    };
    let table = state.table(target);
    let mut best: Option<(f64, BestResponseEvent, Vec<usize>)> = None;
    for (li, loss) in family.iter().enumerate() {
        let actions: Vec<usize> = rows
            .iter()
            .map(|&r| loss.best_response(&table[r * d..(r + 1) * d]))
            .collect();
        let mut sums = vec![0.0; k * d];
        for (&r, &a) in rows.iter().zip(&actions) {
            let w = data.weight(r);
            let f = &table[r * d..(r + 1) * d];
            for ((s, y), p) in sums[a * d..(a + 1) * d].iter_mut().zip(data.label(r)).zip(f) {
                *s += w * (y - p);
            }
        }
        for a in 0..k {
            let norm = l2_norm(&sums[a * d..(a + 1) * d]);
            if best.as_ref().map_or(true, |b| norm > b.0) {
                let members = rows
                    .iter()
                    .zip(&actions)
                    .filter(|(_, &b)| b == a)
                    .map(|(&r, _)| r)
                    .collect();
                best = Some((norm, BestResponseEvent { loss: li, action: a }, members));
            }
        }
    }
    best.map(|(n, e, m)| (n, e, Members::from_sorted(m)))
}

/// Patches `target` until every (restricted) best-response event has
/// residual norm at most `beta`.
pub(crate) fn calibrate_loop(
    session: &mut Session<'_>,
    state: &mut PredictorPair,
    target: Predictor,
    beta: f64,
    grid_m: u64,
    restrict: Option<u64>,
) -> Result<LoopEnd> {
    let data = session.data;
    let family = session.family;
    loop {
        let frozen = restrict.map(|seq| session.frozen()[&seq].clone());
        let Some((norm, event, members)) = worst_event(data, family, state, target, frozen.as_ref()) else {
            return Ok(LoopEnd::Converged);
        };
        if norm <= beta || members.is_empty() {
            return Ok(LoopEnd::Converged);
        }
        if session.exhausted() {
            return Ok(LoopEnd::Truncated);
        }
        let raw = conditional_mean_residual(&members, data, state.table(target))?;
        let phi = Phi::rounded(&raw, grid_m);
        let desc = match restrict {
            None => EventDescriptor::BestResponse(event),
            Some(frozen_seq) => EventDescriptor::Intersect { event, frozen_seq },
        };
        session.apply(state, Stage::DecisionCal, target, desc, &members, phi, Some(beta), false);
    }
}

/// Decision-calibrates each predictor in `targets`, in order, against every
/// loss of `family`.
pub fn decision_calibrate(
    data: &EmpiricalDataset,
    family: &LossFamily,
    config: &ResolvedConfig,
    targets: &[Predictor],
    state: &mut PredictorPair,
) -> Result<RunOutput> {
    decision_calibrate_with(data, family, config, targets, state, &mut |_| {})
}

pub fn decision_calibrate_with(
    data: &EmpiricalDataset,
    family: &LossFamily,
    config: &ResolvedConfig,
    targets: &[Predictor],
    state: &mut PredictorPair,
    observer: &mut dyn FnMut(&StepReport),
) -> Result<RunOutput> {
    check_state(data, state)?;
    family.check_dim(data.dim())?;
    let mut session = Session::new(data, family, config, observer);
    let mut status = RunStatus::Converged;
    for &target in targets {
        match calibrate_loop(&mut session, state, target, config.beta, config.grid_m, None)? {
            LoopEnd::Converged => {}
            LoopEnd::Truncated => {
                status = RunStatus::Truncated;
                break;
            }
        }
    }
    Ok(session.finish("decal", config, status, Vec::new()))
}
