//! Best-response events, disagreement events and the statistics conditioned on them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calibration::grid::{parse_real, render_real};
use crate::dataset::{EmpiricalDataset, Predictor};
use crate::error::{Error, Result};
use crate::loss::{LossFamily, LossFunction};
use crate::state::{Members, PredictorPair};

/// `E_{ℓ,a}`: units whose best response under loss `loss` is `action`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BestResponseEvent {
    pub loss: usize,
    pub action: usize,
}

/// `E^α_{ℓ,a₁,a₂}`: units where the first predictor plays `action_1`, the
/// second plays `action_2`, and at least one of them sees a loss gap above
/// `alpha` between the two actions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisagreementEvent {
    pub loss: usize,
    pub action_1: usize,
    pub action_2: usize,
    pub alpha: f64,
}

/// Which half of the prediction-disagreement region a baseline step targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionSide {
    /// `f₁(x) > f₂(x) + ε`
    #[serde(rename = ">")]
    Greater,
    /// `f₁(x) < f₂(x) − ε`
    #[serde(rename = "<")]
    Less,
}

impl RegionSide {
    pub const BOTH: [RegionSide; 2] = [RegionSide::Greater, RegionSide::Less];

    pub fn symbol(self) -> &'static str {
        match self {
            RegionSide::Greater => ">",
            RegionSide::Less => "<",
        }
    }
}

/// Everything a patch step can condition on.
///
/// `Intersect` pairs a best-response event of the patched predictor with a
/// disagreement event frozen at an earlier step; `frozen_seq` names that step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "EventRepr", try_from = "EventRepr")]
pub enum EventDescriptor {
    BestResponse(BestResponseEvent),
    Disagree(DisagreementEvent),
    Intersect {
        event: BestResponseEvent,
        frozen_seq: u64,
    },
    Region {
        eps: f64,
        side: RegionSide,
    },
}

/// Wire form of [`EventDescriptor`]; reals are written with
/// [`render_real`] so they survive a round trip unchanged.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum EventRepr {
    Br {
        loss: usize,
        action: usize,
    },
    Disagree {
        loss: usize,
        a1: usize,
        a2: usize,
        alpha: String,
    },
    Intersect {
        loss: usize,
        action: usize,
        frozen_seq: u64,
    },
    Region {
        eps: String,
        side: RegionSide,
    },
}

impl From<EventDescriptor> for EventRepr {
    fn from(e: EventDescriptor) -> Self {
        match e {
            EventDescriptor::BestResponse(ev) => EventRepr::Br {
                loss: ev.loss,
                action: ev.action,
            },
            EventDescriptor::Disagree(ev) => EventRepr::Disagree {
                loss: ev.loss,
                a1: ev.action_1,
                a2: ev.action_2,
                alpha: render_real(ev.alpha),
            },
            EventDescriptor::Intersect { event, frozen_seq } => EventRepr::Intersect {
                loss: event.loss,
                action: event.action,
                frozen_seq,
            },
            EventDescriptor::Region { eps, side } => EventRepr::Region {
                eps: render_real(eps),
                side,
            },
        }
    }
}

impl TryFrom<EventRepr> for EventDescriptor {
    type Error = Error;

    fn try_from(r: EventRepr) -> Result<Self> {
        Ok(match r {
            EventRepr::Br { loss, action } => EventDescriptor::BestResponse(BestResponseEvent { loss, action }),
            EventRepr::Disagree { loss, a1, a2, alpha } => EventDescriptor::Disagree(DisagreementEvent {
                loss,
                action_1: a1,
                action_2: a2,
                alpha: parse_real(&alpha)?,
            }),
            EventRepr::Intersect { loss, action, frozen_seq } => EventDescriptor::Intersect {
                event: BestResponseEvent { loss, action },
                frozen_seq,
            },
            EventRepr::Region { eps, side } => EventDescriptor::Region {
                eps: parse_real(&eps)?,
                side,
            },
        })
    }
}

/// Best response of every row of `table` under `loss`.
pub fn best_responses(loss: &LossFunction, table: &[f64], dim: usize) -> Vec<usize> {
    table.chunks_exact(dim).map(|p| loss.best_response(p)).collect()
}

pub fn br_event_members(
    family: &LossFamily,
    ev: BestResponseEvent,
    state: &PredictorPair,
    p: Predictor,
) -> Result<Members> {
    let loss = family.get(ev.loss)?;
    check_action(loss, ev.action)?;
    let d = state.dim();
    let rows = state
        .table(p)
        .chunks_exact(d)
        .enumerate()
        .filter(|(_, f)| loss.best_response(f) == ev.action)
        .map(|(i, _)| i)
        .collect();
    Ok(Members::from_sorted(rows))
}

/// Margin test of the disagreement definition for one unit whose best
/// responses are already known to be `(a1, a2)`. Strict inequality.
#[inline]
fn exceeds_margin(loss: &LossFunction, f1: &[f64], f2: &[f64], a1: usize, a2: usize, alpha: f64) -> bool {
    let gap_1 = loss.value(a2, f1) - loss.value(a1, f1);
    let gap_2 = loss.value(a1, f2) - loss.value(a2, f2);
    gap_1 > alpha || gap_2 > alpha
}

pub fn disagreement_members(
    family: &LossFamily,
    ev: DisagreementEvent,
    state: &PredictorPair,
) -> Result<Members> {
    let loss = family.get(ev.loss)?;
    check_action(loss, ev.action_1)?;
    check_action(loss, ev.action_2)?;
    if ev.action_1 == ev.action_2 {
        return Err(Error::config("disagreement event needs distinct actions"));
    }
    let mut rows = Vec::new();
    for i in 0..state.len() {
        let f1 = state.prediction(Predictor::First, i);
        let f2 = state.prediction(Predictor::Second, i);
        if loss.best_response(f1) == ev.action_1
            && loss.best_response(f2) == ev.action_2
            && exceeds_margin(loss, f1, f2, ev.action_1, ev.action_2, ev.alpha)
        {
            rows.push(i);
        }
    }
    Ok(Members::from_sorted(rows))
}

/// All non-empty disagreement events of the current pair, keyed by
/// `(loss, a₁, a₂)` in lexicographic order. One scan per loss.
pub fn disagreement_events(
    family: &LossFamily,
    alpha: f64,
    state: &PredictorPair,
) -> BTreeMap<(usize, usize, usize), Members> {
    let mut out = BTreeMap::new();
    for (li, loss) in family.iter().enumerate() {
        let mut buckets: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for i in 0..state.len() {
            let f1 = state.prediction(Predictor::First, i);
            let f2 = state.prediction(Predictor::Second, i);
            let a1 = loss.best_response(f1);
            let a2 = loss.best_response(f2);
            if a1 != a2 && exceeds_margin(loss, f1, f2, a1, a2, alpha) {
                buckets.entry((a1, a2)).or_default().push(i);
            }
        }
        for ((a1, a2), rows) in buckets {
            out.insert((li, a1, a2), Members::from_sorted(rows));
        }
    }
    out
}

pub fn event_mass(members: &Members, data: &EmpiricalDataset) -> f64 {
    members.rows().iter().map(|&r| data.weight(r)).sum()
}

/// `Σ_{x∈E} w_x (y_x − f(x))`: the unconditional residual restricted to `E`.
pub fn residual_sum(members: &Members, data: &EmpiricalDataset, table: &[f64]) -> Vec<f64> {
    let d = data.dim();
    let mut acc = vec![0.0; d];
    for &r in members {
        let w = data.weight(r);
        let f = &table[r * d..(r + 1) * d];
        for ((a, y), p) in acc.iter_mut().zip(data.label(r)).zip(f) {
            *a += w * (y - p);
        }
    }
    acc
}

/// `𝔼[y − f(x) | x ∈ E]`.
pub fn conditional_mean_residual(
    members: &Members,
    data: &EmpiricalDataset,
    table: &[f64],
) -> Result<Vec<f64>> {
    let mass = event_mass(members, data);
    if members.is_empty() || mass <= 0.0 {
        return Err(Error::EmptyEvent);
    }
    let mut r = residual_sum(members, data, table);
    for x in &mut r {
        *x /= mass;
    }
    Ok(r)
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rows where `|f₁ − f₂| > eps` on the given side. Scalar predictions only.
pub fn region_members(state: &PredictorPair, eps: f64, side: RegionSide) -> Members {
    let f1 = state.table(Predictor::First);
    let f2 = state.table(Predictor::Second);
    let rows = f1
        .iter()
        .zip(f2)
        .enumerate()
        .filter(|(_, (a, b))| {
            (*a - *b).abs() > eps
                && match side {
                    RegionSide::Greater => a > b,
                    RegionSide::Less => a < b,
                }
        })
        .map(|(i, _)| i)
        .collect();
    Members::from_sorted(rows)
}

/// Recomputes the members of `desc` on the current state.
///
/// `target` is the predictor whose best responses define `BestResponse` and
/// `Intersect` events; `frozen` maps step numbers to the disagreement
/// memberships fixed at those steps.
pub fn resolve_members(
    desc: &EventDescriptor,
    target: Predictor,
    family: &LossFamily,
    state: &PredictorPair,
    frozen: &BTreeMap<u64, Members>,
) -> Result<Members> {
    match *desc {
        EventDescriptor::BestResponse(ev) => br_event_members(family, ev, state, target),
        EventDescriptor::Disagree(ev) => disagreement_members(family, ev, state),
        EventDescriptor::Intersect { event, frozen_seq } => {
            let outer = frozen.get(&frozen_seq).ok_or_else(|| {
                Error::Replay(format!("no frozen event recorded at step {frozen_seq}"))
            })?;
            let loss = family.get(event.loss)?;
            check_action(loss, event.action)?;
            let rows = outer
                .rows()
                .iter()
                .copied()
                .filter(|&r| loss.best_response(state.prediction(target, r)) == event.action)
                .collect();
            Ok(Members::from_sorted(rows))
        }
        EventDescriptor::Region { eps, side } => {
            if state.dim() != 1 {
                return Err(Error::Dimension {
                    expected: 1,
                    found: state.dim(),
                });
            }
            Ok(region_members(state, eps, side))
        }
    }
}

/// `‖𝔼[(y − f(x))·1[x ∈ E]]‖₂` for a resolved event. Zero for empty events.
pub fn calibration_residual_norm(
    desc: &EventDescriptor,
    target: Predictor,
    family: &LossFamily,
    data: &EmpiricalDataset,
    state: &PredictorPair,
    frozen: &BTreeMap<u64, Members>,
) -> Result<f64> {
    let members = resolve_members(desc, target, family, state, frozen)?;
    Ok(l2_norm(&residual_sum(&members, data, state.table(target))))
}

fn check_action(loss: &LossFunction, action: usize) -> Result<()> {
    if action < loss.actions() {
        Ok(())
    } else {
        Err(Error::config(format!(
            "action {action} out of range for loss `{}` with {} actions",
            loss.name(),
            loss.actions()
        )))
    }
}
