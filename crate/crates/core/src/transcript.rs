//! Patch transcripts: the ordered list of `(target, event, φ)` steps that
//! defines the calibrated predictors as functions of fresh data.
//!
//! Events are stored as descriptors, so replay recomputes memberships from
//! the replayed predictions. A disagreement step freezes its membership under
//! its own sequence number; later intersect steps name that number.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibration::{Phi, Stage};
use crate::config::ResolvedConfig;
use crate::dataset::{EmpiricalDataset, Predictor};
use crate::error::{Error, Result};
use crate::events::{resolve_members, EventDescriptor};
use crate::loss::LossFamily;
use crate::state::PredictorPair;

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "StepRepr", try_from = "StepRepr")]
pub struct PatchStep {
    pub seq: u64,
    pub stage: Stage,
    pub target: Predictor,
    pub event: EventDescriptor,
    pub phi: Phi,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepRepr {
    seq: u64,
    stage: Stage,
    target: Predictor,
    event: EventDescriptor,
    phi: Vec<String>,
}

impl From<PatchStep> for StepRepr {
    fn from(s: PatchStep) -> Self {
        StepRepr {
            seq: s.seq,
            stage: s.stage,
            target: s.target,
            event: s.event,
            phi: s.phi.text().to_vec(),
        }
    }
}

impl TryFrom<StepRepr> for PatchStep {
    type Error = Error;

    fn try_from(r: StepRepr) -> Result<Self> {
        Ok(PatchStep {
            seq: r.seq,
            stage: r.stage,
            target: r.target,
            event: r.event,
            phi: Phi::parse(&r.phi)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub version: u32,
    /// Which algorithm produced the steps.
    pub algorithm: String,
    pub d: usize,
    pub k: usize,
    pub loss_count: usize,
    pub losses_digest: String,
    pub config: ResolvedConfig,
    pub steps: Vec<PatchStep>,
}

impl Transcript {
    pub fn new(algorithm: &str, d: usize, family: &LossFamily, config: ResolvedConfig, steps: Vec<PatchStep>) -> Self {
        Transcript {
            version: TRANSCRIPT_VERSION,
            algorithm: algorithm.to_string(),
            d,
            k: family.actions(),
            loss_count: family.len(),
            losses_digest: family.digest(),
            config,
            steps,
        }
    }

    /// Compact JSON with object keys sorted.
    pub fn to_canonical_json(&self) -> String {
        // serde_json's default map is ordered, so a round trip through
        // `Value` sorts every object's keys
        let value = serde_json::to_value(self).expect("transcript serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_canonical_json();
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn digest(&self) -> String {
        transcript_digest(self)
    }

    /// Applies the steps, in order, to the base predictions of `fresh`.
    pub fn replay(&self, fresh: &EmpiricalDataset, family: &LossFamily) -> Result<PredictorPair> {
        replay(self, fresh, family)
    }
}

/// SHA-256 hex digest of the canonical serialization.
pub fn transcript_digest(tr: &Transcript) -> String {
    hex::encode(Sha256::digest(tr.to_canonical_json().as_bytes()))
}

pub fn replay(tr: &Transcript, fresh: &EmpiricalDataset, family: &LossFamily) -> Result<PredictorPair> {
    if tr.version != TRANSCRIPT_VERSION {
        return Err(Error::Replay(format!("unsupported transcript version {}", tr.version)));
    }
    let digest = family.digest();
    if digest != tr.losses_digest {
        return Err(Error::Replay(format!(
            "loss family digest {digest} does not match transcript {}",
            tr.losses_digest
        )));
    }
    if fresh.dim() != tr.d {
        return Err(Error::Replay(format!(
            "data dimension {} does not match transcript dimension {}",
            fresh.dim(),
            tr.d
        )));
    }
    let mut state = PredictorPair::from_dataset(fresh);
    let mut frozen = BTreeMap::new();
    for (i, step) in tr.steps.iter().enumerate() {
        if step.seq != i as u64 {
            return Err(Error::Replay(format!("expected step {i}, found step {}", step.seq)));
        }
        if step.phi.values().len() != tr.d {
            return Err(Error::Replay(format!("step {i} has a patch of length {}", step.phi.values().len())));
        }
        let members = resolve_members(&step.event, step.target, family, &state, &frozen).map_err(|e| match e {
            Error::Replay(_) => e,
            other => Error::Replay(format!("step {i}: {other}")),
        })?;
        state.patch(step.target, &members, step.phi.values());
        let counters = state.counters_mut();
        counters.total += 1;
        let slot = step.target.index();
        match step.stage {
            Stage::Reconcile => counters.reconcile[slot] += 1,
            Stage::DecisionCal => counters.calibration[slot] += 1,
            Stage::Baseline => counters.baseline[slot] += 1,
        }
        if let EventDescriptor::Disagree(_) = step.event {
            frozen.insert(step.seq, members);
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{reconcile_baseline, redcal};
    use crate::config::{GridResolution, RunConfig};
    use crate::dataset::Unit;
    use crate::instances::{gen_random_instance, gen_reconcile_counterexample, RandomInstanceSpec};

    fn baseline_transcript() -> (EmpiricalDataset, LossFamily, Transcript, PredictorPair) {
        let (data, family) = gen_reconcile_counterexample(0.2).unwrap();
        let cfg = RunConfig::new(0.1, 0.25)
            .with_grid(GridResolution::Fixed(100))
            .resolve_baseline(&data)
            .unwrap();
        let mut state = PredictorPair::from_dataset(&data);
        let out = reconcile_baseline(&data, &family, &cfg, &mut state).unwrap();
        (data, family, out.transcript, state)
    }

    #[test]
    fn self_replay_matches() {
        let (data, family, tr, live) = baseline_transcript();
        let replayed = tr.replay(&data, &family).unwrap();
        assert_eq!(replayed.tables(), live.tables());
    }

    #[test]
    fn empty_transcript_is_identity() {
        let (data, family, mut tr, _) = baseline_transcript();
        tr.steps.clear();
        assert_eq!(tr.replay(&data, &family).unwrap(), PredictorPair::from_dataset(&data));
    }

    #[test]
    fn duplicated_profiles_get_the_same_patch() {
        let (_, family, tr, _) = baseline_transcript();
        let test = EmpiricalDataset::uniform(
            1,
            vec![
                Unit::new(10, 0.0, vec![0.0], vec![0.4], vec![0.6]),
                Unit::new(11, 0.0, vec![1.0], vec![0.2], vec![0.4]),
                Unit::new(12, 0.0, vec![0.0], vec![0.4], vec![0.6]),
                Unit::new(13, 0.0, vec![1.0], vec![0.2], vec![0.4]),
            ],
        )
        .unwrap();
        let out = tr.replay(&test, &family).unwrap();
        let f1 = out.table(Predictor::First);
        assert_eq!(f1, &[0.4 + 0.2, 0.2 + 0.2, 0.4 + 0.2, 0.2 + 0.2]);
        assert_eq!(out.table(Predictor::Second), test.predictions(Predictor::Second));
    }

    #[test]
    fn json_round_trip_and_digest() {
        let (_, _, tr, _) = baseline_transcript();
        let text = tr.to_canonical_json();
        let back = Transcript::from_json(&text).unwrap();
        assert_eq!(back, tr);
        assert_eq!(back.to_canonical_json(), text);
        assert_eq!(back.digest(), tr.digest());

        let mut other = tr.clone();
        other.steps[0].phi = Phi::rounded(&[0.21], 100);
        assert_ne!(other.digest(), tr.digest());
    }

    #[test]
    fn golden_digest() {
        let (_, _, tr, _) = baseline_transcript();
        assert_eq!(
            tr.to_canonical_json(),
            concat!(
                r#"{"algorithm":"reconcile","config":{"adaptive_beta":false,"alpha":0.1,"beta":0.0,"eta":0.25,"#,
                r#""grid_m":100,"max_steps":48640,"requested_grid_m":100,"seed":0},"d":1,"k":2,"loss_count":1,"#,
                r#""losses_digest":""#,
                "LOSSDIGEST",
                r#"","steps":[{"event":{"eps":"1/10","kind":"region","side":"<"},"phi":["20/100"],"seq":0,"#,
                r#""stage":"baseline","target":1}],"version":1}"#
            )
            .replace("LOSSDIGEST", &tr.losses_digest)
        );
        assert_eq!(tr.digest(), GOLDEN);
    }

    const GOLDEN: &str = "6a8dac5c250fcb37fbf07bd2326669a456b00fd301530bbe95975f1b424b7351";

    #[test]
    fn replay_rejects_mismatches() {
        let (data, family, tr, _) = baseline_transcript();
        let other = LossFamily::single(crate::loss::LossFunction::new("x", &[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap());
        assert!(matches!(tr.replay(&data, &other), Err(Error::Replay(_))));

        let mut gap = tr.clone();
        gap.steps[0].seq = 3;
        assert!(matches!(gap.replay(&data, &family), Err(Error::Replay(_))));
    }

    #[test]
    fn redcal_self_replay_is_bit_exact() {
        for seed in 0..5 {
            let spec = RandomInstanceSpec { n: 150, d: 3, k: 3, loss_count: 2, noise: 0.35, seed };
            let (data, family) = gen_random_instance(&spec).unwrap();
            let cfg = RunConfig::new(0.05, 0.05).with_beta(0.01).resolve(&data, &family).unwrap();
            let mut live = PredictorPair::from_dataset(&data);
            let out = redcal(&data, &family, &cfg, &mut live).unwrap();
            let text = out.transcript.to_canonical_json();
            let replayed = Transcript::from_json(&text).unwrap().replay(&data, &family).unwrap();
            assert_eq!(replayed, live);
        }
    }
}
