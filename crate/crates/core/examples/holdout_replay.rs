//! Fit the patches on a calibration split, then apply the saved transcript
//! to a held-out split and compare.
//!
//! Run with `cargo run --example holdout_replay`.

use redcal::{
    brier_score, decision_loss, disagreement_events, event_mass, gen_random_instance, redcal, split_dataset,
    EmpiricalDataset, LossFamily, Predictor, PredictorPair, RandomInstanceSpec, RunConfig, Transcript,
};

fn describe(name: &str, data: &EmpiricalDataset, family: &LossFamily, alpha: f64, state: &PredictorPair) {
    let mass = disagreement_events(family, alpha, state)
        .values()
        .map(|m| event_mass(m, data))
        .fold(0.0, f64::max);
    let losses: Vec<String> = Predictor::BOTH
        .iter()
        .map(|&p| format!("{:.4}", decision_loss(data, family.get(0).unwrap(), state.table(p))))
        .collect();
    println!(
        "{name:<16} brier [{:.4}, {:.4}]  loss[0] {losses:?}  max disagreement {mass:.4}",
        brier_score(data, state.table(Predictor::First)),
        brier_score(data, state.table(Predictor::Second)),
    );
}

fn main() -> redcal::Result<()> {
    let spec = RandomInstanceSpec { n: 2000, d: 3, k: 3, loss_count: 2, noise: 0.4, seed: 2024 };
    let (data, family) = gen_random_instance(&spec)?;
    let (cal, test) = split_dataset(&data, 0.5, 7)?;
    let (alpha, eta) = (0.05, 0.05);
    let cfg = RunConfig::new(alpha, eta).with_beta(0.01).resolve(&cal, &family)?;

    let mut live = PredictorPair::from_dataset(&cal);
    let out = redcal(&cal, &family, &cfg, &mut live)?;
    println!("{} patch steps over {} rounds, grid m = {}", out.steps(), out.rounds.len(), cfg.grid_m);

    // what would be written to disk and shipped with the predictors
    let text = out.transcript.to_canonical_json();
    let transcript = Transcript::from_json(&text)?;
    println!("transcript: {} bytes, digest {}", text.len(), transcript.digest());

    describe("calibration in", &cal, &family, alpha, &PredictorPair::from_dataset(&cal));
    describe("calibration out", &cal, &family, alpha, &live);
    assert_eq!(transcript.replay(&cal, &family)?, live);
    describe("test in", &test, &family, alpha, &PredictorPair::from_dataset(&test));
    describe("test out", &test, &family, alpha, &transcript.replay(&test, &family)?);
    Ok(())
}
