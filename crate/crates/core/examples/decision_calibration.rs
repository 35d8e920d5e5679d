//! Decision calibration on its own: it removes the residual on every
//! best-response event, yet it cannot make two predictors agree.
//!
//! Run with `cargo run --example decision_calibration`.

use redcal::{
    audit, decision_calibrate, gen_decal_counterexample, gen_random_instance, redcal, LabelRealization, Predictor,
    PredictorPair, RandomInstanceSpec, RunConfig,
};

fn main() -> redcal::Result<()> {
    let spec = RandomInstanceSpec { n: 400, d: 4, k: 3, loss_count: 2, noise: 0.4, seed: 11 };
    let (data, family) = gen_random_instance(&spec)?;
    let cfg = RunConfig::new(0.05, 0.05).with_beta(0.01).resolve(&data, &family)?;
    let mut state = PredictorPair::from_dataset(&data);
    let before = audit(&state, &data, &family, &cfg);
    let out = decision_calibrate(&data, &family, &cfg, &Predictor::BOTH, &mut state)?;
    let after = audit(&state, &data, &family, &cfg);
    println!(
        "random instance: {} steps, worst residual {:.4} -> {:.4} (tolerance {})",
        out.steps(),
        before.max_residual_norm,
        after.max_residual_norm,
        cfg.beta
    );
    println!("                 worst disagreement mass {:.4} -> {:.4}", before.max_disagreement_mass, after.max_disagreement_mass);

    // a pair that is already exactly calibrated but still disagrees on 2η of the mass
    let (data, family) = gen_decal_counterexample(0.1, 0.4, LabelRealization::Fractional)?;
    let cfg = RunConfig::new(0.05, 0.1).with_beta(1e-3).resolve(&data, &family)?;
    let mut state = PredictorPair::from_dataset(&data);
    let report = audit(&state, &data, &family, &cfg);
    println!(
        "calibrated pair: residual {:.1e}, disagreement masses {:?}",
        report.max_residual_norm,
        report.disagreement.iter().map(|x| x.mass).collect::<Vec<_>>()
    );
    let out = redcal(&data, &family, &cfg, &mut state)?;
    let report = audit(&state, &data, &family, &cfg);
    println!("after redcal ({} steps): worst disagreement mass {}", out.steps(), report.max_disagreement_mass);
    Ok(())
}
