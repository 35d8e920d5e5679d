//! Two equally plausible predictors of a binary outcome, and what happens to
//! a threshold decision-maker when they are reconciled two different ways.
//!
//! Run with `cargo run --example baseline_counterexample`.

use redcal::{
    decision_loss, gen_reconcile_counterexample, reconcile_baseline, redcal, Predictor, PredictorPair, RunConfig,
};

fn main() -> redcal::Result<()> {
    let (data, family) = gen_reconcile_counterexample(0.2)?;
    let loss = family.get(0)?;
    let base = PredictorPair::from_dataset(&data);
    let show = |label: &str, state: &PredictorPair| {
        for p in Predictor::BOTH {
            println!(
                "{label:>9} {p}: predictions {:?}, decision loss {:.3}",
                state.table(p),
                decision_loss(&data, loss, state.table(p))
            );
        }
    };
    show("input", &base);

    // patching wherever the predictions differ by more than ε
    let cfg = RunConfig::new(0.1, 0.25).resolve_baseline(&data)?;
    let mut patched = base.clone();
    let out = reconcile_baseline(&data, &family, &cfg, &mut patched)?;
    println!("baseline took {} step(s)", out.steps());
    show("baseline", &patched);

    // patching where the induced actions differ
    let cfg = RunConfig::new(0.05, 0.25).with_beta(1e-4).resolve(&data, &family)?;
    let mut reconciled = base.clone();
    let out = redcal(&data, &family, &cfg, &mut reconciled)?;
    println!("redcal took {} step(s), patched {}", out.steps(), out.rounds[0].target);
    show("redcal", &reconciled);
    Ok(())
}
