//! Per-round tolerance: when the target's action is worse on average than
//! some fixed action on the disagreement event, the inner calibration runs
//! with a tolerance tied to that gap instead of the global one.
//!
//! Run with `cargo run --example adaptive_tolerance`.

use redcal::{gen_random_instance, redcal, PredictorPair, RandomInstanceSpec, RunConfig};

fn main() -> redcal::Result<()> {
    let spec = RandomInstanceSpec { n: 600, d: 3, k: 3, loss_count: 1, noise: 0.45, seed: 3 };
    let (data, family) = gen_random_instance(&spec)?;
    for adaptive in [false, true] {
        let cfg = RunConfig::new(0.05, 0.05)
            .with_beta(0.02)
            .with_adaptive_beta(adaptive)
            .resolve(&data, &family)?;
        let mut state = PredictorPair::from_dataset(&data);
        let out = redcal(&data, &family, &cfg, &mut state)?;
        println!("adaptive = {adaptive}: {} steps", out.steps());
        for r in &out.rounds {
            let li = r.event.loss;
            println!(
                "  round {:>2} {}: delta {:.4}, beta {:.4}, m {:>4}, inner {:>2}, loss {:.4} -> {:.4}",
                r.round, r.target, r.delta, r.beta, r.grid_m, r.inner_steps, r.loss_before[li], r.loss_after[li]
            );
        }
    }
    Ok(())
}
