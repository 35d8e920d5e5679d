//! The closed-form step and sample-size bounds for one configuration.
//!
//! Run with `cargo run --example bounds`.

use redcal::bounds::{
    baseline_iteration_bound, deviation_bounds, exact_iteration_bound, grid_iteration_bound, transcript_space_log,
    BoundInputs,
};

fn main() {
    let mut input = BoundInputs {
        d: 1,
        k: 2,
        loss_count: 1,
        alpha: 0.1,
        eta: 0.25,
        beta: 0.1,
        brier_1: 0.40,
        brier_2: 0.36,
        n: 10_000,
        delta: 0.05,
        ..BoundInputs::default()
    };
    println!("exact-mode steps      {}", exact_iteration_bound(&input));
    println!("baseline rounds       {}", baseline_iteration_bound(&input));
    let grid = grid_iteration_bound(&input);
    println!("grid-mode steps       {} (needs m >= {})", grid.max_steps, grid.min_resolution);

    input.m = grid.min_resolution;
    for t_max in [2, 100, grid.max_steps] {
        let ln_s = transcript_space_log(&input, t_max);
        let dev = deviation_bounds(&input, ln_s);
        println!(
            "T = {t_max:>5}: ln|S| = {ln_s:>10.2}, brier dev {:.4}, calibration dev {:.4}, mass dev {:.4}",
            dev.brier_dev, dev.calib_dev, dev.mass_dev
        );
    }
}
