//! Bring your own predictions and losses: a three-class triage problem with
//! a raw cost matrix, written to CSV and JSON, loaded back and reconciled.
//!
//! Run with `cargo run --example custom_losses`.

use redcal::io::{load_dataset, load_losses, save_losses, write_dataset};
use redcal::{
    rescale_loss, EmpiricalDataset, LossFamily, Predictor, PredictorPair, RunConfig, Unit,
};

fn main() -> redcal::Result<()> {
    // actions: discharge, observe, treat; outcomes: healthy, mild, severe
    let costs = vec![
        vec![0.0, 4.0, 20.0],
        vec![1.0, 1.0, 8.0],
        vec![5.0, 3.0, 2.0],
    ];
    let family = LossFamily::single(rescale_loss("triage", &costs)?);

    let mut units = Vec::new();
    for id in 0..60u64 {
        let class = (id % 3) as usize;
        let label: Vec<f64> = (0..3).map(|j| if j == class { 1.0 } else { 0.0 }).collect();
        let t = (id % 7) as f64 / 10.0;
        let f1 = vec![0.5 - t / 2.0, 0.3, 0.2 + t / 2.0];
        let f2 = vec![0.2 + t / 3.0, 0.5 - t / 3.0, 0.3];
        units.push(Unit::new(id, 0.0, label, f1, f2));
    }
    let data = EmpiricalDataset::uniform(3, units)?;

    let dir = std::env::temp_dir().join("redcal-custom-losses");
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("triage.csv");
    let json = dir.join("triage.json");
    let tables = [data.predictions(Predictor::First), data.predictions(Predictor::Second)];
    write_dataset(std::fs::File::create(&csv)?, &data, tables, None)?;
    save_losses(&family, &json)?;
    println!("wrote {} and {}", csv.display(), json.display());

    let data = load_dataset(csv.to_str().unwrap())?.data;
    let family = load_losses(&json)?;
    let cfg = RunConfig::new(0.02, 0.05).with_beta(0.01).resolve(&data, &family)?;
    let mut state = PredictorPair::from_dataset(&data);
    let out = redcal::redcal(&data, &family, &cfg, &mut state)?;
    let report = redcal::audit(&state, &data, &family, &cfg);
    println!(
        "{} steps; decision loss {:?} -> {:?}; worst disagreement {:.3}",
        out.steps(),
        redcal::audit(&PredictorPair::from_dataset(&data), &data, &family, &cfg).decision_loss,
        report.decision_loss,
        report.max_disagreement_mass
    );
    Ok(())
}
