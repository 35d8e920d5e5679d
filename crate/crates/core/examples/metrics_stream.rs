//! Driving the command-line front end in-process and reading its JSONL
//! metrics, one record per patch step.
//!
//! Run with `cargo run --example metrics_stream`.

fn main() {
    let dir = std::env::temp_dir().join("redcal-metrics-stream");
    std::fs::create_dir_all(&dir).unwrap();
    let data = dir.join("instance.csv");
    let metrics = dir.join("metrics.jsonl");
    let data = data.to_str().unwrap();
    let metrics = metrics.to_str().unwrap();

    let code = redcal::cli::run(["redcal", "gen", "random", "--n", "300", "--d", "3", "--noise", "0.45", "--seed", "9", "--out", data]);
    assert_eq!(code, 0);
    let code = redcal::cli::run([
        "redcal", "redcal", "--data", data, "--alpha", "0.02", "--eta", "0.02", "--beta", "0.01", "--out-metrics", metrics,
    ]);
    println!("exit code {code}");

    for line in std::fs::read_to_string(metrics).unwrap().lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        match record["type"].as_str().unwrap() {
            "step" => println!(
                "step {:>2} {:<12} f{} mass {:.3} brier {:.4} -> {:.4}",
                record["t"],
                record["stage"].as_str().unwrap(),
                record["target"],
                record["mass"].as_f64().unwrap(),
                record["brier_before"][record["target"].as_u64().unwrap() as usize - 1].as_f64().unwrap(),
                record["brier_after"][record["target"].as_u64().unwrap() as usize - 1].as_f64().unwrap(),
            ),
            other => println!("{other} record"),
        }
    }
}
