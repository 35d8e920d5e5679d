//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 run truncated by
//! the step cap, 4 audit failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::audit::audit;
use crate::bounds::{
    baseline_iteration_bound, deviation_bounds, exact_iteration_bound, grid_iteration_bound, transcript_space_log,
    BoundInputs,
};
use crate::calibration::{
    decision_calibrate_with, reconcile_baseline_with, redcal_with, RunOutput, RunStatus, StepReport,
};
use crate::config::{GridResolution, ResolvedConfig, RunConfig};
use crate::dataset::{EmpiricalDataset, Predictor};
use crate::error::{Error, Result};
use crate::events::{disagreement_events, event_mass};
use crate::instances::{
    gen_decal_counterexample, gen_random_instance, gen_reconcile_counterexample, LabelRealization, RandomInstanceSpec,
};
use crate::io::{load_dataset, load_losses, write_dataset};
use crate::loss::LossFamily;
use crate::metrics::{brier_score, decision_loss, loss_gap};
use crate::state::PredictorPair;
use crate::transcript::Transcript;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_TRUNCATED: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "redcal", version, about = "Reconcile two predictors for downstream decisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce best-response disagreement between the two predictors.
    Redcal(RunArgs),
    /// Decision-calibrate each predictor on its own.
    Decal(DecalArgs),
    /// Prediction-disagreement baseline (scalar outcomes only).
    Reconcile(RunArgs),
    /// Apply a saved transcript to a dataset.
    Replay(ReplayArgs),
    /// Recompute every disagreement mass and residual by brute force.
    Audit(AuditArgs),
    /// Generate an instance as CSV with an embedded loss family.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Evaluate the iteration and deviation bounds.
    Bound(BoundArgs),
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Prediction CSV, or `-` for standard input.
    #[arg(long, default_value = "-")]
    data: String,
    /// Loss-family JSON. Defaults to the family embedded in the CSV.
    #[arg(long)]
    losses: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Loss margin (prediction gap for `reconcile`).
    #[arg(long, visible_alias = "eps", default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    /// Calibration tolerance; defaults to α / (T·√d·K).
    #[arg(long)]
    beta: Option<f64>,
    /// Grid resolution; 0 for exact patches, omitted for the smallest valid one.
    #[arg(long)]
    grid_m: Option<u64>,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tighten the inner tolerance per round to keep decision loss from rising.
    #[arg(long)]
    adaptive_beta: bool,
    #[arg(long)]
    out_transcript: Option<PathBuf>,
    /// JSONL stream: header, one record per step, summary.
    #[arg(long)]
    out_metrics: Option<PathBuf>,
    /// Calibrated predictions as CSV.
    #[arg(long)]
    out_data: Option<PathBuf>,
    /// Held-out CSV to replay the transcript on and report.
    #[arg(long)]
    test_data: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct DecalArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value_t = TargetArg::Both)]
    target: TargetArg,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum TargetArg {
    #[value(name = "1")]
    First,
    #[value(name = "2")]
    Second,
    Both,
}

#[derive(Args, Debug, Clone)]
struct ReplayArgs {
    #[command(flatten)]
    input: DataArgs,
    #[arg(long)]
    transcript: PathBuf,
    #[arg(long)]
    out_data: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum AuditCheck {
    Disagreement,
    Calibration,
    All,
}

#[derive(Args, Debug, Clone)]
struct AuditArgs {
    #[command(flatten)]
    input: DataArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 1e-3)]
    beta: f64,
    /// Which guarantees decide the exit code.
    #[arg(long, value_enum, default_value_t = AuditCheck::Disagreement)]
    check: AuditCheck,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Two units where the baseline raises decision loss.
    ReconcileCx {
        #[arg(long, default_value_t = 0.2)]
        phi: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Four units, decision-calibrated yet disagreeing on mass 2η.
    DecalCx {
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[arg(long, default_value_t = 0.4)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = LabelArg::Fractional)]
        labels: LabelArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random instance.
    Random {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        loss_count: usize,
        #[arg(long, default_value_t = 0.3)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum LabelArg {
    Fractional,
    Bernoulli,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum WhichBound {
    Exact,
    Grid,
    Space,
    Deviation,
    Baseline,
    All,
}

#[derive(Args, Debug, Clone)]
struct BoundArgs {
    #[arg(long, value_enum, default_value_t = WhichBound::Exact)]
    which: WhichBound,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    loss_count: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Grid resolution for the transcript count; defaults to the minimal one.
    #[arg(long)]
    m: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    b1: f64,
    #[arg(long, default_value_t = 1.0)]
    b2: f64,
    /// Step count for the transcript count; defaults to the grid bound.
    #[arg(long)]
    t_max: Option<u64>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::TruncatedRun { .. } => EXIT_TRUNCATED,
                _ => EXIT_INPUT,
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Redcal(args) => run_algorithm(Algorithm::Redcal, &args, out),
        Command::Decal(args) => {
            let targets: &[Predictor] = match args.target {
                TargetArg::First => &[Predictor::First],
                TargetArg::Second => &[Predictor::Second],
                TargetArg::Both => &Predictor::BOTH,
            };
            run_algorithm(Algorithm::Decal(targets), &args.run, out)
        }
        Command::Reconcile(args) => run_algorithm(Algorithm::Baseline, &args, out),
        Command::Replay(args) => replay_cmd(&args, out),
        Command::Audit(args) => audit_cmd(&args, out),
        Command::Gen(cmd) => gen_cmd(cmd, out),
        Command::Bound(args) => bound_cmd(&args, out),
    }
}

fn load_inputs(args: &DataArgs) -> Result<(EmpiricalDataset, LossFamily)> {
    let loaded = load_dataset(&args.data)?;
    let family = match &args.losses {
        Some(path) => load_losses(path)?,
        None => loaded
            .losses
            .ok_or_else(|| Error::input("no --losses given and the CSV embeds no loss family"))?,
    };
    family.check_dim(loaded.data.dim())?;
    Ok((loaded.data, family))
}

#[derive(Clone, Copy)]
enum Algorithm<'a> {
    Redcal,
    Decal(&'a [Predictor]),
    Baseline,
}

impl Algorithm<'_> {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Redcal => "redcal",
            Algorithm::Decal(_) => "decal",
            Algorithm::Baseline => "reconcile",
        }
    }
}

/// Line-buffered JSONL writer; every record is flushed so an interrupted run
/// leaves a parseable prefix.
struct MetricsSink {
    writer: Option<BufWriter<File>>,
    error: Option<io::Error>,
}

impl MetricsSink {
    fn open(path: Option<&PathBuf>) -> Result<Self> {
        let writer = match path {
            Some(p) => Some(BufWriter::new(File::create(p)?)),
            None => None,
        };
        Ok(MetricsSink { writer, error: None })
    }

    fn record(&mut self, kind: &str, body: impl Serialize) {
        let Some(w) = self.writer.as_mut() else { return };
        if self.error.is_some() {
            return;
        }
        let mut value = serde_json::to_value(body).expect("metrics serialize");
        if let Value::Object(map) = &mut value {
            map.insert("type".into(), Value::String(kind.into()));
        }
        let res = serde_json::to_writer(&mut *w, &value)
            .map_err(io::Error::from)
            .and_then(|_| w.write_all(b"\n"))
            .and_then(|_| w.flush());
        if let Err(e) = res {
            self.error = Some(e);
        }
    }

    fn finish(self) -> Result<()> {
        match self.error {
            Some(e) => Err(e.into()),
            None => Ok(()),
        }
    }
}

/// Brier, decision loss and loss gap of both predictors of `state`.
fn snapshot(data: &EmpiricalDataset, family: &LossFamily, state: &PredictorPair) -> Value {
    let per = |f: &dyn Fn(&[f64]) -> Value| -> Value {
        Value::Array(Predictor::BOTH.iter().map(|&p| f(state.table(p))).collect())
    };
    json!({
        "brier": per(&|t| json!(brier_score(data, t))),
        "decision_loss": per(&|t| json!(family.iter().map(|l| decision_loss(data, l, t)).collect::<Vec<_>>())),
        "loss_gap": per(&|t| json!(family.iter().map(|l| loss_gap(data, l, t)).collect::<Vec<_>>())),
    })
}

fn max_disagreement(data: &EmpiricalDataset, family: &LossFamily, alpha: f64, state: &PredictorPair) -> f64 {
    disagreement_events(family, alpha, state)
        .values()
        .map(|m| event_mass(m, data))
        .fold(0.0, f64::max)
}

fn run_algorithm(algo: Algorithm<'_>, args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let (data, family) = load_inputs(&args.input)?;
    let mut cfg = RunConfig::new(args.alpha, args.eta)
        .with_grid(GridResolution::from_flag(args.grid_m))
        .with_seed(args.seed)
        .with_adaptive_beta(args.adaptive_beta);
    if let Some(b) = args.beta {
        cfg = cfg.with_beta(b);
    }
    if let Some(s) = args.max_steps {
        cfg = cfg.with_max_steps(s);
    }
    let config: ResolvedConfig = match algo {
        Algorithm::Baseline => cfg.resolve_baseline(&data)?,
        _ => cfg.resolve(&data, &family)?,
    };

    let mut sink = MetricsSink::open(args.out_metrics.as_ref())?;
    let base = PredictorPair::from_dataset(&data);
    let before = snapshot(&data, &family, &base);
    sink.record(
        "header",
        json!({
            "command": algo.name(),
            "config": config,
            "n": data.len(),
            "d": data.dim(),
            "k": family.actions(),
            "loss_count": family.len(),
            "losses_digest": family.digest(),
            "initial": before,
        }),
    );

    let mut state = base.clone();
    let output: RunOutput = {
        let mut observer = |r: &StepReport| sink.record("step", r);
        match algo {
            Algorithm::Redcal => redcal_with(&data, &family, &config, &mut state, &mut observer)?,
            Algorithm::Decal(targets) => decision_calibrate_with(&data, &family, &config, targets, &mut state, &mut observer)?,
            Algorithm::Baseline => reconcile_baseline_with(&data, &family, &config, &mut state, &mut observer)?,
        }
    };
    for round in &output.rounds {
        sink.record("round", round);
    }

    let after = snapshot(&data, &family, &state);
    let mut summary = json!({
        "command": algo.name(),
        "status": output.status,
        "steps": output.steps(),
        "counters": state.counters(),
        "before": before,
        "after": after,
        "loss_change": loss_change(&data, &family, &base, &state),
        "transcript_digest": output.transcript.digest(),
    });
    if !matches!(algo, Algorithm::Baseline) {
        summary["max_disagreement_mass"] = json!(max_disagreement(&data, &family, config.alpha, &state));
    }
    if let Some(test_path) = &args.test_data {
        let test = load_dataset(test_path)?.data;
        let replayed = output.transcript.replay(&test, &family)?;
        let test_base = PredictorPair::from_dataset(&test);
        summary["test"] = json!({
            "n": test.len(),
            "before": snapshot(&test, &family, &test_base),
            "after": snapshot(&test, &family, &replayed),
            "max_disagreement_mass": max_disagreement(&test, &family, config.alpha, &replayed),
        });
    }
    sink.record("summary", &summary);
    sink.finish()?;

    if let Some(path) = &args.out_transcript {
        output.transcript.save(path)?;
    }
    if let Some(path) = &args.out_data {
        write_dataset(File::create(path)?, &data, state.tables(), Some(&family))?;
    }
    writeln!(out, "{}", serde_json::to_string(&summary)?)?;
    Ok(match output.status {
        RunStatus::Converged => EXIT_OK,
        RunStatus::Truncated => EXIT_TRUNCATED,
    })
}

/// `[predictor][loss]` change in decision loss from `base` to `state`.
fn loss_change(data: &EmpiricalDataset, family: &LossFamily, base: &PredictorPair, state: &PredictorPair) -> Value {
    let rows: Vec<Vec<f64>> = Predictor::BOTH
        .iter()
        .map(|&p| {
            family
                .iter()
                .map(|l| decision_loss(data, l, state.table(p)) - decision_loss(data, l, base.table(p)))
                .collect()
        })
        .collect();
    json!(rows)
}

fn replay_cmd(args: &ReplayArgs, out: &mut dyn Write) -> Result<i32> {
    let (data, family) = load_inputs(&args.input)?;
    let tr = Transcript::load(&args.transcript)?;
    let state = tr.replay(&data, &family)?;
    let base = PredictorPair::from_dataset(&data);
    if let Some(path) = &args.out_data {
        write_dataset(File::create(path)?, &data, state.tables(), Some(&family))?;
    }
    let summary = json!({
        "command": "replay",
        "steps": tr.steps.len(),
        "transcript_digest": tr.digest(),
        "before": snapshot(&data, &family, &base),
        "after": snapshot(&data, &family, &state),
        "max_disagreement_mass": max_disagreement(&data, &family, tr.config.alpha, &state),
    });
    writeln!(out, "{}", serde_json::to_string(&summary)?)?;
    Ok(EXIT_OK)
}

fn audit_cmd(args: &AuditArgs, out: &mut dyn Write) -> Result<i32> {
    let (data, family) = load_inputs(&args.input)?;
    let config = RunConfig::new(args.alpha, args.eta)
        .with_beta(args.beta)
        .with_grid(GridResolution::Exact)
        .resolve(&data, &family)?;
    let state = PredictorPair::from_dataset(&data);
    let report = audit(&state, &data, &family, &config);
    writeln!(out, "{}", serde_json::to_string(&report)?)?;
    let pass = match args.check {
        AuditCheck::Disagreement => report.disagreement_ok,
        AuditCheck::Calibration => report.calibration_ok,
        AuditCheck::All => report.disagreement_ok && report.calibration_ok,
    };
    Ok(if pass { EXIT_OK } else { EXIT_AUDIT })
}

fn gen_cmd(cmd: GenCommand, out: &mut dyn Write) -> Result<i32> {
    let (data, family, path) = match cmd {
        GenCommand::ReconcileCx { phi, out } => {
            let (d, f) = gen_reconcile_counterexample(phi)?;
            (d, f, out)
        }
        GenCommand::DecalCx { eta, beta, labels, out } => {
            let realization = match labels {
                LabelArg::Fractional => LabelRealization::Fractional,
                LabelArg::Bernoulli => LabelRealization::Bernoulli,
            };
            let (d, f) = gen_decal_counterexample(eta, beta, realization)?;
            (d, f, out)
        }
        GenCommand::Random { n, d, k, loss_count, noise, seed, out } => {
            let (data, f) = gen_random_instance(&RandomInstanceSpec { n, d, k, loss_count, noise, seed })?;
            (data, f, out)
        }
    };
    let tables = [data.predictions(Predictor::First), data.predictions(Predictor::Second)];
    match path {
        Some(p) => write_dataset(File::create(p)?, &data, tables, Some(&family))?,
        None => write_dataset(&mut *out, &data, tables, Some(&family))?,
    }
    Ok(EXIT_OK)
}

fn bound_cmd(args: &BoundArgs, out: &mut dyn Write) -> Result<i32> {
    let mut input = BoundInputs {
        d: args.d,
        k: args.k,
        loss_count: args.loss_count,
        alpha: args.alpha,
        eta: args.eta,
        beta: args.beta,
        m: 0,
        n: args.n,
        delta: args.delta,
        brier_1: args.b1,
        brier_2: args.b2,
    };
    if !(args.alpha > 0.0 && args.eta > 0.0 && args.beta > 0.0 && args.delta > 0.0 && args.delta < 1.0) {
        return Err(Error::config("alpha, eta, beta must be positive and delta in (0, 1)"));
    }
    let grid = grid_iteration_bound(&input);
    input.m = args.m.unwrap_or(grid.min_resolution);
    let t_max = args.t_max.unwrap_or(grid.max_steps);
    let ln_s = transcript_space_log(&input, t_max);
    match args.which {
        WhichBound::Exact => writeln!(out, "{}", exact_iteration_bound(&input))?,
        WhichBound::Grid => writeln!(out, "{}", serde_json::to_string(&grid)?)?,
        WhichBound::Space => writeln!(out, "{ln_s}")?,
        WhichBound::Deviation => writeln!(out, "{}", serde_json::to_string(&deviation_bounds(&input, ln_s))?)?,
        WhichBound::Baseline => writeln!(out, "{}", baseline_iteration_bound(&input))?,
        WhichBound::All => {
            let all = json!({
                "inputs": input,
                "exact_iteration_bound": exact_iteration_bound(&input),
                "grid": grid,
                "t_max": t_max,
                "transcript_space_log": ln_s,
                "deviation": deviation_bounds(&input, ln_s),
                "baseline_iteration_bound": baseline_iteration_bound(&input),
            });
            writeln!(out, "{}", serde_json::to_string(&all)?)?;
        }
    }
    Ok(EXIT_OK)
}
