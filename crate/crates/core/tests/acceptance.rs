//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per check; exits non-zero if any check fails.

use std::process::ExitCode;
use std::str::FromStr;
use std::time::{Duration, Instant};

use dashu_float::ops::SquareRoot;
use dashu_float::DBig;

use redcal::bounds::{deviation_bounds, exact_iteration_bound, grid_iteration_bound, transcript_space_log, BoundInputs};
use redcal::{
    audit, decision_calibrate, disagreement_events, event_mass, gen_decal_counterexample, gen_random_instance,
    gen_reconcile_counterexample, reconcile_baseline, redcal, split_dataset, EmpiricalDataset, GridResolution,
    LabelRealization, LossFamily, Predictor, PredictorPair, RandomInstanceSpec, ResolvedConfig, RunConfig, RunOutput,
    RunStatus, Stage,
};

/// Slack for comparing two independently summed floating-point quantities.
const FLOAT_SLACK: f64 = 1e-12;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, || format!("took {elapsed:?}, budget {budget:?}"))
}

fn max_mass(data: &EmpiricalDataset, family: &LossFamily, alpha: f64, state: &PredictorPair) -> f64 {
    disagreement_events(family, alpha, state)
        .values()
        .map(|m| event_mass(m, data))
        .fold(0.0, f64::max)
}

fn baseline_counterexample() -> Outcome {
    let start = Instant::now();
    let (data, family) = gen_reconcile_counterexample(0.2).map_err(|e| e.to_string())?;
    let loss = family.get(0).unwrap();
    let cfg = RunConfig::new(0.1, 0.25).resolve_baseline(&data).map_err(|e| e.to_string())?;
    let mut state = PredictorPair::from_dataset(&data);
    let before = redcal::decision_loss(&data, loss, state.table(Predictor::First));
    let out = reconcile_baseline(&data, &family, &cfg, &mut state).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status == RunStatus::Converged, || "baseline did not converge".into())?;
    ensure(out.steps() == 1, || format!("{} steps, expected 1", out.steps()))?;
    for row in 0..data.len() {
        let f1 = state.prediction(Predictor::First, row);
        let f2 = state.prediction(Predictor::Second, row);
        ensure(loss.best_response(f1) == loss.best_response(f2), || format!("unit row {row}: actions differ"))?;
        ensure((f1[0] - f2[0]).abs() <= FLOAT_SLACK, || format!("unit row {row}: {f1:?} vs {f2:?}"))?;
    }
    let rise = redcal::decision_loss(&data, loss, state.table(Predictor::First)) - before;
    ensure((rise - 0.5).abs() <= 1e-12, || format!("loss rise {rise}"))?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("1 step, f1 loss +{rise}, {elapsed:?}"))
}

fn redcal_on_baseline_counterexample() -> Outcome {
    let start = Instant::now();
    let (data, family) = gen_reconcile_counterexample(0.2).map_err(|e| e.to_string())?;
    let (alpha, eta, beta) = (0.05, 0.25, 1e-4);
    let cfg = RunConfig::new(alpha, eta).with_beta(beta).resolve(&data, &family).map_err(|e| e.to_string())?;
    let mut state = PredictorPair::from_dataset(&data);
    let out = redcal(&data, &family, &cfg, &mut state).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status == RunStatus::Converged, || "redcal did not converge".into())?;
    let mass = max_mass(&data, &family, alpha, &state);
    ensure(mass < eta, || format!("disagreement mass {mass}"))?;
    let d = data.dim() as f64;
    let k = family.actions() as f64;
    let loss = family.get(0).unwrap();
    for p in Predictor::BOTH {
        let c = state.counters();
        let steps = (c.reconcile[p.index()] + c.calibration[p.index()]) as f64;
        let allowed = steps * beta * d.sqrt() * k;
        let change = redcal::decision_loss(&data, loss, state.table(p)) - redcal::decision_loss(&data, loss, data.predictions(p));
        ensure(change <= allowed + 1e-9, || format!("predictor {}: loss change {change} > {allowed}", p.number()))?;
    }
    let target = out.rounds[0].target;
    let unit1 = data.position(1).unwrap();
    let action = loss.best_response(state.prediction(target, unit1));
    ensure(action == 0, || format!("unit 1 best response {action}"))?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("{} steps, patched f{}, max mass {mass}, {elapsed:?}", out.steps(), target.number()))
}

fn calibrated_yet_disagreeing() -> Outcome {
    let start = Instant::now();
    let (data, family) = gen_decal_counterexample(0.1, 0.4, LabelRealization::Fractional).map_err(|e| e.to_string())?;
    let alpha = 0.05;
    let audit_cfg = RunConfig::new(alpha, 0.1)
        .with_beta(1e-12)
        .with_grid(GridResolution::Exact)
        .resolve(&data, &family)
        .map_err(|e| e.to_string())?;
    let base = PredictorPair::from_dataset(&data);
    let report = audit(&base, &data, &family, &audit_cfg);
    ensure(report.calibration_ok, || format!("max residual norm {}", report.max_residual_norm))?;
    let positive: Vec<f64> = report.disagreement.iter().map(|x| x.mass).filter(|&m| m > 0.0).collect();
    ensure(positive == vec![0.1, 0.1], || format!("disagreement masses {positive:?}"))?;

    let cfg = RunConfig::new(alpha, 0.1).with_beta(1e-3).resolve(&data, &family).map_err(|e| e.to_string())?;
    let mut state = base.clone();
    let out = redcal(&data, &family, &cfg, &mut state).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status == RunStatus::Converged, || "redcal did not converge".into())?;
    let after = audit(&state, &data, &family, &cfg);
    ensure(after.disagreement_ok, || format!("final mass {}", after.max_disagreement_mass))?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "residual {:e}, masses {positive:?} -> {}, {elapsed:?}",
        report.max_residual_norm, after.max_disagreement_mass
    ))
}

/// One seeded random instance, split into calibration and test halves, with
/// the runs every corpus check looks at.
struct CorpusRun {
    spec: RandomInstanceSpec,
    family: LossFamily,
    cal: EmpiricalDataset,
    test: EmpiricalDataset,
    config: ResolvedConfig,
    redcal: (RunOutput, PredictorPair),
    decal: (RunOutput, PredictorPair),
    adaptive: (RunOutput, PredictorPair),
}

const CORPUS_SIZE: u64 = 200;
const CORPUS_ALPHA: f64 = 0.05;
const CORPUS_ETA: f64 = 0.05;
const CORPUS_BETA: f64 = 0.02;

fn corpus_spec(i: u64) -> RandomInstanceSpec {
    RandomInstanceSpec {
        n: 200 + (i as usize * 37) % 301,
        d: 2 + (i % 4) as usize,
        k: 2 + ((i / 4) % 3) as usize,
        loss_count: 1 + ((i / 12) % 3) as usize,
        noise: [0.25, 0.35, 0.45][(i % 3) as usize],
        seed: 1000 + i,
    }
}

fn build_corpus() -> Result<Vec<CorpusRun>, String> {
    (0..CORPUS_SIZE)
        .map(|i| {
            let spec = corpus_spec(i);
            let (data, family) = gen_random_instance(&spec).map_err(|e| e.to_string())?;
            let (cal, test) = split_dataset(&data, 0.5, spec.seed).map_err(|e| e.to_string())?;
            let base = RunConfig::new(CORPUS_ALPHA, CORPUS_ETA).with_beta(CORPUS_BETA).with_seed(spec.seed);
            let config = base.resolve(&cal, &family).map_err(|e| e.to_string())?;
            let run = |cfg: &ResolvedConfig, decal: bool| -> Result<(RunOutput, PredictorPair), String> {
                let mut state = PredictorPair::from_dataset(&cal);
                let out = if decal {
                    decision_calibrate(&cal, &family, cfg, &Predictor::BOTH, &mut state)
                } else {
                    redcal(&cal, &family, cfg, &mut state)
                };
                out.map(|o| (o, state)).map_err(|e| e.to_string())
            };
            let adaptive_cfg = base.with_adaptive_beta(true).resolve(&cal, &family).map_err(|e| e.to_string())?;
            Ok(CorpusRun {
                redcal: run(&config, false)?,
                decal: run(&config, true)?,
                adaptive: run(&adaptive_cfg, false)?,
                spec,
                family,
                cal,
                test,
                config,
            })
        })
        .collect()
}

fn brier_progress(corpus: &[CorpusRun], build_time: Duration) -> Outcome {
    let mut violations = Vec::new();
    let mut reconcile_steps = 0;
    let mut worst_slack = f64::INFINITY;
    for run in corpus {
        let d = run.spec.d as f64;
        let m = run.config.grid_m as f64;
        let floor = CORPUS_ETA * CORPUS_ALPHA * CORPUS_ALPHA / (4.0 * d) - d / (4.0 * m * m);
        for r in run.redcal.0.reports.iter().filter(|r| r.stage == Stage::Reconcile) {
            reconcile_steps += 1;
            let i = r.target.index();
            let drop = r.brier_before[i] - r.brier_after[i];
            worst_slack = worst_slack.min(drop - floor);
            if drop < floor - FLOAT_SLACK {
                violations.push(format!("seed {} step {}: drop {drop} < {floor}", run.spec.seed, r.t));
            }
        }
        let bound = grid_iteration_bound(&BoundInputs {
            d: run.spec.d,
            alpha: CORPUS_ALPHA,
            eta: CORPUS_ETA,
            beta: CORPUS_BETA,
            ..BoundInputs::default()
        });
        for (name, out) in [("redcal", &run.redcal.0), ("decal", &run.decal.0)] {
            if out.steps() > bound.max_steps {
                violations.push(format!("seed {} {name}: {} steps > {}", run.spec.seed, out.steps(), bound.max_steps));
            }
        }
    }
    ensure(violations.is_empty(), || format!("{} violations, first: {}", violations.len(), violations[0]))?;
    ensure(reconcile_steps > 0, || "corpus produced no reconcile steps".into())?;
    within(build_time, Duration::from_secs(60))?;
    Ok(format!(
        "{} instances, {reconcile_steps} reconcile steps, min slack {worst_slack:.3e}, {build_time:?}",
        corpus.len()
    ))
}

fn final_state_audit(corpus: &[CorpusRun]) -> Outcome {
    let mut violations = Vec::new();
    for run in corpus {
        for (name, (out, state), check_residuals) in
            [("redcal", &run.redcal, false), ("decal", &run.decal, true), ("adaptive", &run.adaptive, false)]
        {
            if out.status != RunStatus::Converged {
                violations.push(format!("seed {} {name}: truncated", run.spec.seed));
                continue;
            }
            let report = audit(state, &run.cal, &run.family, &run.config);
            if !check_residuals && !report.disagreement_ok {
                violations.push(format!("seed {} {name}: mass {}", run.spec.seed, report.max_disagreement_mass));
            }
            if check_residuals && !report.calibration_ok {
                violations.push(format!("seed {} {name}: residual {}", run.spec.seed, report.max_residual_norm));
            }
        }
    }
    ensure(violations.is_empty(), || format!("{} violations, first: {}", violations.len(), violations[0]))?;
    Ok(format!("{} instances x 3 runs clean", corpus.len()))
}

/// `max |𝔼[ℓ(y,a')·1_E] − 𝔼[⟨f,ℓ_{a'}⟩·1_E]|` over best-response events `E`
/// and actions `a'`, written out from scratch.
fn loss_estimation_error(data: &EmpiricalDataset, family: &LossFamily, table: &[f64]) -> f64 {
    let d = data.dim();
    let mut worst: f64 = 0.0;
    for loss in family.iter() {
        let rows = loss.rows();
        let dot = |row: &[f64], v: &[f64]| row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let k = rows.len();
        let mut acc = vec![vec![0.0; k]; k];
        for i in 0..data.len() {
            let f = &table[i * d..(i + 1) * d];
            let mut best = 0;
            for a in 1..k {
                if dot(&rows[a], f) < dot(&rows[best], f) {
                    best = a;
                }
            }
            for (b, row) in rows.iter().enumerate() {
                acc[best][b] += data.weight(i) * (dot(row, data.label(i)) - dot(row, f));
            }
        }
        for v in acc.iter().flatten() {
            worst = worst.max(v.abs());
        }
    }
    worst
}

fn loss_estimation(corpus: &[CorpusRun]) -> Outcome {
    let mut violations = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for run in corpus {
        let limit = run.config.beta * (run.spec.d as f64).sqrt();
        let state = &run.decal.1;
        for p in Predictor::BOTH {
            let err = loss_estimation_error(&run.cal, &run.family, state.table(p));
            worst_ratio = worst_ratio.max(err / limit);
            if err > limit {
                violations.push(format!("seed {} f{}: {err} > {limit}", run.spec.seed, p.number()));
            }
        }
    }
    ensure(violations.is_empty(), || format!("{} violations, first: {}", violations.len(), violations[0]))?;
    Ok(format!("worst error / (beta sqrt d) = {worst_ratio:.3}"))
}

fn replay_fidelity(corpus: &[CorpusRun]) -> Outcome {
    let mut mismatches = Vec::new();
    let mut within_bound = 0;
    let mut excess = Vec::new();
    for run in corpus {
        for (name, (out, live)) in [("redcal", &run.redcal), ("decal", &run.decal), ("adaptive", &run.adaptive)] {
            match out.transcript.replay(&run.cal, &run.family) {
                Ok(replayed) if replayed.tables() == live.tables() => {}
                Ok(_) => mismatches.push(format!("seed {} {name}: tables differ", run.spec.seed)),
                Err(e) => mismatches.push(format!("seed {} {name}: {e}", run.spec.seed)),
            }
        }
        let replayed = out_replay(run)?;
        let test_mass = max_mass(&run.test, &run.family, CORPUS_ALPHA, &replayed);
        let grid = grid_iteration_bound(&BoundInputs {
            d: run.spec.d,
            alpha: CORPUS_ALPHA,
            eta: CORPUS_ETA,
            beta: CORPUS_BETA,
            ..BoundInputs::default()
        });
        let inputs = BoundInputs {
            d: run.spec.d,
            k: run.spec.k,
            loss_count: run.spec.loss_count,
            alpha: CORPUS_ALPHA,
            eta: CORPUS_ETA,
            beta: CORPUS_BETA,
            m: run.config.grid_m,
            n: run.test.len(),
            delta: 0.05,
            brier_1: 0.0,
            brier_2: 0.0,
        };
        let mass_dev = deviation_bounds(&inputs, transcript_space_log(&inputs, grid.max_steps)).mass_dev;
        if test_mass <= CORPUS_ETA + mass_dev {
            within_bound += 1;
        }
        excess.push(test_mass - CORPUS_ETA);
    }
    ensure(mismatches.is_empty(), || format!("{} replay mismatches, first: {}", mismatches.len(), mismatches[0]))?;
    let share = within_bound as f64 / corpus.len() as f64;
    ensure(share >= 0.95, || format!("only {:.1}% of test splits within bound", 100.0 * share))?;
    excess.sort_by(f64::total_cmp);
    let p95 = excess[(excess.len() * 95 / 100).min(excess.len() - 1)];
    Ok(format!(
        "{} replays exact, {:.1}% of test splits within bound, 95th pct test mass - eta = {p95:.4}",
        3 * corpus.len(),
        100.0 * share
    ))
}

fn out_replay(run: &CorpusRun) -> Result<PredictorPair, String> {
    run.redcal.0.transcript.replay(&run.test, &run.family).map_err(|e| e.to_string())
}

fn adaptive_rounds(corpus: &[CorpusRun]) -> Outcome {
    let mut adapted = 0;
    let mut violations = Vec::new();
    for run in corpus {
        for round in run.adaptive.0.rounds.iter().filter(|r| r.adapted) {
            adapted += 1;
            let li = round.event.loss;
            let rise = round.loss_after[li] - round.loss_before[li];
            if rise > 1e-9 {
                violations.push(format!(
                    "seed {} K={} round {}: loss {} -> {} (+{rise:.3e})",
                    run.spec.seed, run.spec.k, round.round, round.loss_before[li], round.loss_after[li]
                ));
            }
        }
    }
    ensure(adapted > 0, || "no round had positive delta".into())?;
    ensure(violations.is_empty(), || {
        format!("{} of {adapted} adapted rounds raised loss, first: {}", violations.len(), violations[0])
    })?;
    Ok(format!("{adapted} adapted rounds, none raised the loss"))
}

/// One row of the bound table, with every input as a decimal string so the
/// high-precision side sees the intended real numbers.
struct BoundCase {
    d: usize,
    k: usize,
    loss_count: usize,
    alpha: &'static str,
    eta: &'static str,
    beta: &'static str,
    m: u64,
    n: usize,
    delta: &'static str,
    b1: &'static str,
    b2: &'static str,
    t_max: u64,
}

const BOUND_CASES: [BoundCase; 20] = [
    BoundCase { d: 1, k: 2, loss_count: 1, alpha: "0.1", eta: "0.25", beta: "0.1", m: 10, n: 10000, delta: "0.05", b1: "0.40", b2: "0.36", t_max: 2 },
    BoundCase { d: 1, k: 2, loss_count: 1, alpha: "0.2", eta: "0.25", beta: "0.1", m: 15, n: 1000, delta: "0.05", b1: "0.5", b2: "0.5", t_max: 800 },
    BoundCase { d: 2, k: 2, loss_count: 1, alpha: "0.1", eta: "0.25", beta: "0.01", m: 100, n: 5000, delta: "0.1", b1: "0.40", b2: "0.36", t_max: 10 },
    BoundCase { d: 10, k: 10, loss_count: 1, alpha: "0.001", eta: "0.01", beta: "0.00001", m: 1000, n: 50000, delta: "0.05", b1: "0.3", b2: "0.31", t_max: 100 },
    BoundCase { d: 3, k: 3, loss_count: 2, alpha: "0.05", eta: "0.05", beta: "0.02", m: 254, n: 250, delta: "0.05", b1: "0.41", b2: "0.43", t_max: 40 },
    BoundCase { d: 5, k: 4, loss_count: 3, alpha: "0.05", eta: "0.1", beta: "0.005", m: 500, n: 500, delta: "0.01", b1: "0.9", b2: "1.1", t_max: 1 },
    BoundCase { d: 1, k: 2, loss_count: 1, alpha: "0.3", eta: "0.5", beta: "0.2", m: 1, n: 10, delta: "0.5", b1: "0.1", b2: "0.05", t_max: 0 },
    BoundCase { d: 4, k: 5, loss_count: 7, alpha: "0.02", eta: "0.02", beta: "0.001", m: 2000, n: 100000, delta: "0.001", b1: "1.2", b2: "0.8", t_max: 1000 },
    BoundCase { d: 2, k: 3, loss_count: 1, alpha: "0.5", eta: "0.9", beta: "0.3", m: 3, n: 64, delta: "0.2", b1: "0.7", b2: "0.6", t_max: 5 },
    BoundCase { d: 6, k: 2, loss_count: 2, alpha: "0.01", eta: "0.2", beta: "0.0001", m: 10000, n: 20000, delta: "0.05", b1: "0.25", b2: "0.26", t_max: 50 },
    BoundCase { d: 1, k: 4, loss_count: 4, alpha: "0.125", eta: "0.0625", beta: "0.03125", m: 64, n: 4096, delta: "0.0625", b1: "0.125", b2: "0.375", t_max: 16 },
    BoundCase { d: 8, k: 8, loss_count: 1, alpha: "0.07", eta: "0.03", beta: "0.004", m: 750, n: 12345, delta: "0.05", b1: "0.66", b2: "0.77", t_max: 250 },
    BoundCase { d: 3, k: 2, loss_count: 5, alpha: "0.15", eta: "0.15", beta: "0.15", m: 20, n: 300, delta: "0.05", b1: "0.2", b2: "0.2", t_max: 3 },
    BoundCase { d: 20, k: 6, loss_count: 2, alpha: "0.04", eta: "0.05", beta: "0.0002", m: 3000, n: 1000000, delta: "0.05", b1: "2.5", b2: "3.5", t_max: 10000 },
    BoundCase { d: 1, k: 2, loss_count: 1, alpha: "0.001", eta: "0.001", beta: "0.0001", m: 100000, n: 1000, delta: "0.05", b1: "0.24", b2: "0.25", t_max: 7 },
    BoundCase { d: 2, k: 4, loss_count: 3, alpha: "0.3", eta: "0.05", beta: "0.05", m: 40, n: 800, delta: "0.025", b1: "0.33", b2: "0.34", t_max: 60 },
    BoundCase { d: 7, k: 3, loss_count: 1, alpha: "0.08", eta: "0.12", beta: "0.01", m: 300, n: 7000, delta: "0.05", b1: "0.55", b2: "0.45", t_max: 30 },
    BoundCase { d: 5, k: 10, loss_count: 10, alpha: "0.02", eta: "0.01", beta: "0.0005", m: 4000, n: 250000, delta: "0.01", b1: "0.8", b2: "0.9", t_max: 400 },
    BoundCase { d: 1, k: 3, loss_count: 2, alpha: "0.06", eta: "0.3", beta: "0.09", m: 30, n: 150, delta: "0.1", b1: "0.01", b2: "0.02", t_max: 1 },
    BoundCase { d: 12, k: 2, loss_count: 1, alpha: "0.09", eta: "0.07", beta: "0.003", m: 1200, n: 30000, delta: "0.05", b1: "1.1", b2: "1.3", t_max: 90 },
];

const ORACLE_DIGITS: usize = 60;

fn big(s: &str) -> DBig {
    DBig::from_str(s).expect("decimal literal").with_precision(ORACLE_DIGITS).value()
}

fn big_int(n: u64) -> DBig {
    big(&n.to_string())
}

fn big_ceil(x: &DBig) -> u64 {
    let int = x.ceil().to_int().value();
    u64::try_from(int).expect("bound fits u64")
}

fn rel_err(got: f64, want: &DBig) -> f64 {
    let w = want.to_f64().value();
    if w == 0.0 {
        got.abs()
    } else {
        ((got - w) / w).abs()
    }
}

fn bound_table() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (ci, c) in BOUND_CASES.iter().enumerate() {
        let input = BoundInputs {
            d: c.d,
            k: c.k,
            loss_count: c.loss_count,
            alpha: c.alpha.parse().unwrap(),
            eta: c.eta.parse().unwrap(),
            beta: c.beta.parse().unwrap(),
            m: c.m,
            n: c.n,
            delta: c.delta.parse().unwrap(),
            brier_1: c.b1.parse().unwrap(),
            brier_2: c.b2.parse().unwrap(),
        };
        let (d, k, l) = (big_int(c.d as u64), big_int(c.k as u64), big_int(c.loss_count as u64));
        let (alpha, eta, beta, delta) = (big(c.alpha), big(c.eta), big(c.beta), big(c.delta));
        let two_n = big_int(2 * c.n as u64);

        let exact = big_int(4) * &d * (big(c.b1) + big(c.b2)) / (&alpha * &alpha * &eta);
        let want_exact = big_ceil(&exact);
        let got_exact = exact_iteration_bound(&input);
        if got_exact != want_exact {
            failures.push(format!("case {ci}: exact {got_exact} vs {want_exact}"));
        }

        let beta_sq = &beta * &beta;
        let split = &eta * &alpha * &alpha / (big_int(4) * &d);
        let progress = if beta_sq < split { beta_sq } else { split };
        let want_steps = big_ceil(&(big_int(2) * &d / &progress));
        let want_res = big_ceil(&(&d / (big_int(2) * &progress)).sqrt()).max(1);
        let grid = grid_iteration_bound(&input);
        if grid.max_steps != want_steps || grid.min_resolution != want_res {
            failures.push(format!(
                "case {ci}: grid {}/{} vs {want_steps}/{want_res}",
                grid.max_steps, grid.min_resolution
            ));
        }

        let per_step = big_int(4).ln() + big_int(2) * l.ln() + big_int(3) * k.ln() + &d * big_int(c.m + 1).ln();
        let ln_s = big_int(c.t_max + 1) * per_step;
        let got_ln_s = transcript_space_log(&input, c.t_max);
        let e = rel_err(got_ln_s, &ln_s);
        worst = worst.max(e);
        if e > 1e-10 {
            failures.push(format!("case {ci}: ln S {got_ln_s} rel err {e:e}"));
        }

        let ln_delta = delta.ln();
        let six = big_int(6);
        let brier = (&d * ((&six * &d).ln() + &ln_s - &ln_delta) / &two_n).sqrt();
        let calib = (big_int(3) * &d * ((&six * &d * &k).ln() + &ln_s + l.ln() - &ln_delta) / &two_n).sqrt();
        let mass = (big_int(2) * ((&six * &k).ln() + &ln_s + l.ln() - &ln_delta) / &two_n).sqrt();
        let got = deviation_bounds(&input, got_ln_s);
        for (name, g, w) in [("brier", got.brier_dev, &brier), ("calib", got.calib_dev, &calib), ("mass", got.mass_dev, &mass)] {
            let e = rel_err(g, w);
            worst = worst.max(e);
            if e > 1e-10 {
                failures.push(format!("case {ci}: {name}_dev {g} rel err {e:e}"));
            }
        }
        if ci == 0 && (got_exact != 1216 || (got.mass_dev - 0.048).abs() > 1e-3) {
            failures.push(format!("worked example: exact {got_exact}, mass_dev {}", got.mass_dev));
        }
        if ci == 1 && (grid.max_steps, grid.min_resolution) != (800, 15) {
            failures.push(format!("worked example: grid {}/{}", grid.max_steps, grid.min_resolution));
        }
    }
    ensure(failures.is_empty(), || format!("{} mismatches, first: {}", failures.len(), failures[0]))?;
    Ok(format!("{} cases, worst relative error {worst:.2e}", BOUND_CASES.len()))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, outcome: Outcome| {
        match outcome {
            Ok(detail) => println!("PASS {id} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id} {name}: {detail}");
            }
        }
    };
    report(1, "baseline counterexample", baseline_counterexample());
    report(2, "redcal on baseline counterexample", redcal_on_baseline_counterexample());
    report(3, "calibrated yet disagreeing pair", calibrated_yet_disagreeing());

    let start = Instant::now();
    let corpus = build_corpus();
    let build_time = start.elapsed();
    match corpus {
        Ok(corpus) => {
            report(4, "per-step Brier progress", brier_progress(&corpus, build_time));
            report(5, "final-state audit", final_state_audit(&corpus));
            report(6, "loss estimation on calibrated outputs", loss_estimation(&corpus));
            report(7, "replay fidelity", replay_fidelity(&corpus));
            report(8, "bound calculators", bound_table());
            report(9, "adaptive tolerance rounds", adaptive_rounds(&corpus));
        }
        Err(e) => {
            for (id, name) in [(4, "per-step Brier progress"), (5, "final-state audit"), (6, "loss estimation"), (7, "replay fidelity")] {
                report(id, name, Err(format!("corpus failed: {e}")));
            }
            report(8, "bound calculators", bound_table());
            report(9, "adaptive tolerance rounds", Err(format!("corpus failed: {e}")));
        }
    }

    if failed == 0 {
        println!("acceptance: all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} check(s) failed");
        ExitCode::FAILURE
    }
}
