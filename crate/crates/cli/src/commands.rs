use std::borrow::Cow;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use log::info;
use serde::Serialize;
use wellcond_core::baselines::{condition_number, summarize};
use wellcond_core::{
    first_r_select, generate as generate_matrix, normalize_columns, random_subset_select,
    replay_selection, run_selection, verify_average_bound, verify_envelopes, BudgetParams,
    DenseMatrix, Error, FamilyParams, GeneratorSpec, SelectionReport, SelectorConfig, SpectralPath,
};

use crate::formats::{format_f64, read_matrix, to_csv, to_matrix_market};
use crate::output::{parse_report, report_csv, to_json};
use crate::{
    BenchArgs, GenerateArgs, MatrixFormat, MatrixSource, ReportFormat, SelectArgs, VerifyArgs,
};

/// Trajectory entries may differ from a replay by at most this much.
const TRAJECTORY_TOL: f64 = 1e-9;
const MAX_CERT_TOL: f64 = 1e-3;

pub enum Outcome {
    Clean,
    Failed,
}

impl Outcome {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Outcome::Clean => ExitCode::SUCCESS,
            Outcome::Failed => ExitCode::from(2),
        }
    }
}

fn load(source: &MatrixSource) -> Result<DenseMatrix> {
    match (&source.input, source.generate) {
        (Some(path), None) => read_matrix(path),
        (None, Some(family)) => {
            let (Some(n), Some(p)) = (source.n, source.p) else {
                bail!("--generate needs --n and --p");
            };
            let seed = source.seed.unwrap_or(0);
            let params = FamilyParams {
                theta: source.theta,
                distinct: source.distinct,
                spike: source.spike,
            };
            let spec = GeneratorSpec::new(family, n, p, seed).with_params(params);
            generate_matrix(&spec).context("cannot generate matrix")
        }
        _ => bail!("exactly one of --input or --generate is required"),
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        bail!(Error::InvalidEpsilon(epsilon));
    }
    Ok(())
}

fn config(source: &MatrixSource, fast_path: bool, cert_tol: f64) -> Result<SelectorConfig> {
    if !(cert_tol > 0.0 && cert_tol <= MAX_CERT_TOL) {
        bail!("--cert-tol must be in (0, {MAX_CERT_TOL:e}], got {cert_tol}");
    }
    Ok(SelectorConfig {
        auto_normalize: source.auto_normalize,
        spectral_path: if fast_path {
            SpectralPath::Secular
        } else {
            SpectralPath::Dense
        },
        cert_tol,
        ..Default::default()
    })
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn select(args: &SelectArgs) -> Result<Outcome> {
    check_epsilon(args.epsilon)?;
    let config = config(&args.source, args.fast_path, args.cert_tol)?;
    let x = load(&args.source)?;
    let start = Instant::now();
    let report = run_selection(&x, args.epsilon, &config).context("selection failed")?;
    info!(
        "selected {} of {} columns in {:.3?}",
        report.selected.len(),
        x.cols(),
        start.elapsed()
    );
    let text = match args.format {
        ReportFormat::Json => to_json(&report)?,
        ReportFormat::Csv => report_csv(&report),
    };
    emit(args.output.as_deref(), &text)?;
    if report.certified {
        Ok(Outcome::Clean)
    } else {
        let worst = report.envelope_checks.iter().find(|c| !c.pass);
        match worst {
            Some(c) => eprintln!(
                "not certified: lambda_{{{},{}}} = {} outside [{}, {}]",
                c.k, c.r, c.lambda, c.lower, c.upper
            ),
            None => eprintln!("not certified: final spectrum outside [1 - eps, 1 + eps]"),
        }
        Ok(Outcome::Failed)
    }
}

/// First disagreement between a stored report and its independent replay.
fn first_mismatch(
    stored: &SelectionReport,
    replay: &SelectionReport,
    x: &DenseMatrix,
) -> Result<Option<String>> {
    if stored.params.budget != replay.params.budget {
        return Ok(Some(format!(
            "budget mismatch: report says R = {}, recomputed R = {}",
            stored.params.budget, replay.params.budget
        )));
    }
    if stored.selected.len() != replay.params.budget {
        return Ok(Some(format!(
            "selection has {} columns, budget is {}",
            stored.selected.len(),
            replay.params.budget
        )));
    }
    if !close(stored.params.delta, replay.params.delta)
        || !close(stored.params.opnorm_sq, replay.params.opnorm_sq)
    {
        return Ok(Some(format!(
            "parameter mismatch: delta {} vs {}, ||X||^2 {} vs {}",
            stored.params.delta,
            replay.params.delta,
            stored.params.opnorm_sq,
            replay.params.opnorm_sq
        )));
    }
    if stored.trajectory.len() != replay.trajectory.len() {
        return Ok(Some(format!(
            "trajectory has {} steps, expected {}",
            stored.trajectory.len(),
            replay.trajectory.len()
        )));
    }
    for (ri, (a, b)) in stored.trajectory.iter().zip(&replay.trajectory).enumerate() {
        if a.len() != b.len() {
            return Ok(Some(format!(
                "trajectory step r = {} has {} values",
                ri + 1,
                a.len()
            )));
        }
        for (ki, (u, v)) in a.iter().zip(b).enumerate() {
            let d = (u - v).abs();
            if d.is_nan() || d > TRAJECTORY_TOL {
                return Ok(Some(format!(
                    "trajectory mismatch at (k, r) = ({}, {}): reported {u}, recomputed {v}",
                    ki + 1,
                    ri + 1
                )));
            }
        }
    }
    if let Some(v) = verify_envelopes(replay).first() {
        return Ok(Some(format!(
            "envelope violation at (k, r) = ({}, {}): lambda = {} outside [{}, {}]",
            v.k, v.r, v.lambda, v.lower, v.upper
        )));
    }
    for s in &replay.scores {
        if s.score > s.mean_score * (1.0 + 1e-12) + 1e-15 {
            return Ok(Some(format!(
                "step {} picked column {} with score {} above the candidate mean {}",
                s.step, s.index, s.score, s.mean_score
            )));
        }
    }
    if let Some(v) = verify_average_bound(replay, x)?.first() {
        return Ok(Some(format!(
            "average-score bound violated at r = {}: score {} > bound {}",
            v.r, v.score, v.bound
        )));
    }
    let eps = replay.params.epsilon;
    let fe = replay.final_extremes;
    if !close(stored.final_extremes.lambda_min, fe.lambda_min)
        || !close(stored.final_extremes.lambda_max, fe.lambda_max)
    {
        return Ok(Some(format!(
            "final extremes mismatch: reported [{}, {}], recomputed [{}, {}]",
            stored.final_extremes.lambda_min,
            stored.final_extremes.lambda_max,
            fe.lambda_min,
            fe.lambda_max
        )));
    }
    if !replay.certified {
        return Ok(Some(format!(
            "final spectrum [{}, {}] not within [{}, {}]",
            fe.lambda_min,
            fe.lambda_max,
            1.0 - eps,
            1.0 + eps
        )));
    }
    if !stored.certified {
        return Ok(Some("report is marked uncertified".into()));
    }
    Ok(None)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TRAJECTORY_TOL * a.abs().max(b.abs()).max(1.0)
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&args.report)
        .with_context(|| format!("cannot read report {}", args.report.display()))?;
    let stored = parse_report(&text)
        .with_context(|| format!("cannot parse report {}", args.report.display()))?;
    let config = config(&args.source, false, args.cert_tol)?;
    let raw = load(&args.source)?;
    let x: Cow<DenseMatrix> = if args.source.auto_normalize {
        Cow::Owned(normalize_columns(&raw)?)
    } else {
        Cow::Borrowed(&raw)
    };

    let p = x.cols();
    if stored.params.p != p {
        eprintln!(
            "mismatch: report is for p = {}, matrix has {p} columns",
            stored.params.p
        );
        return Ok(Outcome::Failed);
    }
    if let Some(j) = stored.selected.iter().find(|&&j| j >= p) {
        eprintln!("mismatch: selected index {j} out of range for {p} columns");
        return Ok(Outcome::Failed);
    }
    let mut seen = vec![false; p];
    for &j in &stored.selected {
        if std::mem::replace(&mut seen[j], true) {
            eprintln!("mismatch: column {j} selected twice");
            return Ok(Outcome::Failed);
        }
    }
    if stored.selected.is_empty() {
        eprintln!("mismatch: empty selection");
        return Ok(Outcome::Failed);
    }

    let replay = replay_selection(&x, stored.params.epsilon, &stored.selected, &config)
        .context("cannot replay selection")?;
    match first_mismatch(&stored, &replay, &x)? {
        Some(msg) => {
            eprintln!("verification failed: {msg}");
            Ok(Outcome::Failed)
        }
        None => {
            println!(
                "verified: {} columns, eigenvalues in [{}, {}]",
                replay.selected.len(),
                replay.final_extremes.lambda_min,
                replay.final_extremes.lambda_max
            );
            Ok(Outcome::Clean)
        }
    }
}

#[derive(Serialize)]
struct BenchRow {
    method: &'static str,
    trials: usize,
    budget: usize,
    delta: f64,
    lambda_min: f64,
    lambda_max: f64,
    condition_number: f64,
    condition_min: f64,
    condition_max: f64,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct BenchReport {
    params: BudgetParams,
    target_condition: f64,
    rows: Vec<BenchRow>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn bench(args: &BenchArgs) -> Result<Outcome> {
    check_epsilon(args.epsilon)?;
    if args.trials == 0 {
        bail!("--trials must be positive");
    }
    let config = config(&args.source, args.fast_path, 1e-8)?;
    let raw = load(&args.source)?;
    let x: Cow<DenseMatrix> = if args.source.auto_normalize {
        Cow::Owned(normalize_columns(&raw)?)
    } else {
        Cow::Borrowed(&raw)
    };

    let start = Instant::now();
    let greedy = run_selection(&x, args.epsilon, &config).context("selection failed")?;
    let greedy_time = start.elapsed().as_secs_f64();
    let r = greedy.params.budget;
    let fe = greedy.final_extremes;
    let greedy_cond = condition_number(fe.lambda_min, fe.lambda_max);

    let seed = args.baseline_seed.or(args.source.seed).unwrap_or(0);
    let start = Instant::now();
    let random = random_subset_select(&x, r, seed, args.trials)?;
    let random_time = start.elapsed().as_secs_f64();
    let summary = summarize(&random).expect("at least one trial");

    let start = Instant::now();
    let first = first_r_select(&x, r)?;
    let first_time = start.elapsed().as_secs_f64();

    let base = |method, trials, lmin, lmax, cond, cmin, cmax, t| BenchRow {
        method,
        trials,
        budget: r,
        delta: greedy.params.delta,
        lambda_min: lmin,
        lambda_max: lmax,
        condition_number: cond,
        condition_min: cmin,
        condition_max: cmax,
        wall_time_s: t,
    };
    let rows = vec![
        base(
            "greedy",
            1,
            fe.lambda_min,
            fe.lambda_max,
            greedy_cond,
            greedy_cond,
            greedy_cond,
            greedy_time,
        ),
        base(
            "uniform_random",
            summary.trials,
            median(random.iter().map(|b| b.lambda_min).collect()),
            median(random.iter().map(|b| b.lambda_max).collect()),
            summary.median,
            summary.min,
            summary.max,
            random_time,
        ),
        base(
            "first_r",
            1,
            first.lambda_min,
            first.lambda_max,
            first.condition_number,
            first.condition_number,
            first.condition_number,
            first_time,
        ),
    ];
    let eps = args.epsilon;
    let report = BenchReport {
        params: greedy.params.clone(),
        target_condition: (1.0 + eps) / (1.0 - eps),
        rows,
    };

    let text = match args.format {
        ReportFormat::Json => to_json(&report)?,
        ReportFormat::Csv => bench_csv(&report),
    };
    emit(args.output.as_deref(), &text)?;
    if greedy.certified {
        Ok(Outcome::Clean)
    } else {
        eprintln!("greedy selection not certified");
        Ok(Outcome::Failed)
    }
}

fn bench_csv(report: &BenchReport) -> String {
    let mut out = String::from(
        "method,trials,budget,delta,lambda_min,lambda_max,condition_number,condition_min,condition_max,wall_time_s\n",
    );
    let num = |v: f64| {
        if v.is_finite() {
            format_f64(v)
        } else {
            "inf".into()
        }
    };
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.method,
            row.trials,
            row.budget,
            num(row.delta),
            num(row.lambda_min),
            num(row.lambda_max),
            num(row.condition_number),
            num(row.condition_min),
            num(row.condition_max),
            num(row.wall_time_s),
        ));
    }
    out
}

pub fn generate(args: &GenerateArgs) -> Result<Outcome> {
    let x = load(&args.source)?;
    let text = match args.format {
        MatrixFormat::Csv => to_csv(&x),
        MatrixFormat::Mtx => to_matrix_market(&x),
    };
    emit(args.output.as_deref(), &text)?;
    Ok(Outcome::Clean)
}
