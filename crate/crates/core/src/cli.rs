//! Command-line harness: `gen`, `single`, `multi`, `adversarial`, `classify`
//! and `sweep`.
//!
//! Exit codes: 0 success, 1 failed check or runtime error, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use crate::classifier::{evaluate, explain_sample, fit, ConceptBank, EmbeddingDataset, Metrics, TrainConfig};
use crate::error::{Error, Result};
use crate::estimator::loss_closed_form;
use crate::generative::{
    adversarial_eps_max, adversarial_floor, build_adversarial_dictionary, perturb_dictionary,
    sample_batch, sample_code_on_support, synthesize_sample, theta_for_chord, GenerativeParams,
    Sample,
};
use crate::io::{
    fmt_f64, read_concepts_csv, read_embeddings_csv, read_matrix_csv, read_samples_csv,
    write_concepts_csv, write_embeddings_csv, write_matrix_csv, write_samples_csv, write_table,
    write_trajectory_csv,
};
use crate::linalg::{random_orthonormal, Dictionary};
use crate::optimizer::{run_multi_sample, run_single_sample, Mode, RefinementConfig, Trajectory};
use crate::plot::{emit_svg, PlotOptions, Series};
use crate::rng::Seed;
use crate::selection::SupportSet;
use crate::synthetic::{classification_benchmark, BenchmarkSpec};

#[derive(Debug, Parser)]
#[command(name = "ccr", version, about = "Constrained concept refinement experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic instance (D*, D^init, samples) or a classification task.
    #[command(args_override_self = true)]
    Gen(GenArgs),
    /// Single-sample refinement trajectory.
    #[command(args_override_self = true)]
    Single(SingleArgs),
    /// Multi-sample refinement trajectory.
    #[command(args_override_self = true)]
    Multi(MultiArgs),
    /// Check the adversarial lower bound over a grid of deviations.
    #[command(args_override_self = true)]
    Adversarial(AdversarialArgs),
    /// Train and evaluate the concept classifier.
    #[command(args_override_self = true)]
    Classify(ClassifyArgs),
    /// Classifier metrics over a grid of thresholds and radii.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// key=value file; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fail when a convergence precondition does not hold.
    #[arg(long)]
    pub strict: bool,
    /// Also write SVG charts.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "gamma-max", alias = "Gamma")]
    pub gamma_max: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Random signs on nonzero code entries.
    #[arg(long, value_enum, default_value = "on")]
    pub signs: Toggle,
}

struct ModelDefaults {
    n: usize,
    rho: f64,
}

struct Model {
    params: GenerativeParams,
    rho: f64,
}

impl ModelArgs {
    fn resolve(&self, def: ModelDefaults) -> Result<Model> {
        let params = GenerativeParams::new(
            self.d.unwrap_or(10),
            self.n.unwrap_or(def.n),
            self.k.unwrap_or(5),
            self.gamma.unwrap_or(0.5),
            self.gamma_max.unwrap_or(1.0),
        )?
        .with_signs(self.signs == Toggle::On);
        let rho = self.rho.unwrap_or(def.rho);
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::NegativeRadius(rho));
        }
        Ok(Model { params, rho })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// dstar.csv, dinit.csv and samples.csv.
    Theory,
    /// concepts.csv, train.csv and test.csv.
    Classify,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long, value_enum, default_value = "theory")]
    pub kind: GenKind,
}

#[derive(Debug, Clone, Args)]
pub struct SingleArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1e-2)]
    pub eta: f64,
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// Directory written by `gen` to load instead of sampling.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MultiArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 5000)]
    pub m: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 600)]
    pub iters: usize,
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AdversarialArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    /// Number of ground-truth columns; defaults to k.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long = "gamma-max", alias = "Gamma", default_value_t = 1.0)]
    pub gamma_max: f64,
    /// Explicit deviations; overrides the grid.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Evenly spaced admissible deviations.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, value_enum, default_value = "on")]
    pub signs: Toggle,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub concepts: PathBuf,
    #[arg(long)]
    pub train: PathBuf,
    /// Defaults to the training file.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long = "eta-d", default_value_t = 0.05)]
    pub eta_d: f64,
    #[arg(long = "eta-l", default_value_t = 20.0)]
    pub eta_l: f64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub batch: usize,
    /// Dispersion factor r (1 disables).
    #[arg(long, default_value_t = 1.0)]
    pub disperse: f64,
    /// Keep input rows as given instead of scaling them to unit norm.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.2)]
    pub rho: f64,
    /// Test-set row to explain into explain.csv.
    #[arg(long)]
    pub explain: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.2")]
    pub rho: Vec<f64>,
}

/// Parses `argv` (program name first), applies `--config`, runs, and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match inject_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_)
        | Error::NegativeRadius(_)
        | Error::DimensionMismatch { .. }
        | Error::CannotOrthonormalize { .. } => 2,
        _ => 1,
    }
}

/// Expands `--config F` into flags placed right after the subcommand, so any
/// explicit flag later on the line wins.
fn inject_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate().skip(2) {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut flags = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(&path, format!("line {}: expected key=value", no + 1)));
        };
        let (key, value) = (key.trim().trim_start_matches("--"), value.trim());
        match key {
            "strict" | "plot" | "no-normalize" | "no_normalize" => match value {
                "true" | "on" | "1" | "yes" => flags.push(OsString::from(format!("--{}", key.replace('_', "-")))),
                "false" | "off" | "0" | "no" => {}
                _ => return Err(Error::parse(&path, format!("line {}: {key} expects a boolean", no + 1))),
            },
            "config" => {}
            _ => {
                flags.push(OsString::from(format!("--{}", key.replace('_', "-"))));
                flags.push(OsString::from(value));
            }
        }
    }
    let mut out: Vec<OsString> = argv[..2].to_vec();
    out.extend(flags);
    out.extend(argv[2..].iter().cloned());
    Ok(out)
}

fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Single(a) => cmd_single(a),
        Command::Multi(a) => cmd_multi(a),
        Command::Adversarial(a) => cmd_adversarial(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn ensure_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// `(D*, D^init, samples)` drawn from streams 0, 1 and 2 of `seed`.
pub fn sample_instance(p: &GenerativeParams, rho: f64, m: usize, seed: Seed) -> Result<(Dictionary, Dictionary, Vec<Sample>)> {
    if m == 0 {
        return Err(Error::InvalidParams("m must be >= 1".into()));
    }
    let dstar = random_orthonormal(p.d, p.n, seed.derive(0))?;
    let dinit = perturb_dictionary(&dstar, rho, seed.derive(1))?;
    let samples = sample_batch(&dstar, p, m, seed.derive(2))?;
    Ok((dstar, dinit, samples))
}

fn load_instance(dir: &Path, k: usize) -> Result<(Dictionary, Dictionary, Vec<Sample>)> {
    let dstar = Dictionary::new(read_matrix_csv(&dir.join("dstar.csv"))?)?;
    let dinit = Dictionary::new(read_matrix_csv(&dir.join("dinit.csv"))?)?;
    let samples = read_samples_csv(&dir.join("samples.csv"), dstar.n_atoms())?;
    if let Some(s) = samples.iter().find(|s| s.support.len() != k) {
        warn!("sample support size {} differs from k={k}", s.support.len());
    }
    Ok((dstar, dinit, samples))
}

fn cmd_gen(a: &GenArgs) -> Result<i32> {
    ensure_out(&a.common.out)?;
    let seed = Seed(a.common.seed);
    match a.kind {
        GenKind::Theory => {
            let model = a.model.resolve(ModelDefaults { n: 8, rho: 0.2 })?;
            let (dstar, dinit, samples) = sample_instance(&model.params, model.rho, a.m, seed)?;
            write_matrix_csv(&a.common.out.join("dstar.csv"), dstar.matrix())?;
            write_matrix_csv(&a.common.out.join("dinit.csv"), dinit.matrix())?;
            write_samples_csv(&a.common.out.join("samples.csv"), &samples)?;
            println!("wrote instance d={} n={} m={} to {}", model.params.d, model.params.n, a.m, a.common.out.display());
        }
        GenKind::Classify => {
            let spec = BenchmarkSpec { n_train: a.m, n_test: a.m, ..BenchmarkSpec::default() };
            let b = classification_benchmark(&spec, seed)?;
            write_concepts_csv(&a.common.out.join("concepts.csv"), &b.bank.names, b.bank.dict.matrix())?;
            write_embeddings_csv(&a.common.out.join("train.csv"), &b.train)?;
            write_embeddings_csv(&a.common.out.join("test.csv"), &b.test)?;
            println!("wrote classification task ({} train, {} test) to {}", a.m, a.m, a.common.out.display());
        }
    }
    Ok(0)
}

fn trajectory_outputs(traj: &Trajectory, common: &Common, title: &str) -> Result<()> {
    write_trajectory_csv(&common.out.join("trajectory.csv"), &traj.records)?;
    if common.plot {
        let pick = |f: fn(&crate::optimizer::StepRecord) -> f64| -> Vec<(f64, f64)> {
            traj.records.iter().map(|r| (r.iter as f64, f(r))).collect()
        };
        let series = [
            Series::new("loss", pick(|r| r.loss)),
            Series::new("dev_all", pick(|r| r.dev_all)),
            Series::new("dev_active", pick(|r| r.dev_active)),
        ];
        let opts = PlotOptions { title: title.into(), x_label: "iteration".into(), y_label: "value".into(), log_y: true };
        emit_svg(&series, &opts, &common.out.join("trajectory.svg"))?;
    }
    let last = traj.records.last().expect("trajectory has iteration 0");
    println!(
        "iterations={} final loss={} dev_all={} dev_active={}",
        last.iter,
        fmt_f64(last.loss),
        fmt_f64(last.dev_all),
        fmt_f64(last.dev_active)
    );
    Ok(())
}

fn cmd_single(a: &SingleArgs) -> Result<i32> {
    let model = a.model.resolve(ModelDefaults { n: 8, rho: 0.2 })?;
    let p = model.params;
    let (dstar, dinit, samples) = match &a.input {
        Some(dir) => load_instance(dir, p.k)?,
        None => sample_instance(&p, model.rho, 1, Seed(a.common.seed))?,
    };
    let cfg = RefinementConfig::new(a.eta, model.rho, a.iters, p.k, Mode::Single)?
        .strict(a.common.strict)
        .with_model(p);
    let traj = run_single_sample(&dstar, &dinit, &samples[0], &cfg)?;
    ensure_out(&a.common.out)?;
    trajectory_outputs(&traj, &a.common, "single-sample refinement")?;
    Ok(0)
}

fn cmd_multi(a: &MultiArgs) -> Result<i32> {
    let model = a.model.resolve(ModelDefaults { n: 10, rho: 0.027 })?;
    let p = model.params;
    let (dstar, dinit, samples) = match &a.input {
        Some(dir) => load_instance(dir, p.k)?,
        None => sample_instance(&p, model.rho, a.m, Seed(a.common.seed))?,
    };
    let cfg = RefinementConfig::new(a.eta, model.rho, a.iters, p.k, Mode::Multi)?
        .strict(a.common.strict)
        .with_model(p);
    let traj = run_multi_sample(&dstar, &dinit, &samples, &cfg)?;
    ensure_out(&a.common.out)?;
    trajectory_outputs(&traj, &a.common, "multi-sample refinement")?;
    Ok(0)
}

fn cmd_adversarial(a: &AdversarialArgs) -> Result<i32> {
    let n = a.n.unwrap_or(a.k);
    let p = GenerativeParams::new(a.d, n, a.k, a.gamma, a.gamma_max)?.with_signs(a.signs == Toggle::On);
    let eps_max = adversarial_eps_max(a.gamma, a.gamma_max);
    let grid: Vec<f64> = match &a.eps {
        Some(v) => v.clone(),
        None => (1..=a.grid).map(|j| eps_max * j as f64 / (a.grid + 1) as f64).collect(),
    };
    let seed = Seed(a.common.seed);
    let dstar = random_orthonormal(a.d, n, seed.derive(0))?;
    let support = SupportSet::prefix(a.k);
    let mut rows = Vec::new();
    let mut failures = 0usize;
    for (gi, &eps) in grid.iter().enumerate() {
        let admissible = eps == 0.0 || (eps > 0.0 && eps < eps_max && theta_for_chord(eps).tan() < a.gamma / a.gamma_max);
        if !admissible {
            warn!("eps={eps} outside (0, {eps_max:.6}); skipped");
            rows.push(vec![fmt_f64(eps), String::new(), String::new(), String::new(), String::new(), "skipped".into()]);
            continue;
        }
        let theta = theta_for_chord(eps);
        let dtilde = build_adversarial_dictionary(&dstar, a.k, theta)?;
        let floor = adversarial_floor(a.k, eps, a.gamma);
        for t in 0..a.trials {
            let code = sample_code_on_support(&p, &support, seed.derive(1).derive(gi as u64).derive(t as u64))?;
            let s = synthesize_sample(&dstar, &code)?;
            let loss = loss_closed_form(&dtilde, &dstar, &s.x, &support)?.value;
            let pass = loss >= floor;
            if !pass {
                failures += 1;
            }
            rows.push(vec![
                fmt_f64(eps),
                fmt_f64(theta),
                t.to_string(),
                fmt_f64(loss),
                fmt_f64(floor),
                if pass { "pass" } else { "fail" }.into(),
            ]);
        }
    }
    ensure_out(&a.common.out)?;
    write_table(
        &a.common.out.join("adversarial.csv"),
        &["eps", "theta", "trial", "loss", "floor", "status"],
        &rows,
    )?;
    println!("adversarial rows={} failures={failures}", rows.len());
    Ok(if failures == 0 { 0 } else { 1 })
}

struct Loaded {
    bank: ConceptBank,
    train: EmbeddingDataset,
    test: EmbeddingDataset,
}

fn load_task(t: &TrainArgs) -> Result<Loaded> {
    let bank = read_concepts_csv(&t.concepts)?;
    let train = read_embeddings_csv(&t.train, !t.no_normalize)?;
    let test = read_embeddings_csv(t.test.as_ref().unwrap_or(&t.train), !t.no_normalize)?;
    Ok(Loaded { bank, train, test })
}

fn train_config(t: &TrainArgs, lambda: f64, rho: f64, seed: u64) -> TrainConfig {
    TrainConfig {
        eta_d: t.eta_d,
        eta_l: t.eta_l,
        rho,
        lambda,
        epochs: t.epochs,
        batch: t.batch,
        dispersion_r: t.disperse,
        seed: Seed(seed),
    }
}

fn metric_cells(m: &Metrics) -> Vec<String> {
    vec![fmt_f64(m.accuracy), fmt_f64(m.ael), fmt_f64(m.asr), fmt_f64(m.aced)]
}

fn cmd_classify(a: &ClassifyArgs) -> Result<i32> {
    let task = load_task(&a.train)?;
    let cfg = train_config(&a.train, a.lambda, a.rho, a.common.seed);
    let fitted = fit(&task.bank, &task.train, &cfg)?;
    let test = evaluate(&fitted.bank, &fitted.head, &task.test, a.lambda)?;
    ensure_out(&a.common.out)?;
    let out = &a.common.out;

    let epoch_rows: Vec<Vec<String>> = fitted
        .epochs
        .iter()
        .map(|e| {
            let mut row = vec![e.epoch.to_string(), fmt_f64(e.metrics.loss)];
            row.extend(metric_cells(&e.metrics));
            row
        })
        .collect();
    write_table(&out.join("epochs.csv"), &["epoch", "loss", "accuracy", "ael", "asr", "aced"], &epoch_rows)?;
    let train_metrics = fitted.epochs.last().map(|e| e.metrics);
    let mut rows = Vec::new();
    if let Some(m) = train_metrics {
        rows.push(std::iter::once("train".to_string()).chain(metric_cells(&m)).collect());
    }
    rows.push(std::iter::once("test".to_string()).chain(metric_cells(&test)).collect());
    write_table(&out.join("metrics.csv"), &["split", "accuracy", "ael", "asr", "aced"], &rows)?;
    write_concepts_csv(&out.join("concepts_refined.csv"), &fitted.bank.names, fitted.bank.dict.matrix())?;

    if let Some(idx) = a.explain {
        if idx >= task.test.len() {
            return Err(Error::InvalidParams(format!("--explain {idx} exceeds {} test rows", task.test.len())));
        }
        let top = a.top.min(fitted.bank.n_concepts());
        let e = explain_sample(&fitted.bank, &fitted.head, &task.test.sample(idx), a.lambda, top)?;
        let rows: Vec<Vec<String>> = e
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| vec![(r + 1).to_string(), row.concept.clone(), fmt_f64(row.score), fmt_f64(row.weight)])
            .collect();
        write_table(&out.join("explain.csv"), &["rank", "concept", "score", "weight"], &rows)?;
        info!("sample {idx} predicted class {}", e.predicted);
    }
    if a.common.plot {
        let pts = |f: fn(&Metrics) -> f64| fitted.epochs.iter().map(|e| (e.epoch as f64, f(&e.metrics))).collect();
        let series = [Series::new("train loss", pts(|m| m.loss)), Series::new("train accuracy", pts(|m| m.accuracy))];
        let opts = PlotOptions { title: "classifier training".into(), x_label: "epoch".into(), y_label: "value".into(), log_y: false };
        emit_svg(&series, &opts, &out.join("epochs.svg"))?;
    }
    println!(
        "test accuracy={:.4} ael={:.3} asr={:.4} aced={:.5}",
        test.accuracy, test.ael, test.asr, test.aced
    );
    Ok(0)
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    if a.lambda.is_empty() || a.rho.is_empty() {
        return Err(Error::InvalidParams("empty sweep grid".into()));
    }
    let task = load_task(&a.train)?;
    let mut rows = Vec::new();
    let mut ael_curve = Vec::new();
    for &rho in &a.rho {
        for &lambda in &a.lambda {
            let cfg = train_config(&a.train, lambda, rho, a.common.seed);
            let fitted = fit(&task.bank, &task.train, &cfg)?;
            let m = evaluate(&fitted.bank, &fitted.head, &task.test, lambda)?;
            let mut row = vec![fmt_f64(lambda), fmt_f64(rho)];
            row.extend(metric_cells(&m));
            rows.push(row);
            if rho == a.rho[0] {
                ael_curve.push((lambda, m.ael));
            }
        }
    }
    ensure_out(&a.common.out)?;
    write_table(&a.common.out.join("sweep.csv"), &["lambda", "rho", "accuracy", "ael", "asr", "aced"], &rows)?;
    if a.common.plot {
        let opts = PlotOptions { title: "explanation length".into(), x_label: "lambda".into(), y_label: "AEL".into(), log_y: false };
        emit_svg(&[Series::new("AEL", ael_curve)], &opts, &a.common.out.join("sweep.svg"))?;
    }
    println!("sweep points={}", rows.len());
    Ok(0)
}
