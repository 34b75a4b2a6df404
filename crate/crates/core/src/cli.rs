//! Command-line front end.
//!
//! Exit codes: 0 success / no alarm, 1 usage, I/O or validation error,
//! 2 tamper alarm raised by `detect`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::dataset::{Dataset, Role, NUM_FEATURES};
use crate::error::{Error, Result};
use crate::network::Topology;
use crate::persist::Model;
use crate::sentinel::{
    compare_scenarios, evaluate_scenario, render_report, Scenario, ScenarioReport,
    DEFAULT_THRESHOLD_PERCENT,
};
use crate::tamper::{inject, AttackMode, AttackSpec, CycleWindow};
use crate::trainer::{predict_series, predictions_to_csv, train_model, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ALARM: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "soc-sentinel",
    version,
    about = "Battery SOC prediction and tamper detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a network on a labeled cycle log and write the model file.
    Train(TrainArgs),
    /// Predict SOC for every cycle in a log.
    Predict(PredictArgs),
    /// Write a tampered copy of a test log.
    Attack(AttackArgs),
    /// Score a labeled log against the model; exits 2 when the alarm fires.
    Detect(DetectArgs),
    /// Build a summary table and plot data from saved scenario reports.
    Report(ReportArgs),
}

#[derive(Debug, clap::Args)]
struct TrainArgs {
    /// Training cycle log (CSV).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    /// Maximum number of epochs.
    #[arg(long, default_value_t = 50_000)]
    epochs: usize,
    /// Stop when training RMS (percent of the normalized SOC range) reaches this.
    #[arg(long = "target-rms", default_value_t = 10.0)]
    target_rms: f64,
    /// Hidden layer sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "7")]
    hidden: Vec<usize>,
    /// Present patterns in a seeded random order instead of cycle order.
    #[arg(long)]
    shuffle: bool,
    /// Output model file.
    #[arg(long)]
    model: PathBuf,
    /// Output RMS history (epoch,rms_percent). Defaults to <model>.rms.csv.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output CSV (cycle_number,predicted_soc).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Case1,
    Case2,
}

#[derive(Debug, clap::Args)]
struct AttackArgs {
    /// case1 replaces whole records, case2 only the SOC labels.
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    victim: PathBuf,
    #[arg(long)]
    source: PathBuf,
    /// Inclusive cycle range A..B.
    #[arg(long, default_value = "1..35")]
    window: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, clap::Args)]
struct DetectArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Number of leading cycles to score. Defaults to every labeled cycle.
    #[arg(long)]
    window: Option<usize>,
    /// Alarm when MAPE (percent) is strictly above this.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_PERCENT)]
    threshold: f64,
    /// Label recorded in the report; does not affect the verdict.
    #[arg(long, default_value = "normal")]
    scenario: String,
    /// Write the scenario report (JSON) here.
    #[arg(long = "report-out")]
    report_out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct ReportArgs {
    /// Scenario report of the untampered run.
    #[arg(long)]
    normal: PathBuf,
    /// Scenario reports of attacked runs.
    #[arg(long, num_args = 1..)]
    attacked: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Train(a) => run_train(a),
        Command::Predict(a) => run_predict(a),
        Command::Attack(a) => run_attack(a),
        Command::Detect(a) => run_detect(a),
        Command::Report(a) => run_report(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn battery_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unknown".into())
}

fn run_train(a: TrainArgs) -> Result<i32> {
    let data = Dataset::load(&a.data, &battery_id(&a.data), Role::Training)?;
    let topology = Topology::new(NUM_FEATURES, a.hidden, 1)?;
    let cfg = TrainConfig {
        learning_rate: a.lr,
        momentum: a.momentum,
        max_epochs: a.epochs,
        target_rms_percent: a.target_rms,
        seed: a.seed,
        shuffle: a.shuffle,
    };
    let (model, report) = train_model(&data, topology, &cfg)?;
    model.save(&a.model)?;
    let report_path = a.report.unwrap_or_else(|| {
        let mut name = a.model.clone().into_os_string();
        name.push(".rms.csv");
        PathBuf::from(name)
    });
    report.save(&report_path)?;
    println!(
        "epochs={} rms_percent={:.4} converged={} model={} report={}",
        report.epochs_run,
        report.final_rms_percent,
        report.converged,
        a.model.display(),
        report_path.display()
    );
    Ok(EXIT_OK)
}

fn run_predict(a: PredictArgs) -> Result<i32> {
    let model = Model::load(&a.model)?;
    let data = Dataset::load(&a.data, &battery_id(&a.data), Role::Testing)?;
    let predictions = predict_series(&model.network, &data, &model.normalizer)?;
    fs::write(&a.out, predictions_to_csv(&predictions)).map_err(|e| Error::io(&a.out, e))?;
    println!("predictions={} out={}", predictions.len(), a.out.display());
    Ok(EXIT_OK)
}

fn run_attack(a: AttackArgs) -> Result<i32> {
    let window: CycleWindow = a.window.parse()?;
    let mode = match a.mode {
        ModeArg::Case1 => AttackMode::Case1FullSubstitution,
        ModeArg::Case2 => AttackMode::Case2LabelSubstitution,
    };
    let victim = Dataset::load(&a.victim, &battery_id(&a.victim), Role::Testing)?;
    let source = Dataset::load(&a.source, &battery_id(&a.source), Role::AttackSource)?;
    let tampered = inject(&victim, &AttackSpec::new(mode, window, source)?)?;
    tampered.save(&a.out)?;
    println!("mode={mode} window={window} out={}", a.out.display());
    Ok(EXIT_OK)
}

fn run_detect(a: DetectArgs) -> Result<i32> {
    let scenario: Scenario = a.scenario.parse()?;
    let model = Model::load(&a.model)?;
    let data = Dataset::load(&a.data, &battery_id(&a.data), Role::Testing)?;
    let window = a.window.unwrap_or_else(|| {
        data.records()
            .iter()
            .take_while(|r| r.soc_percent.is_some())
            .count()
    });
    let report = evaluate_scenario(
        &model.network,
        &model.normalizer,
        &data,
        scenario,
        window,
        a.threshold,
    )?;
    if let Some(path) = &a.report_out {
        report.save(path)?;
    }
    println!(
        "scenario={} window={} mape_percent={:.4} threshold_percent={} alarm={}",
        report.scenario,
        report.window_cycles,
        report.mape_percent,
        report.threshold_percent,
        report.alarm
    );
    Ok(if report.alarm { EXIT_ALARM } else { EXIT_OK })
}

fn run_report(a: ReportArgs) -> Result<i32> {
    let normal = ScenarioReport::load(&a.normal)?;
    let mut reports = vec![normal.clone()];
    for path in &a.attacked {
        reports.push(compare_scenarios(&normal, &ScenarioReport::load(path)?)?);
    }
    for path in render_report(&reports, &a.out)? {
        println!("{}", path.display());
    }
    Ok(EXIT_OK)
}
