//! `gcm` command line.
//!
//! Ties the library into a reproducible pipeline: `simulate` writes drifting
//! trial data, `features` turns raw recordings into feature CSVs, `train`
//! fits and checkpoints a classifier, `run` compares learning modes on a
//! scenario, and `report` renders a report CSV into plot-ready files.
//!
//! Exit codes: 0 on success, 2 for usage/config/parse problems, 3 when a
//! numerical operation fails. Diagnostics go to stderr; stdout stays silent
//! unless `--stdout` is given. Output files are written to a temp name and
//! renamed into place, so a crash never leaves a half-written file.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gcm::io::{
    checkpoint_to_json, read_recording_files, read_trial_csv_file, scenario_from_json,
    scenario_to_json, trial_csv_to_string,
};
use gcm::{
    build_prior, concat_trials, derived_alpha_seed, extract_features, resolve_preset, summarize,
    write_plotdata, ClassLabel, DriftScenario, Error, ExperimentConfig, ExperimentReport,
    FeatureVector, GcmClassifier, LearningMode, PriorConfig, Result, Summary, TrialDataset,
    DEFAULT_SEED,
};

#[derive(Parser)]
#[command(
    name = "gcm",
    version,
    about = "Adaptive Gaussian classification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate per-trial CSVs and a manifest from a drift scenario.
    Simulate(SimulateArgs),
    /// Turn a raw multichannel recording into a feature trial CSV.
    Features(FeaturesArgs),
    /// Fit an initial posterior from labeled trials and save a checkpoint.
    Train(TrainArgs),
    /// Run a multi-mode experiment; writes report.csv and summary.json.
    Run(RunArgs),
    /// Render a report CSV into per-mode plot data and a summary.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario JSON file, or preset:<crossing|mild|paper>.
    #[arg(long)]
    scenario: String,
    /// Output directory for trial_<t>.csv files and scenario.json.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario's RNG seed (presets default to the library's
    /// reference seed).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FeaturesArgs {
    /// Recording CSV with ch1..chD sample columns.
    #[arg(long = "in")]
    input: PathBuf,
    /// JSON sidecar with sample_rate_hz, trial_id, optional motion_label.
    #[arg(long)]
    meta: PathBuf,
    /// Output feature CSV.
    #[arg(long, required_unless_present = "stdout")]
    out: Option<PathBuf>,
    /// Low-pass cutoff in Hz (must stay below the Nyquist frequency).
    #[arg(long = "cutoff-hz", default_value_t = 1.0)]
    cutoff_hz: f64,
    /// Leading fraction of samples dropped after filtering.
    #[arg(long, default_value_t = 0.10)]
    trim: f64,
    /// Write the feature CSV to stdout instead of (or as well as) --out.
    #[arg(long)]
    stdout: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory containing trial_<t>.csv files.
    #[arg(long)]
    data: PathBuf,
    /// Trial ids to train on (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "1")]
    trials: Vec<u32>,
    /// Number of classes in the model.
    #[arg(long = "num-classes")]
    num_classes: usize,
    /// Update policy stored in the checkpoint: frozen, ss, or fs.
    #[arg(long, default_value = "ss")]
    mode: String,
    /// Confidence threshold used when --mode ss.
    #[arg(long, default_value_t = 0.9)]
    theta: f64,
    /// Seed for the randomized concentration prior.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output checkpoint JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config JSON. Relative data paths inside the config resolve
    /// against the config file's directory.
    #[arg(long, conflicts_with_all = ["preset", "modes", "theta", "seed"])]
    config: Option<PathBuf>,
    /// Bundled scenario name: crossing, mild, or paper.
    #[arg(long, required_unless_present = "config")]
    preset: Option<String>,
    /// Learning modes to compare (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "frozen,ss,fs")]
    modes: Vec<String>,
    /// Confidence threshold substituted into the ss mode.
    #[arg(long, default_value_t = 0.9)]
    theta: f64,
    /// Experiment RNG seed for preset runs.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output directory for report.csv and summary.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Experiment report CSV, as produced by `gcm run`.
    #[arg(long)]
    report: PathBuf,
    /// Output directory for accuracy_<mode>.csv files and summary.json.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Numerical(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Features(args) => features(args),
        Command::Train(args) => train(args),
        Command::Run(args) => run(args),
        Command::Report(args) => report(args),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let scenario = resolve_scenario(&args.scenario, args.seed)?;
    let trials = scenario.generate_all()?;
    fs::create_dir_all(&args.out)?;
    for trial in &trials {
        let path = args.out.join(format!("trial_{}.csv", trial.trial_id()));
        write_atomic(&path, trial_csv_to_string(trial)?.as_bytes())?;
    }
    write_atomic(
        &args.out.join("scenario.json"),
        scenario_to_json(&scenario)?.as_bytes(),
    )?;
    eprintln!(
        "wrote {} trial files and scenario.json to {}",
        trials.len(),
        args.out.display()
    );
    Ok(())
}

fn features(args: FeaturesArgs) -> Result<()> {
    let recording = read_recording_files(&args.input, &args.meta)?;
    let dataset = extract_features(&recording, args.cutoff_hz, args.trim)?;
    let text = trial_csv_to_string(&dataset)?;
    if args.stdout {
        std::io::stdout().write_all(text.as_bytes())?;
    }
    if let Some(out) = &args.out {
        write_atomic(out, text.as_bytes())?;
        eprintln!("wrote {} feature rows to {}", dataset.len(), out.display());
    }
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let mode = mode_with_theta(&args.mode, args.theta)?;
    let trials = args
        .trials
        .iter()
        .map(|&t| read_trial_csv_file(&args.data.join(format!("trial_{t}.csv")), t))
        .collect::<Result<Vec<_>>>()?;
    let train_all = concat_trials(&trials)?;
    let prior = build_prior(
        &PriorConfig::standard(derived_alpha_seed(args.seed)),
        &train_all,
        args.num_classes,
    )?;
    let pairs = labeled_pairs(&train_all)?;
    let clf = GcmClassifier::fit_initial(&pairs, &prior, mode)?;
    write_atomic(&args.out, checkpoint_to_json(&clf)?.as_bytes())?;
    eprintln!(
        "trained on {} samples across {} trial(s); checkpoint at {}",
        pairs.len(),
        trials.len(),
        args.out.display()
    );
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let (config, base_dir) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let config = ExperimentConfig::from_json(&text)?;
            let base = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            (config, base)
        }
        None => {
            let name = args
                .preset
                .as_deref()
                .expect("clap requires --preset when --config is absent");
            let mut config = ExperimentConfig::preset(name, args.seed)?;
            config.modes = args.modes.clone();
            config.theta_th = args.theta;
            config.validate()?;
            (config, PathBuf::from("."))
        }
    };
    let report = config.run(&base_dir)?;
    fs::create_dir_all(&args.out)?;
    write_atomic(
        &args.out.join("report.csv"),
        report.to_csv_string()?.as_bytes(),
    )?;
    let summary = summarize(std::slice::from_ref(&report));
    write_atomic(
        &args.out.join("summary.json"),
        summary_json(&summary)?.as_bytes(),
    )?;
    eprintln!(
        "wrote report.csv and summary.json to {}",
        args.out.display()
    );
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.report)
        .map_err(|e| Error::Parse(format!("{}: {e}", args.report.display())))?;
    let report = ExperimentReport::from_csv(&text)?;
    fs::create_dir_all(&args.out)?;
    let written = write_plotdata(&report, &args.out)?;
    let summary = summarize(std::slice::from_ref(&report));
    write_atomic(
        &args.out.join("summary.json"),
        summary_json(&summary)?.as_bytes(),
    )?;
    eprintln!(
        "wrote {} plot files and summary.json to {}",
        written.len(),
        args.out.display()
    );
    Ok(())
}

/// Resolves `preset:<name>` or a scenario JSON path; `seed`, when given,
/// overrides whatever seed the scenario carries.
fn resolve_scenario(spec: &str, seed: Option<u64>) -> Result<DriftScenario> {
    if let Some(name) = spec.strip_prefix("preset:") {
        return resolve_preset(name, seed.unwrap_or(DEFAULT_SEED));
    }
    let text = fs::read_to_string(spec).map_err(|e| Error::Parse(format!("{spec}: {e}")))?;
    let scenario = scenario_from_json(&text).map_err(|e| Error::Parse(format!("{spec}: {e}")))?;
    Ok(match seed {
        Some(s) => scenario.with_seed(s),
        None => scenario,
    })
}

fn mode_with_theta(token: &str, theta: f64) -> Result<LearningMode> {
    match token.parse::<LearningMode>()? {
        LearningMode::SemiSupervised { .. } => LearningMode::semi_supervised(theta),
        other => Ok(other),
    }
}

fn labeled_pairs(trial: &TrialDataset) -> Result<Vec<(FeatureVector, ClassLabel)>> {
    let labels = trial
        .labels()
        .ok_or_else(|| Error::MissingLabel("training data has no labels".into()))?;
    Ok(trial
        .features()
        .iter()
        .cloned()
        .zip(labels.iter().copied())
        .collect())
}

fn summary_json(summary: &Summary) -> Result<String> {
    let mut text =
        serde_json::to_string_pretty(summary).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes via a temp file in the destination directory plus an atomic rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
