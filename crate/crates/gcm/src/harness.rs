//! Experiment orchestration: build a prior from training data, fit one
//! classifier per learning mode on identical inputs, march them through the
//! test trials in order, and collect per-trial metrics.
//!
//! Everything is driven by one experiment seed: the synthetic data streams,
//! and the half-normal concentration draws, each on their own derived
//! substream. Two runs of the same config are byte-identical.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bayes::{ClassPosteriorState, DirichletParams, GaussWishartParams};
use crate::classifier::{GcmClassifier, LearningMode};
use crate::data::TrialDataset;
use crate::error::{Error, Result};
use crate::io::dataset::read_trial_csv_file;
use crate::io::scenario::scenario_from_json;
use crate::math::substream_seed;
use crate::sim::DriftScenario;

/// Substream tag for concentration-parameter draws.
const ALPHA_STREAM_TAG: u64 = 0x61_6c70_6861; // "alpha"

/// Seed for the concentration-prior draw, derived from a run seed. Every
/// entry point that builds a prior from a single user-facing seed (config
/// files, presets, the command line) goes through this so the same run seed
/// always produces the same prior.
pub fn derived_alpha_seed(rng_seed: u64) -> u64 {
    substream_seed(rng_seed, &[ALPHA_STREAM_TAG])
}

/// Default seed for preset experiments. The crossing-benchmark golden report
/// checked into the test suite was produced with this value; change it and
/// the goldens need regenerating.
pub const DEFAULT_SEED: u64 = 380;

/// Seed of the frozen reference run for the mild-drift benchmark. Pinned
/// separately from [`DEFAULT_SEED`] because each benchmark's reference run
/// was selected on its own scenario.
pub const MILD_REFERENCE_SEED: u64 = 185;

/// Mean accuracies previously reported for this model family on a private
/// six-motion, four-channel EMG task (2 training + 18 test trials).
/// Documentation only: that dataset is not redistributable, so nothing in
/// this repository asserts these numbers.
pub mod reference {
    /// Confidence-gated self-training.
    pub const SEMI_SUPERVISED_MEAN_ACCURACY: f64 = 0.934;
    /// Sequential updates with true labels.
    pub const FULLY_SUPERVISED_MEAN_ACCURACY: f64 = 0.955;
    /// No sequential updates after initial training.
    pub const FROZEN_MEAN_ACCURACY: f64 = 0.889;
}

/// Where the Wishart scale `W` comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum WSource {
    /// `W` = pooled empirical covariance of the training features (the
    /// default reading of "covariance matrix based on the training data").
    TrainingCovariance,
    /// `W` = (pooled covariance)^-1 / nu, so the expected precision
    /// `E[Lambda] = nu W` equals the empirical precision (the alternative
    /// reading; exposed but not default).
    TrainingPrecision,
    Identity,
    Explicit(DMatrix<f64>),
}

/// How the Dirichlet concentration is initialized.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaInit {
    /// `alpha_c = |z_c|`, `z_c ~ N(0, 1)`, drawn from the given seed.
    HalfNormal { seed: u64 },
    /// All concentrations set to one positive value.
    Uniform { value: f64 },
}

/// Prior hyperparameter recipe; [`build_prior`] turns it into a state.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorConfig {
    /// Prior mean; `None` means the zero vector.
    pub m: Option<DVector<f64>>,
    pub beta: f64,
    /// Degrees of freedom are `nu = D + nu_offset`.
    pub nu_offset: f64,
    pub w_source: WSource,
    pub alpha_init: AlphaInit,
}

impl PriorConfig {
    /// The standard recipe: zero mean, `beta = 1`, `nu = D + 1`, `W` from the
    /// pooled training covariance, half-normal concentrations.
    pub fn standard(alpha_seed: u64) -> Self {
        Self {
            m: None,
            beta: 1.0,
            nu_offset: 1.0,
            w_source: WSource::TrainingCovariance,
            alpha_init: AlphaInit::HalfNormal { seed: alpha_seed },
        }
    }
}

/// Pooled (population, denominator `N`) covariance of all features.
fn pooled_covariance(train: &TrialDataset) -> DMatrix<f64> {
    let dim = train.dim();
    let n = train.len() as f64;
    let mut mean = DVector::zeros(dim);
    for x in train.features() {
        mean += x.values();
    }
    mean /= n;
    let mut cov = DMatrix::zeros(dim, dim);
    for x in train.features() {
        let d = x.values() - &mean;
        cov.ger(1.0 / n, &d, &d, 1.0);
    }
    cov
}

/// Cholesky with one automatic ridge retry (`epsilon = 1e-8 * trace / D`).
fn cholesky_with_ridge(mut m: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(chol) = Cholesky::new(m.clone()) {
        return Ok(chol);
    }
    let dim = m.nrows();
    let ridge = 1e-8 * m.trace() / dim as f64;
    for i in 0..dim {
        m[(i, i)] += ridge;
    }
    Cholesky::new(m).ok_or_else(|| {
        Error::numerical(format!(
            "{what} is singular even after adding ridge {ridge:.3e} to its diagonal; \
             check for constant or duplicated feature columns"
        ))
    })
}

/// Builds the per-class-identical prior state from a recipe and the training
/// trial(s). `train` supplies the dimension and, when requested, the pooled
/// covariance.
pub fn build_prior(
    config: &PriorConfig,
    train: &TrialDataset,
    num_classes: usize,
) -> Result<ClassPosteriorState> {
    if num_classes == 0 {
        return Err(Error::config("experiment needs at least one class"));
    }
    let dim = train.dim();
    let m = match &config.m {
        Some(m) => {
            if m.len() != dim {
                return Err(Error::dimension(format!(
                    "prior mean has length {} but features have dimension {dim}",
                    m.len()
                )));
            }
            m.clone()
        }
        None => DVector::zeros(dim),
    };
    let nu = dim as f64 + config.nu_offset;

    let w_inv = match &config.w_source {
        WSource::Identity => DMatrix::identity(dim, dim),
        WSource::Explicit(w) => {
            if w.nrows() != dim || w.ncols() != dim {
                return Err(Error::dimension(format!(
                    "explicit W is {}x{}, expected {dim}x{dim}",
                    w.nrows(),
                    w.ncols()
                )));
            }
            Cholesky::new(w.clone())
                .ok_or_else(|| Error::numerical("explicit W is not positive definite"))?
                .inverse()
        }
        WSource::TrainingCovariance => {
            cholesky_with_ridge(pooled_covariance(train), "pooled training covariance")?.inverse()
        }
        WSource::TrainingPrecision => {
            let mut cov = pooled_covariance(train);
            // Validate definiteness the same way, then scale: W^-1 = nu * cov.
            cholesky_with_ridge(cov.clone(), "pooled training covariance")?;
            cov *= nu;
            cov
        }
    };

    let alpha = match &config.alpha_init {
        AlphaInit::HalfNormal { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            DVector::from_fn(num_classes, |_, _| loop {
                let z: f64 = StandardNormal.sample(&mut rng);
                if z != 0.0 {
                    break z.abs();
                }
            })
        }
        AlphaInit::Uniform { value } => DVector::from_element(num_classes, *value),
    };

    let block = GaussWishartParams::new(m, config.beta, nu, w_inv)?;
    ClassPosteriorState::symmetric(num_classes, block, DirichletParams::new(alpha)?)
}

/// Resolved inputs for one experiment: labeled training trials and ordered
/// test trials, all sharing one feature dimension.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub train: Vec<TrialDataset>,
    pub test: Vec<TrialDataset>,
    pub num_classes: usize,
}

impl ExperimentData {
    pub fn validate(&self) -> Result<()> {
        if self.train.is_empty() {
            return Err(Error::config("experiment has no training trials"));
        }
        if self.test.is_empty() {
            return Err(Error::config("experiment has no test trials"));
        }
        if self.num_classes == 0 {
            return Err(Error::config("experiment needs at least one class"));
        }
        let dim = self.train[0].dim();
        for t in self.train.iter().chain(&self.test) {
            if t.dim() != dim {
                return Err(Error::dimension(format!(
                    "trial {} has dimension {} but the experiment uses {dim}",
                    t.trial_id(),
                    t.dim()
                )));
            }
        }
        for t in &self.train {
            if !t.is_labeled() {
                return Err(Error::missing_label(format!(
                    "training trial {} has no labels",
                    t.trial_id()
                )));
            }
        }
        Ok(())
    }

    /// All training pairs concatenated in trial order.
    pub fn training_pairs(
        &self,
    ) -> Result<Vec<(crate::data::FeatureVector, crate::data::ClassLabel)>> {
        let mut pairs = Vec::new();
        for t in &self.train {
            pairs.extend(t.to_labeled_vec()?);
        }
        Ok(pairs)
    }
}

/// Metrics for one (mode, trial) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub mode: String,
    pub trial: u32,
    /// `None` when the trial carried no true labels.
    pub accuracy: Option<f64>,
    pub n_gated_in: usize,
    pub n_gated_out: usize,
    pub mean_conf: f64,
}

/// Per-trial metrics for every requested mode, in execution order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub rows: Vec<TrialRow>,
}

impl ExperimentReport {
    /// Mode tokens in order of first appearance.
    pub fn modes(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut modes = Vec::new();
        for row in &self.rows {
            if seen.insert(row.mode.clone()) {
                modes.push(row.mode.clone());
            }
        }
        modes
    }

    pub fn mode_rows<'a>(&'a self, mode: &'a str) -> impl Iterator<Item = &'a TrialRow> {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    /// Mean accuracy across a mode's labeled trials; `None` if no trial had
    /// labels.
    pub fn mode_mean_accuracy(&self, mode: &str) -> Option<f64> {
        let accs: Vec<f64> = self.mode_rows(mode).filter_map(|r| r.accuracy).collect();
        if accs.is_empty() {
            None
        } else {
            Some(accs.iter().sum::<f64>() / accs.len() as f64)
        }
    }

    /// Writes `mode,trial,accuracy,n_gated_in,n_gated_out,mean_conf` rows.
    /// Missing accuracies become empty fields.
    pub fn write_csv(&self, mut writer: impl Write) -> Result<()> {
        writeln!(
            writer,
            "mode,trial,accuracy,n_gated_in,n_gated_out,mean_conf"
        )?;
        for r in &self.rows {
            let acc = r.accuracy.map(|a| format!("{a}")).unwrap_or_default();
            writeln!(
                writer,
                "{},{},{},{},{},{}",
                r.mode, r.trial, acc, r.n_gated_in, r.n_gated_out, r.mean_conf
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::parse(e.to_string()))
    }

    /// Parses a report CSV produced by [`Self::write_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(format!("report header: {e}")))?;
        let expected = [
            "mode",
            "trial",
            "accuracy",
            "n_gated_in",
            "n_gated_out",
            "mean_conf",
        ];
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(Error::parse(format!(
                "report header {got:?} does not match {expected:?}"
            )));
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::parse(format!("row {}: {e}", i + 1)))?;
            if record.len() != expected.len() {
                return Err(Error::parse(format!(
                    "row {}: has {} fields, expected {}",
                    i + 1,
                    record.len(),
                    expected.len()
                )));
            }
            let parse_usize = |field: &str, name: &str| -> Result<usize> {
                field
                    .parse()
                    .map_err(|_| Error::parse(format!("row {}: bad {name}: {field:?}", i + 1)))
            };
            let accuracy = if record[2].is_empty() {
                None
            } else {
                Some(record[2].parse::<f64>().map_err(|_| {
                    Error::parse(format!("row {}: bad accuracy: {:?}", i + 1, &record[2]))
                })?)
            };
            rows.push(TrialRow {
                mode: record[0].to_string(),
                trial: record[1]
                    .parse()
                    .map_err(|_| Error::parse(format!("row {}: bad trial id", i + 1)))?,
                accuracy,
                n_gated_in: parse_usize(&record[3], "n_gated_in")?,
                n_gated_out: parse_usize(&record[4], "n_gated_out")?,
                mean_conf: record[5].parse::<f64>().map_err(|_| {
                    Error::parse(format!("row {}: bad mean_conf: {:?}", i + 1, &record[5]))
                })?,
            });
        }
        Ok(Self { rows })
    }
}

/// Per-mode aggregate of one or more reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub modes: Vec<ModeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: String,
    /// Mean over reports of each report's per-trial mean accuracy; `None`
    /// when no labeled trials existed anywhere.
    pub mean_accuracy: Option<f64>,
    /// Number of (report, trial) cells contributing to this mode.
    pub trials: usize,
}

/// Averages reports per mode: each report contributes its own trial-mean, and
/// the summary takes the mean of those (reports weigh equally regardless of
/// trial counts).
pub fn summarize(reports: &[ExperimentReport]) -> Summary {
    let mut modes: Vec<String> = Vec::new();
    for r in reports {
        for m in r.modes() {
            if !modes.contains(&m) {
                modes.push(m);
            }
        }
    }
    let mode_summaries = modes
        .into_iter()
        .map(|mode| {
            let means: Vec<f64> = reports
                .iter()
                .filter_map(|r| r.mode_mean_accuracy(&mode))
                .collect();
            let trials = reports.iter().map(|r| r.mode_rows(&mode).count()).sum();
            ModeSummary {
                mean_accuracy: if means.is_empty() {
                    None
                } else {
                    Some(means.iter().sum::<f64>() / means.len() as f64)
                },
                mode,
                trials,
            }
        })
        .collect();
    Summary {
        schema_version: 1,
        modes: mode_summaries,
    }
}

/// Runs every requested mode over identical data from an identical prior.
///
/// Modes never share mutable state: each gets its own classifier fitted from
/// the same prior on the same training pairs, then processes the test trials
/// in the given order.
pub fn run_experiment(
    data: &ExperimentData,
    prior: &ClassPosteriorState,
    modes: &[LearningMode],
) -> Result<ExperimentReport> {
    data.validate()?;
    if modes.is_empty() {
        return Err(Error::config("experiment requests no learning modes"));
    }
    let pairs = data.training_pairs()?;
    let mut rows = Vec::with_capacity(modes.len() * data.test.len());
    for mode in modes {
        let mut clf = GcmClassifier::fit_initial(&pairs, prior, *mode)?;
        for trial in &data.test {
            let (next, outcome) = clf.process_trial(trial)?;
            rows.push(TrialRow {
                mode: mode.token().to_string(),
                trial: trial.trial_id(),
                accuracy: outcome.accuracy,
                n_gated_in: outcome.n_gated_in,
                n_gated_out: outcome.n_gated_out,
                mean_conf: outcome.mean_confidence(),
            });
            clf = next;
        }
    }
    Ok(ExperimentReport { rows })
}

// ---------------------------------------------------------------------------
// Config file schema
// ---------------------------------------------------------------------------

/// Data source for an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSourceConfig {
    /// A bundled scenario by name (see [`resolve_preset`]).
    Preset { name: String },
    /// A scenario JSON file on disk.
    ScenarioFile { path: String },
    /// A directory of `trial_<t>.csv` files.
    CsvDir { path: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WSourceConfig {
    #[default]
    TrainingCovariance,
    TrainingPrecision,
    Identity,
    Explicit {
        w_row_major: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaConfig {
    /// Half-normal draws; the seed derives from the experiment seed unless
    /// pinned here.
    HalfNormal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Uniform {
        value: f64,
    },
}

impl Default for AlphaConfig {
    fn default() -> Self {
        Self::HalfNormal { seed: None }
    }
}

fn default_beta() -> f64 {
    1.0
}

fn default_nu_offset() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfigSchema {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<f64>>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_nu_offset")]
    pub nu_offset: f64,
    #[serde(default)]
    pub w_source: WSourceConfig,
    #[serde(default)]
    pub alpha: AlphaConfig,
}

impl Default for PriorConfigSchema {
    fn default() -> Self {
        Self {
            m: None,
            beta: default_beta(),
            nu_offset: default_nu_offset(),
            w_source: WSourceConfig::default(),
            alpha: AlphaConfig::default(),
        }
    }
}

fn default_theta() -> f64 {
    0.9
}

fn default_modes() -> Vec<String> {
    vec!["frozen".into(), "ss".into(), "fs".into()]
}

/// On-disk experiment configuration (`schema_version` 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub source: DataSourceConfig,
    pub train_trials: Vec<u32>,
    pub test_trials: Vec<u32>,
    #[serde(default = "default_modes")]
    pub modes: Vec<String>,
    #[serde(default = "default_theta")]
    pub theta_th: f64,
    pub rng_seed: u64,
    #[serde(default)]
    pub prior: PriorConfigSchema,
    /// Required for CSV sources; scenarios know their own class count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_classes: Option<usize>,
}

impl ExperimentConfig {
    /// A ready-to-run config for a bundled scenario.
    pub fn preset(name: &str, rng_seed: u64) -> Result<Self> {
        let scenario = resolve_preset(name, rng_seed)?;
        Ok(Self {
            schema_version: 1,
            source: DataSourceConfig::Preset {
                name: name.to_string(),
            },
            train_trials: vec![1],
            test_trials: (2..=scenario.trials()).collect(),
            modes: default_modes(),
            theta_th: default_theta(),
            rng_seed,
            prior: PriorConfigSchema::default(),
            num_classes: None,
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(json)
            .map_err(|e| Error::parse(format!("experiment config: {e}")))?;
        if config.schema_version != 1 {
            return Err(Error::parse(format!(
                "unsupported schema_version {} (expected 1)",
                config.schema_version
            )));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_trials.is_empty() {
            return Err(Error::config("train_trials must not be empty"));
        }
        if self.test_trials.is_empty() {
            return Err(Error::config("test_trials must not be empty"));
        }
        if !self.test_trials.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::config("test_trials must be strictly increasing"));
        }
        let train: BTreeSet<u32> = self.train_trials.iter().copied().collect();
        if self.test_trials.iter().any(|t| train.contains(t)) {
            return Err(Error::config("train and test trials must be disjoint"));
        }
        if self.modes.is_empty() {
            return Err(Error::config("modes must not be empty"));
        }
        for m in &self.modes {
            m.parse::<LearningMode>()?;
        }
        LearningMode::semi_supervised(self.theta_th)?;
        if let DataSourceConfig::CsvDir { .. } = self.source {
            if self.num_classes.is_none() {
                return Err(Error::config(
                    "num_classes is required when the source is a CSV directory",
                ));
            }
        }
        Ok(())
    }

    /// The learning modes with `theta_th` substituted into `ss`.
    pub fn learning_modes(&self) -> Result<Vec<LearningMode>> {
        self.modes
            .iter()
            .map(|m| match m.parse::<LearningMode>()? {
                LearningMode::SemiSupervised { .. } => LearningMode::semi_supervised(self.theta_th),
                other => Ok(other),
            })
            .collect()
    }

    /// Materializes the prior recipe, deriving the concentration seed from
    /// the experiment seed when the config leaves it open.
    pub fn prior_config(&self) -> Result<PriorConfig> {
        let m = self.prior.m.as_ref().map(|v| DVector::from_column_slice(v));
        let w_source = match &self.prior.w_source {
            WSourceConfig::TrainingCovariance => WSource::TrainingCovariance,
            WSourceConfig::TrainingPrecision => WSource::TrainingPrecision,
            WSourceConfig::Identity => WSource::Identity,
            WSourceConfig::Explicit { w_row_major } => {
                let dim = (w_row_major.len() as f64).sqrt() as usize;
                if dim * dim != w_row_major.len() || dim == 0 {
                    return Err(Error::config(format!(
                        "explicit W has {} entries, which is not a positive square",
                        w_row_major.len()
                    )));
                }
                WSource::Explicit(DMatrix::from_row_slice(dim, dim, w_row_major))
            }
        };
        let alpha_init = match &self.prior.alpha {
            AlphaConfig::HalfNormal { seed } => AlphaInit::HalfNormal {
                seed: seed.unwrap_or_else(|| derived_alpha_seed(self.rng_seed)),
            },
            AlphaConfig::Uniform { value } => AlphaInit::Uniform { value: *value },
        };
        Ok(PriorConfig {
            m,
            beta: self.prior.beta,
            nu_offset: self.prior.nu_offset,
            w_source,
            alpha_init,
        })
    }

    /// Loads or generates the train/test trials. `base_dir` anchors relative
    /// paths in the config.
    pub fn resolve_data(&self, base_dir: &Path) -> Result<ExperimentData> {
        self.validate()?;
        match &self.source {
            DataSourceConfig::Preset { name } => {
                let scenario = resolve_preset(name, self.rng_seed)?;
                self.data_from_scenario(&scenario)
            }
            DataSourceConfig::ScenarioFile { path } => {
                let text = std::fs::read_to_string(base_dir.join(path))?;
                // The experiment seed governs generation so that one config
                // fully determines the data.
                let scenario = scenario_from_json(&text)?.with_seed(self.rng_seed);
                self.data_from_scenario(&scenario)
            }
            DataSourceConfig::CsvDir { path } => {
                let dir = base_dir.join(path);
                let load = |ids: &[u32]| -> Result<Vec<TrialDataset>> {
                    ids.iter()
                        .map(|t| read_trial_csv_file(&dir.join(format!("trial_{t}.csv")), *t))
                        .collect()
                };
                Ok(ExperimentData {
                    train: load(&self.train_trials)?,
                    test: load(&self.test_trials)?,
                    num_classes: self.num_classes.expect("validated above"),
                })
            }
        }
    }

    fn data_from_scenario(&self, scenario: &DriftScenario) -> Result<ExperimentData> {
        let gen = |ids: &[u32]| -> Result<Vec<TrialDataset>> {
            ids.iter().map(|t| scenario.generate_trial(*t)).collect()
        };
        Ok(ExperimentData {
            train: gen(&self.train_trials)?,
            test: gen(&self.test_trials)?,
            num_classes: scenario.num_classes(),
        })
    }

    /// End-to-end: resolve data, build the prior, run every mode.
    pub fn run(&self, base_dir: &Path) -> Result<ExperimentReport> {
        let data = self.resolve_data(base_dir)?;
        let train_all = concat_trials(&data.train)?;
        let prior = build_prior(&self.prior_config()?, &train_all, data.num_classes)?;
        run_experiment(&data, &prior, &self.learning_modes()?)
    }
}

/// Merges several labeled trials into one dataset (id taken from the first).
pub fn concat_trials(trials: &[TrialDataset]) -> Result<TrialDataset> {
    if trials.is_empty() {
        return Err(Error::config("no trials to concatenate"));
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for t in trials {
        features.extend_from_slice(t.features());
        match t.labels() {
            Some(l) => labels.extend_from_slice(l),
            None => {
                return Err(Error::missing_label(format!(
                    "trial {} has no labels",
                    t.trial_id()
                )))
            }
        }
    }
    TrialDataset::new(trials[0].trial_id(), features, Some(labels))
}

/// Maps a preset name to its scenario, seeded with the experiment seed.
pub fn resolve_preset(name: &str, rng_seed: u64) -> Result<DriftScenario> {
    match name {
        // "paper" is the historical alias for the crossing benchmark.
        "crossing" | "paper" => Ok(DriftScenario::crossing_preset(rng_seed)),
        "mild" => Ok(DriftScenario::mild_preset(rng_seed)),
        other => Err(Error::config(format!(
            "unknown preset {other:?}; expected crossing, mild, or paper"
        ))),
    }
}

/// Writes per-mode `trial,accuracy` CSVs (one file per mode) under `dir`.
/// Files appear atomically: content goes to a temp name first, then renames
/// over the target.
pub fn write_plotdata(report: &ExperimentReport, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for mode in report.modes() {
        let path = dir.join(format!("accuracy_{mode}.csv"));
        let mut buf = String::from("trial,accuracy\n");
        for row in report.mode_rows(&mode) {
            if let Some(acc) = row.accuracy {
                buf.push_str(&format!("{},{}\n", row.trial, acc));
            }
        }
        let tmp = dir.join(format!(".accuracy_{mode}.csv.tmp"));
        std::fs::write(&tmp, buf)?;
        std::fs::rename(&tmp, &path)?;
        written.push(path);
    }
    Ok(written)
}
