//! Confidence-gated Bayesian classification for drifting Gaussian data.
//!
//! The model keeps a Gauss–Wishart posterior per class plus Dirichlet mixing
//! weights, predicts through closed-form Student-t marginals, and can keep
//! adapting after deployment by feeding its own high-confidence predictions
//! back in as pseudo-labels. The crate bundles:
//!
//! - [`bayes`]: conjugate updates and predictive densities,
//! - [`classifier`]: the trial loop with frozen / self-training / supervised
//!   update policies,
//! - [`features`]: rectify + low-pass + time-average feature extraction for
//!   multichannel recordings,
//! - [`sim`]: a synthetic generator with per-trial class drift,
//! - [`harness`]: prior construction and multi-mode experiment runs,
//! - [`io`]: JSON/CSV formats with exact float round-tripping.

pub mod bayes;
pub mod classifier;
pub mod data;
pub mod error;
pub mod features;
pub mod harness;
pub mod io;
pub mod math;
pub mod sim;

// Re-exported so downstream code and tests use the same linear algebra types.
pub use nalgebra;

pub use bayes::{
    accumulate_stats, update_posterior, ClassPosteriorState, DirichletParams, GaussWishartParams,
    Predictor, SufficientStats,
};
pub use classifier::{GcmClassifier, LearningMode, Prediction, TrialOutcome};
pub use data::{ClassLabel, FeatureVector, TrialDataset};
pub use error::{Error, Result};
pub use features::{
    butterworth2_lowpass, extract_features, filter_forward, rectify, trim_transient, FilterCoeffs,
    RawRecording,
};
pub use harness::{
    build_prior, concat_trials, derived_alpha_seed, resolve_preset, run_experiment, summarize,
    write_plotdata, AlphaInit, ExperimentConfig, ExperimentData, ExperimentReport, ModeSummary,
    PriorConfig, Summary, TrialRow, WSource, DEFAULT_SEED, MILD_REFERENCE_SEED,
};
pub use sim::DriftScenario;
