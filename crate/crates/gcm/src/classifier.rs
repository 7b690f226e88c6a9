//! The adaptive classifier: predict a whole trial from the previous state,
//! then optionally fold the trial back into the posterior.
//!
//! Three update policies share one loop:
//! - `Frozen`: never update (the non-adaptive baseline),
//! - `SemiSupervised`: update with the model's own predictions, but only for
//!   points whose confidence strictly exceeds a threshold,
//! - `FullySupervised`: update with the true labels of every point.
//!
//! Predictions for trial `t` always come from the state at the end of trial
//! `t - 1`; there is no within-trial adaptation.

use std::fmt;
use std::str::FromStr;

use crate::bayes::{update_posterior, ClassPosteriorState, Predictor, SufficientStats};
use crate::data::{ClassLabel, FeatureVector, TrialDataset};
use crate::error::{Error, Result};

/// One classified point: full membership simplex, argmax class, and the
/// winning probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    probs: Vec<f64>,
    predicted_class: ClassLabel,
    confidence: f64,
}

impl Prediction {
    fn from_probs(probs: Vec<f64>) -> Self {
        // Lowest index wins ties, so scan left to right with strict >.
        let mut best = 0;
        for (i, p) in probs.iter().enumerate() {
            if *p > probs[best] {
                best = i;
            }
        }
        let confidence = probs[best];
        Self {
            probs,
            predicted_class: ClassLabel(best),
            confidence,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn predicted_class(&self) -> ClassLabel {
        self.predicted_class
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }
}

/// Update policy applied after each trial's predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningMode {
    Frozen,
    SemiSupervised { theta_th: f64 },
    FullySupervised,
}

impl LearningMode {
    /// Confidence-gated self-training with threshold validation.
    pub fn semi_supervised(theta_th: f64) -> Result<Self> {
        if !theta_th.is_finite() || !(0.0..=1.0).contains(&theta_th) {
            return Err(Error::config(format!(
                "confidence threshold must lie in [0, 1], got {theta_th}"
            )));
        }
        Ok(Self::SemiSupervised { theta_th })
    }

    /// Short stable identifier used in reports, file names, and CLI flags.
    pub fn token(&self) -> &'static str {
        match self {
            Self::Frozen => "frozen",
            Self::SemiSupervised { .. } => "ss",
            Self::FullySupervised => "fs",
        }
    }

    fn validate(&self) -> Result<()> {
        if let Self::SemiSupervised { theta_th } = self {
            Self::semi_supervised(*theta_th)?;
        }
        Ok(())
    }
}

impl fmt::Display for LearningMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Parses a mode token; `ss` takes the default threshold 0.9 so that CLI
/// flags can override it separately.
impl FromStr for LearningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "frozen" => Ok(Self::Frozen),
            "ss" => Ok(Self::SemiSupervised { theta_th: 0.9 }),
            "fs" => Ok(Self::FullySupervised),
            other => Err(Error::config(format!(
                "unknown learning mode {other:?}; expected frozen, ss, or fs"
            ))),
        }
    }
}

/// Everything observed while processing one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub predictions: Vec<Prediction>,
    /// Points whose (pseudo-)labels entered the posterior update.
    pub n_gated_in: usize,
    /// Points excluded from the update (all of them, in frozen mode).
    pub n_gated_out: usize,
    /// Fraction of correct argmax predictions over ALL points; `None` when
    /// the trial carries no true labels. Gating never affects this.
    pub accuracy: Option<f64>,
}

impl TrialOutcome {
    pub fn mean_confidence(&self) -> f64 {
        if self.predictions.is_empty() {
            return 0.0;
        }
        self.predictions.iter().map(|p| p.confidence).sum::<f64>() / self.predictions.len() as f64
    }
}

/// Classifier value: immutable posterior snapshot plus its update policy and
/// how many trials it has absorbed. `process_trial` consumes the value and
/// returns the successor state.
#[derive(Debug, Clone)]
pub struct GcmClassifier {
    state: ClassPosteriorState,
    predictor: Predictor,
    mode: LearningMode,
    trial_counter: u32,
}

impl GcmClassifier {
    /// Fits the initial posterior from a labeled training set.
    ///
    /// Classes absent from the training set keep their prior block exactly.
    pub fn fit_initial(
        train: &[(FeatureVector, ClassLabel)],
        prior: &ClassPosteriorState,
        mode: LearningMode,
    ) -> Result<Self> {
        mode.validate()?;
        if train.is_empty() {
            return Err(Error::config("initial training set is empty"));
        }
        let mut stats = vec![SufficientStats::zeros(prior.dim()); prior.num_classes()];
        for (x, label) in train {
            label.check(prior.num_classes())?;
            stats[label.index()].observe(x, 1.0)?;
        }
        let state = update_posterior(prior, &stats)?;
        let predictor = Predictor::new(&state)?;
        Ok(Self {
            state,
            predictor,
            mode,
            trial_counter: 0,
        })
    }

    /// Wraps an already-built posterior (e.g. loaded from a checkpoint).
    pub fn from_state(
        state: ClassPosteriorState,
        mode: LearningMode,
        trial_counter: u32,
    ) -> Result<Self> {
        mode.validate()?;
        let predictor = Predictor::new(&state)?;
        Ok(Self {
            state,
            predictor,
            mode,
            trial_counter,
        })
    }

    pub fn state(&self) -> &ClassPosteriorState {
        &self.state
    }

    pub fn mode(&self) -> LearningMode {
        self.mode
    }

    pub fn trial_counter(&self) -> u32 {
        self.trial_counter
    }

    pub fn num_classes(&self) -> usize {
        self.state.num_classes()
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    /// Classifies one point. Pure: the classifier is not modified.
    pub fn predict(&self, x: &FeatureVector) -> Result<Prediction> {
        Ok(Prediction::from_probs(self.predictor.class_posterior(x)?))
    }

    /// Predicts every point of the trial from the current state, then applies
    /// the mode's update policy once, as a single batch.
    pub fn process_trial(self, trial: &TrialDataset) -> Result<(Self, TrialOutcome)> {
        if trial.is_empty() {
            return Err(Error::config("cannot process an empty trial"));
        }
        if trial.dim() != self.dim() {
            return Err(Error::dimension(format!(
                "trial has dimension {} but model expects {}",
                trial.dim(),
                self.dim()
            )));
        }
        let predictions = trial
            .features()
            .iter()
            .map(|x| self.predict(x))
            .collect::<Result<Vec<_>>>()?;

        let accuracy = trial.labels().map(|labels| {
            let correct = predictions
                .iter()
                .zip(labels)
                .filter(|(p, l)| p.predicted_class == **l)
                .count();
            correct as f64 / trial.len() as f64
        });

        let (state, n_gated_in) = match self.mode {
            LearningMode::Frozen => (self.state, 0),
            LearningMode::SemiSupervised { theta_th } => {
                let mut stats = vec![
                    SufficientStats::zeros(self.predictor.dim());
                    self.predictor.num_classes()
                ];
                let mut n_in = 0;
                for (x, pred) in trial.features().iter().zip(&predictions) {
                    if pred.confidence > theta_th {
                        stats[pred.predicted_class.index()].observe(x, 1.0)?;
                        n_in += 1;
                    }
                }
                if n_in == 0 {
                    (self.state, 0)
                } else {
                    (update_posterior(&self.state, &stats)?, n_in)
                }
            }
            LearningMode::FullySupervised => {
                let labels = trial.labels().ok_or_else(|| {
                    Error::missing_label("fully supervised updates need true labels")
                })?;
                let mut stats = vec![
                    SufficientStats::zeros(self.predictor.dim());
                    self.predictor.num_classes()
                ];
                for (x, label) in trial.features().iter().zip(labels) {
                    label.check(self.predictor.num_classes())?;
                    stats[label.index()].observe(x, 1.0)?;
                }
                (update_posterior(&self.state, &stats)?, trial.len())
            }
        };

        let predictor = Predictor::new(&state)?;
        let outcome = TrialOutcome {
            n_gated_out: trial.len() - n_gated_in,
            n_gated_in,
            predictions,
            accuracy,
        };
        Ok((
            Self {
                state,
                predictor,
                mode: self.mode,
                trial_counter: self.trial_counter + 1,
            },
            outcome,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::{DirichletParams, GaussWishartParams};
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector::new(values.to_vec()).unwrap()
    }

    fn uniform_prior(dim: usize, num_classes: usize) -> ClassPosteriorState {
        let block = GaussWishartParams::new(
            DVector::zeros(dim),
            1.0,
            dim as f64 + 1.0,
            DMatrix::identity(dim, dim),
        )
        .unwrap();
        ClassPosteriorState::symmetric(
            num_classes,
            block,
            DirichletParams::uniform(num_classes, 1.0).unwrap(),
        )
        .unwrap()
    }

    /// Two well-separated classes around ±5 on the first axis.
    fn separated_training(n_per_class: usize) -> Vec<(FeatureVector, ClassLabel)> {
        let mut train = Vec::new();
        for i in 0..n_per_class {
            let jitter = (i as f64 % 10.0) * 0.1 - 0.5;
            train.push((fv(&[-5.0 + jitter, jitter]), ClassLabel(0)));
            train.push((fv(&[5.0 - jitter, -jitter]), ClassLabel(1)));
        }
        train
    }

    fn training_trial(id: u32, train: &[(FeatureVector, ClassLabel)]) -> TrialDataset {
        TrialDataset::new(
            id,
            train.iter().map(|(x, _)| x.clone()).collect(),
            Some(train.iter().map(|(_, l)| *l).collect()),
        )
        .unwrap()
    }

    #[test]
    fn symmetric_state_ties_break_to_lowest_index() {
        let clf = GcmClassifier::from_state(uniform_prior(2, 2), LearningMode::Frozen, 0).unwrap();
        let pred = clf.predict(&fv(&[0.7, -0.3])).unwrap();
        assert_abs_diff_eq!(pred.confidence(), 0.5, epsilon = 1e-12);
        assert_eq!(pred.predicted_class(), ClassLabel(0));

        let six = GcmClassifier::from_state(uniform_prior(3, 6), LearningMode::Frozen, 0).unwrap();
        let pred = six.predict(&fv(&[0.1, 0.2, 0.3])).unwrap();
        for p in pred.probs() {
            assert_abs_diff_eq!(*p, 1.0 / 6.0, epsilon = 1e-12);
        }
        assert_eq!(pred.predicted_class(), ClassLabel(0));
    }

    #[test]
    fn far_point_is_classified_with_near_certainty() {
        let clf = GcmClassifier::fit_initial(
            &separated_training(100),
            &uniform_prior(2, 2),
            LearningMode::Frozen,
        )
        .unwrap();
        // Query at the fitted mean of class 1, >10 posterior sigmas from class 0.
        let m1 = clf.state().class(1).unwrap().mean().clone();
        let pred = clf
            .predict(&FeatureVector::new(m1.as_slice().to_vec()).unwrap())
            .unwrap();
        assert!(pred.probs()[1] > 0.999, "probs {:?}", pred.probs());
        assert_eq!(pred.predicted_class(), ClassLabel(1));
    }

    #[test]
    fn fit_initial_counts_and_empty_class_prior() {
        let prior = uniform_prior(2, 3); // class 2 gets no data
        let clf =
            GcmClassifier::fit_initial(&separated_training(300), &prior, LearningMode::Frozen)
                .unwrap();
        assert_eq!(clf.trial_counter(), 0);
        assert_eq!(clf.state().class(0).unwrap().beta(), 301.0);
        assert_eq!(clf.state().class(1).unwrap().beta(), 301.0);
        let (before, after) = (prior.class(2).unwrap(), clf.state().class(2).unwrap());
        assert_eq!(before, after);
    }

    #[test]
    fn fit_initial_rejects_bad_input() {
        let prior = uniform_prior(2, 2);
        assert!(GcmClassifier::fit_initial(&[], &prior, LearningMode::Frozen).is_err());
        let bad_dim = vec![(fv(&[1.0, 2.0, 3.0]), ClassLabel(0))];
        assert!(GcmClassifier::fit_initial(&bad_dim, &prior, LearningMode::Frozen).is_err());
        let bad_class = vec![(fv(&[1.0, 2.0]), ClassLabel(7))];
        assert!(GcmClassifier::fit_initial(&bad_class, &prior, LearningMode::Frozen).is_err());
        assert!(LearningMode::semi_supervised(1.5).is_err());
        assert!(LearningMode::semi_supervised(-0.1).is_err());
        assert!(LearningMode::semi_supervised(f64::NAN).is_err());
    }

    #[test]
    fn frozen_mode_never_touches_state() {
        let clf = GcmClassifier::fit_initial(
            &separated_training(50),
            &uniform_prior(2, 2),
            LearningMode::Frozen,
        )
        .unwrap();
        let before = clf.state().clone();
        let trial = training_trial(1, &separated_training(30));
        let (clf, outcome) = clf.process_trial(&trial).unwrap();
        assert_eq!(outcome.n_gated_in, 0);
        assert_eq!(outcome.n_gated_out, trial.len());
        assert_eq!(clf.trial_counter(), 1);
        // Bit-for-bit: every hyperparameter of every class.
        for c in 0..2 {
            let (a, b) = (before.class(c).unwrap(), clf.state().class(c).unwrap());
            assert_eq!(a.beta().to_bits(), b.beta().to_bits());
            assert_eq!(a.nu().to_bits(), b.nu().to_bits());
            for (x, y) in a.mean().iter().zip(b.mean().iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
            for (x, y) in a.scale_inv().iter().zip(b.scale_inv().iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn vacuous_gate_behaves_like_frozen() {
        let train = separated_training(50);
        let trial = training_trial(1, &separated_training(40));
        let prior = uniform_prior(2, 2);
        let frozen = GcmClassifier::fit_initial(&train, &prior, LearningMode::Frozen).unwrap();
        let gated =
            GcmClassifier::fit_initial(&train, &prior, LearningMode::semi_supervised(1.0).unwrap())
                .unwrap();
        let (gated, outcome) = gated.process_trial(&trial).unwrap();
        assert_eq!(outcome.n_gated_in, 0);
        let (frozen, frozen_outcome) = frozen.process_trial(&trial).unwrap();
        assert_eq!(outcome.predictions, frozen_outcome.predictions);
        assert_eq!(gated.state(), frozen.state());
    }

    #[test]
    fn open_gate_with_correct_predictions_equals_supervised() {
        let train = separated_training(50);
        let prior = uniform_prior(2, 2);
        // Every test point sits at a class centre, so predictions are correct.
        let trial = training_trial(1, &separated_training(25));

        let ss =
            GcmClassifier::fit_initial(&train, &prior, LearningMode::semi_supervised(0.0).unwrap())
                .unwrap();
        let (ss, ss_out) = ss.process_trial(&trial).unwrap();
        assert_eq!(ss_out.accuracy, Some(1.0));
        assert_eq!(ss_out.n_gated_in, trial.len());

        let fs = GcmClassifier::fit_initial(&train, &prior, LearningMode::FullySupervised).unwrap();
        let (fs, _) = fs.process_trial(&trial).unwrap();

        for c in 0..2 {
            let (a, b) = (ss.state().class(c).unwrap(), fs.state().class(c).unwrap());
            assert_abs_diff_eq!(a.beta(), b.beta(), epsilon = 1e-9 * a.beta());
            assert_abs_diff_eq!(a.nu(), b.nu(), epsilon = 1e-9 * a.nu());
            for (x, y) in a.mean().iter().zip(b.mean().iter()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-9 * (1.0 + x.abs()));
            }
            for (x, y) in a.scale_inv().iter().zip(b.scale_inv().iter()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-9 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn supervised_mode_requires_labels() {
        let clf = GcmClassifier::fit_initial(
            &separated_training(20),
            &uniform_prior(2, 2),
            LearningMode::FullySupervised,
        )
        .unwrap();
        let unlabeled = TrialDataset::new(
            1,
            separated_training(10).into_iter().map(|(x, _)| x).collect(),
            None,
        )
        .unwrap();
        let err = clf.process_trial(&unlabeled).unwrap_err();
        assert!(matches!(err, Error::MissingLabel(_)));
    }

    #[test]
    fn unlabeled_trials_have_no_accuracy_but_still_update() {
        let clf = GcmClassifier::fit_initial(
            &separated_training(50),
            &uniform_prior(2, 2),
            LearningMode::semi_supervised(0.5).unwrap(),
        )
        .unwrap();
        let unlabeled = TrialDataset::new(
            1,
            separated_training(10).into_iter().map(|(x, _)| x).collect(),
            None,
        )
        .unwrap();
        let before_beta = clf.state().class(0).unwrap().beta();
        let (clf, outcome) = clf.process_trial(&unlabeled).unwrap();
        assert_eq!(outcome.accuracy, None);
        assert!(outcome.n_gated_in > 0);
        assert!(clf.state().class(0).unwrap().beta() > before_beta);
    }

    #[test]
    fn gate_is_monotone_in_threshold() {
        let train = separated_training(30);
        let prior = uniform_prior(2, 2);
        // Points at varying distances produce a spread of confidences.
        let mut mixed = Vec::new();
        for i in 0..40 {
            let x = -5.0 + i as f64 * 0.25; // sweeps across both classes
            mixed.push((fv(&[x, 0.0]), ClassLabel(usize::from(x > 0.0))));
        }
        let trial = training_trial(1, &mixed);
        let mut last_in = usize::MAX;
        for theta in [0.0, 0.5, 0.8, 0.9, 0.99, 1.0] {
            let clf = GcmClassifier::fit_initial(
                &train,
                &prior,
                LearningMode::semi_supervised(theta).unwrap(),
            )
            .unwrap();
            let (_, outcome) = clf.process_trial(&trial).unwrap();
            assert!(
                outcome.n_gated_in <= last_in,
                "gated-in count rose from {last_in} to {} at theta {theta}",
                outcome.n_gated_in
            );
            assert_eq!(outcome.n_gated_in + outcome.n_gated_out, trial.len());
            last_in = outcome.n_gated_in;
        }
    }

    #[test]
    fn trial_predictions_match_individual_predict_calls() {
        let clf = GcmClassifier::fit_initial(
            &separated_training(40),
            &uniform_prior(2, 2),
            LearningMode::semi_supervised(0.9).unwrap(),
        )
        .unwrap();
        let trial = training_trial(1, &separated_training(15));
        let individual: Vec<_> = trial
            .features()
            .iter()
            .map(|x| clf.predict(x).unwrap())
            .collect();
        let repeat: Vec<_> = trial
            .features()
            .iter()
            .map(|x| clf.predict(x).unwrap())
            .collect();
        assert_eq!(individual, repeat);
        let (_, outcome) = clf.process_trial(&trial).unwrap();
        assert_eq!(outcome.predictions, individual);
    }

    #[test]
    fn supervised_trials_compose_like_one_batch() {
        let prior = uniform_prior(2, 2);
        let train = separated_training(30);
        let trial_a = training_trial(1, &separated_training(20));
        let trial_b = training_trial(2, &separated_training(10));

        let clf =
            GcmClassifier::fit_initial(&train, &prior, LearningMode::FullySupervised).unwrap();
        let (clf, _) = clf.process_trial(&trial_a).unwrap();
        let (clf, _) = clf.process_trial(&trial_b).unwrap();
        assert_eq!(clf.trial_counter(), 2);

        let mut all = train.clone();
        all.extend(trial_a.to_labeled_vec().unwrap());
        all.extend(trial_b.to_labeled_vec().unwrap());
        let batch =
            GcmClassifier::fit_initial(&all, &prior, LearningMode::FullySupervised).unwrap();

        for c in 0..2 {
            let (a, b) = (
                clf.state().class(c).unwrap(),
                batch.state().class(c).unwrap(),
            );
            assert_abs_diff_eq!(a.beta(), b.beta(), epsilon = 1e-9 * a.beta());
            for (x, y) in a.scale_inv().iter().zip(b.scale_inv().iter()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-9 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn accuracy_counts_every_sample() {
        let prior = uniform_prior(2, 2);
        let clf = GcmClassifier::fit_initial(
            &separated_training(50),
            &prior,
            LearningMode::semi_supervised(0.999999).unwrap(),
        )
        .unwrap();
        // Half the labels deliberately wrong: accuracy must be 0.5 even
        // though the tight gate admits almost nothing.
        let mut pts = Vec::new();
        for i in 0..10 {
            let jitter = i as f64 * 0.01;
            pts.push((fv(&[-5.0 + jitter, 0.0]), ClassLabel(0)));
            pts.push((fv(&[-5.0 - jitter, 0.0]), ClassLabel(1)));
        }
        let trial = training_trial(1, &pts);
        let (_, outcome) = clf.process_trial(&trial).unwrap();
        assert_eq!(outcome.accuracy, Some(0.5));
        assert_eq!(outcome.n_gated_in + outcome.n_gated_out, 20);
    }

    #[test]
    fn mode_tokens_round_trip() {
        assert_eq!(LearningMode::Frozen.token(), "frozen");
        assert_eq!(LearningMode::semi_supervised(0.9).unwrap().token(), "ss");
        assert_eq!(LearningMode::FullySupervised.token(), "fs");
        assert_eq!(
            "frozen".parse::<LearningMode>().unwrap(),
            LearningMode::Frozen
        );
        assert_eq!(
            "ss".parse::<LearningMode>().unwrap(),
            LearningMode::SemiSupervised { theta_th: 0.9 }
        );
        assert_eq!(
            "fs".parse::<LearningMode>().unwrap(),
            LearningMode::FullySupervised
        );
        assert!("bad".parse::<LearningMode>().is_err());
    }
}
