//! Conjugate Bayesian model for class-conditional Gaussians.
//!
//! Each class carries a Gauss–Wishart posterior over its mean and precision,
//! and a shared Dirichlet posterior weights the classes. Batch updates are
//! closed form; the marginal predictive density of each class is a
//! multivariate Student-t, so prediction needs no sampling.
//!
//! The Wishart scale is stored as its inverse (`w_inv`), which makes the
//! update a plain matrix sum. Every update re-symmetrizes the result and
//! verifies positive definiteness via a Cholesky factorization.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::data::{ClassLabel, FeatureVector};
use crate::error::{Error, Result};
use crate::math::{is_symmetric, ln_gamma, log_sum_exp, softmax_in_place, symmetrize_in_place};

/// Relative tolerance used when validating that a scale matrix is symmetric.
const SYMMETRY_REL_TOL: f64 = 1e-9;

/// Gauss–Wishart parameters for one class: `N(mu | m, (beta * Lambda)^-1) *
/// Wishart(Lambda | W, nu)` with `W = w_inv^-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussWishartParams {
    m: DVector<f64>,
    beta: f64,
    nu: f64,
    w_inv: DMatrix<f64>,
}

impl GaussWishartParams {
    /// Validates and constructs the parameter set.
    ///
    /// Requires `beta > 0`, `nu > dim - 1`, and `w_inv` symmetric positive
    /// definite. Small asymmetries (relative magnitude below 1e-9) are
    /// repaired by averaging with the transpose; larger ones are rejected.
    pub fn new(m: DVector<f64>, beta: f64, nu: f64, w_inv: DMatrix<f64>) -> Result<Self> {
        let dim = m.len();
        if dim == 0 {
            return Err(Error::dimension("mean vector must be non-empty"));
        }
        if w_inv.nrows() != dim || w_inv.ncols() != dim {
            return Err(Error::dimension(format!(
                "inverse scale is {}x{} but mean has dimension {dim}",
                w_inv.nrows(),
                w_inv.ncols()
            )));
        }
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid_state("mean vector has non-finite entries"));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::invalid_state(format!(
                "mean-precision scale beta must be positive, got {beta}"
            )));
        }
        if !nu.is_finite() || nu <= dim as f64 - 1.0 {
            return Err(Error::invalid_state(format!(
                "degrees of freedom nu must exceed dim - 1 = {}, got {nu}",
                dim as f64 - 1.0
            )));
        }
        if !w_inv.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid_state("inverse scale has non-finite entries"));
        }
        if !is_symmetric(&w_inv, SYMMETRY_REL_TOL) {
            return Err(Error::invalid_state(
                "inverse scale is not symmetric within tolerance",
            ));
        }
        let mut w_inv = w_inv;
        symmetrize_in_place(&mut w_inv);
        if Cholesky::new(w_inv.clone()).is_none() {
            return Err(Error::numerical(
                "inverse scale is not positive definite (Cholesky failed)",
            ));
        }
        Ok(Self { m, beta, nu, w_inv })
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.m
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Inverse of the Wishart scale matrix.
    pub fn scale_inv(&self) -> &DMatrix<f64> {
        &self.w_inv
    }

    /// Expected precision under the Wishart factor, `nu * W`.
    pub fn expected_precision(&self) -> Result<DMatrix<f64>> {
        let chol = Cholesky::new(self.w_inv.clone())
            .ok_or_else(|| Error::numerical("inverse scale lost positive definiteness"))?;
        Ok(chol.inverse() * self.nu)
    }
}

/// Dirichlet concentration over class membership.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    alpha: DVector<f64>,
}

impl DirichletParams {
    pub fn new(alpha: DVector<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::dimension("concentration vector must be non-empty"));
        }
        if !alpha.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::invalid_state(
                "concentration parameters must be finite and positive",
            ));
        }
        Ok(Self { alpha })
    }

    /// Uniform concentration `value` over `num_classes` classes.
    pub fn uniform(num_classes: usize, value: f64) -> Result<Self> {
        Self::new(DVector::from_element(num_classes, value))
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    /// Posterior mean class weights, `alpha / sum(alpha)`.
    pub fn mean_weights(&self) -> DVector<f64> {
        &self.alpha / self.alpha.sum()
    }
}

/// Joint posterior over all classes: one Gauss–Wishart block per class plus
/// the shared Dirichlet mixing weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPosteriorState {
    classes: Vec<GaussWishartParams>,
    mixing: DirichletParams,
}

impl ClassPosteriorState {
    pub fn new(classes: Vec<GaussWishartParams>, mixing: DirichletParams) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::dimension("state needs at least one class"));
        }
        if classes.len() != mixing.len() {
            return Err(Error::dimension(format!(
                "{} class blocks but {} concentration parameters",
                classes.len(),
                mixing.len()
            )));
        }
        let dim = classes[0].dim();
        if classes.iter().any(|c| c.dim() != dim) {
            return Err(Error::dimension("class blocks disagree on dimension"));
        }
        Ok(Self { classes, mixing })
    }

    /// Builds a state where every class starts from the same prior block.
    pub fn symmetric(
        num_classes: usize,
        class_prior: GaussWishartParams,
        mixing: DirichletParams,
    ) -> Result<Self> {
        let classes = vec![class_prior; num_classes];
        Self::new(classes, mixing)
    }

    pub fn dim(&self) -> usize {
        self.classes[0].dim()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, c: usize) -> Result<&GaussWishartParams> {
        self.classes.get(c).ok_or_else(|| {
            Error::dimension(format!(
                "class index {c} out of range for {} classes",
                self.classes.len()
            ))
        })
    }

    pub fn classes(&self) -> &[GaussWishartParams] {
        &self.classes
    }

    pub fn mixing(&self) -> &DirichletParams {
        &self.mixing
    }

    /// Log marginal predictive density of `x` under one class (Student-t).
    ///
    /// Convenience wrapper that builds a throwaway [`Predictor`]; hold one
    /// explicitly when scoring many points.
    pub fn log_predictive_density(&self, class: usize, x: &FeatureVector) -> Result<f64> {
        Predictor::new(self)?.log_predictive(class, x)
    }

    /// Posterior class membership probabilities for `x`.
    pub fn class_posterior(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        Predictor::new(self)?.class_posterior(x)
    }
}

/// Additive sufficient statistics of a weighted point set: total weight,
/// weighted sum, and weighted outer-product scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    count: f64,
    sum: DVector<f64>,
    scatter: DMatrix<f64>,
}

impl SufficientStats {
    pub fn zeros(dim: usize) -> Self {
        Self {
            count: 0.0,
            sum: DVector::zeros(dim),
            scatter: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    pub fn count(&self) -> f64 {
        self.count
    }

    pub fn sum(&self) -> &DVector<f64> {
        &self.sum
    }

    pub fn scatter(&self) -> &DMatrix<f64> {
        &self.scatter
    }

    /// Accumulates one observation with the given non-negative weight.
    pub fn observe(&mut self, x: &FeatureVector, weight: f64) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::dimension(format!(
                "observation has dimension {} but stats have {}",
                x.dim(),
                self.dim()
            )));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::invalid_state(format!(
                "observation weight must be finite and non-negative, got {weight}"
            )));
        }
        let v = x.values();
        self.count += weight;
        self.sum.axpy(weight, v, 1.0);
        self.scatter.ger(weight, v, v, 1.0);
        Ok(())
    }

    /// Adds another accumulator over the same dimension.
    pub fn merge(&mut self, other: &SufficientStats) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::dimension(format!(
                "cannot merge stats of dimension {} into {}",
                other.dim(),
                self.dim()
            )));
        }
        self.count += other.count;
        self.sum += &other.sum;
        self.scatter += &other.scatter;
        Ok(())
    }
}

/// Splits labeled observations into per-class sufficient statistics.
pub fn accumulate_stats(
    features: &[FeatureVector],
    labels: &[ClassLabel],
    num_classes: usize,
    dim: usize,
) -> Result<Vec<SufficientStats>> {
    if features.len() != labels.len() {
        return Err(Error::dimension(format!(
            "{} feature vectors but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let mut stats = vec![SufficientStats::zeros(dim); num_classes];
    for (x, label) in features.iter().zip(labels) {
        label.check(num_classes)?;
        stats[label.index()].observe(x, 1.0)?;
    }
    Ok(stats)
}

/// Applies one batch of per-class statistics to the posterior.
///
/// Classes whose batch is empty keep their parameter block byte-for-byte;
/// only their Dirichlet concentration is left untouched as well. The updated
/// inverse scale is re-symmetrized and must remain positive definite.
pub fn update_posterior(
    prior: &ClassPosteriorState,
    stats: &[SufficientStats],
) -> Result<ClassPosteriorState> {
    if stats.len() != prior.num_classes() {
        return Err(Error::dimension(format!(
            "{} stat blocks for {} classes",
            stats.len(),
            prior.num_classes()
        )));
    }
    let dim = prior.dim();
    let mut classes = Vec::with_capacity(prior.num_classes());
    let mut alpha = prior.mixing().alpha().clone();
    for (c, s) in stats.iter().enumerate() {
        if s.dim() != dim {
            return Err(Error::dimension(format!(
                "stats for class {c} have dimension {} but state has {dim}",
                s.dim()
            )));
        }
        let p = prior.class(c)?;
        if s.count == 0.0 {
            classes.push(p.clone());
            continue;
        }
        let beta_hat = s.count + p.beta;
        let nu_hat = s.count + p.nu;
        let m_hat = (&s.sum + p.beta * &p.m) / beta_hat;
        let mut w_inv_hat = &s.scatter + &p.w_inv;
        w_inv_hat.ger(p.beta, &p.m, &p.m, 1.0);
        w_inv_hat.ger(-beta_hat, &m_hat, &m_hat, 1.0);
        symmetrize_in_place(&mut w_inv_hat);
        if Cholesky::new(w_inv_hat.clone()).is_none() {
            return Err(Error::numerical(format!(
                "updated inverse scale for class {c} is not positive definite"
            )));
        }
        alpha[c] += s.count;
        classes.push(GaussWishartParams {
            m: m_hat,
            beta: beta_hat,
            nu: nu_hat,
            w_inv: w_inv_hat,
        });
    }
    ClassPosteriorState::new(classes, DirichletParams::new(alpha)?)
}

/// Per-class constants for the Student-t predictive density.
#[derive(Debug, Clone)]
struct ClassPredictor {
    mean: DVector<f64>,
    /// Lower Cholesky factor of the inverse scale.
    chol_l: DMatrix<f64>,
    dof: f64,
    /// Multiplier turning the Mahalanobis form into the Student-t quadratic:
    /// `dof * beta / (beta + 1)`.
    scale_fac: f64,
    /// All x-independent terms of the log density.
    ln_norm: f64,
    ln_alpha: f64,
}

/// Precomputed predictive machinery for a posterior state.
///
/// Factorizes every class once so that scoring a point costs one triangular
/// solve per class.
#[derive(Debug, Clone)]
pub struct Predictor {
    dim: usize,
    classes: Vec<ClassPredictor>,
}

impl Predictor {
    pub fn new(state: &ClassPosteriorState) -> Result<Self> {
        let dim = state.dim();
        let d = dim as f64;
        let mut classes = Vec::with_capacity(state.num_classes());
        for (c, p) in state.classes().iter().enumerate() {
            let dof = p.nu + 1.0 - d;
            if dof <= 0.0 {
                return Err(Error::invalid_state(format!(
                    "class {c} has nu = {} which leaves no predictive degrees of freedom in dimension {dim}",
                    p.nu
                )));
            }
            let chol = Cholesky::new(p.w_inv.clone()).ok_or_else(|| {
                Error::numerical(format!(
                    "inverse scale for class {c} is not positive definite"
                ))
            })?;
            let chol_l: DMatrix<f64> = chol.l();
            let logdet_w_inv = 2.0 * chol_l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
            let scale_fac = dof * p.beta / (p.beta + 1.0);
            // ln det of the Student-t precision: D ln(scale_fac) - ln det w_inv.
            let logdet_prec = d * scale_fac.ln() - logdet_w_inv;
            let ln_norm = ln_gamma(0.5 * (dof + d))
                - ln_gamma(0.5 * dof)
                - 0.5 * d * (dof * std::f64::consts::PI).ln()
                + 0.5 * logdet_prec;
            classes.push(ClassPredictor {
                mean: p.m.clone(),
                chol_l,
                dof,
                scale_fac,
                ln_norm,
                ln_alpha: state.mixing().alpha()[c].ln(),
            });
        }
        Ok(Self { dim, classes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    fn check_input(&self, x: &FeatureVector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::dimension(format!(
                "input has dimension {} but model expects {}",
                x.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Log Student-t predictive density of `x` under class `c`.
    pub fn log_predictive(&self, c: usize, x: &FeatureVector) -> Result<f64> {
        self.check_input(x)?;
        let cp = self.classes.get(c).ok_or_else(|| {
            Error::dimension(format!(
                "class index {c} out of range for {} classes",
                self.classes.len()
            ))
        })?;
        Ok(Self::log_predictive_inner(cp, x))
    }

    fn log_predictive_inner(cp: &ClassPredictor, x: &FeatureVector) -> f64 {
        let diff = x.values() - &cp.mean;
        // w_inv = L L^T, so d^T w_inv^-1 d = || L^-1 d ||^2.
        let z = cp
            .chol_l
            .solve_lower_triangular(&diff)
            .expect("Cholesky factor has positive diagonal");
        let qf = cp.scale_fac * z.norm_squared();
        cp.ln_norm - 0.5 * (cp.dof + cp.mean.len() as f64) * (qf / cp.dof).ln_1p()
    }

    /// Unnormalized log class scores: `ln alpha_c + ln St_c(x)`.
    pub fn log_joint(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self
            .classes
            .iter()
            .map(|cp| cp.ln_alpha + Self::log_predictive_inner(cp, x))
            .collect())
    }

    /// Log marginal density of `x` under the Dirichlet-mean mixture.
    pub fn log_marginal(&self, x: &FeatureVector) -> Result<f64> {
        let joint = self.log_joint(x)?;
        let ln_alpha_sum = log_sum_exp(
            &self
                .classes
                .iter()
                .map(|cp| cp.ln_alpha)
                .collect::<Vec<_>>(),
        );
        Ok(log_sum_exp(&joint) - ln_alpha_sum)
    }

    /// Posterior class membership probabilities; sums to one.
    pub fn class_posterior(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        let mut scores = self.log_joint(x)?;
        softmax_in_place(&mut scores);
        Ok(scores)
    }
}
