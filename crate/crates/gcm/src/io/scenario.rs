//! JSON schema for drift scenarios.
//!
//! Scenario files are human-authored configuration, so floats stay plain
//! JSON numbers (unlike model state, which demands bit-exactness).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::DriftScenario;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ClassDoc {
    base: Vec<f64>,
    velocity: Vec<f64>,
    covariance_row_major: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioDoc {
    schema_version: u32,
    dim: usize,
    points_per_class: usize,
    trials: u32,
    rng_seed: u64,
    classes: Vec<ClassDoc>,
}

pub fn scenario_to_json(scenario: &DriftScenario) -> Result<String> {
    let classes = (0..scenario.num_classes())
        .map(|c| ClassDoc {
            base: scenario.bases()[c].as_slice().to_vec(),
            velocity: scenario.velocities()[c].as_slice().to_vec(),
            covariance_row_major: {
                let m = &scenario.covariances()[c];
                (0..m.nrows())
                    .flat_map(|r| (0..m.ncols()).map(move |col| m[(r, col)]))
                    .collect()
            },
        })
        .collect();
    let doc = ScenarioDoc {
        schema_version: SCHEMA_VERSION,
        dim: scenario.dim(),
        points_per_class: scenario.points_per_class(),
        trials: scenario.trials(),
        rng_seed: scenario.rng_seed(),
        classes,
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::parse(e.to_string()))
}

pub fn scenario_from_json(json: &str) -> Result<DriftScenario> {
    let doc: ScenarioDoc =
        serde_json::from_str(json).map_err(|e| Error::parse(format!("scenario JSON: {e}")))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::parse(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    let dim = doc.dim;
    let mut bases = Vec::with_capacity(doc.classes.len());
    let mut velocities = Vec::with_capacity(doc.classes.len());
    let mut covariances = Vec::with_capacity(doc.classes.len());
    for (c, class) in doc.classes.iter().enumerate() {
        if class.covariance_row_major.len() != dim * dim {
            return Err(Error::parse(format!(
                "class {c} covariance has {} entries, expected {}",
                class.covariance_row_major.len(),
                dim * dim
            )));
        }
        bases.push(DVector::from_column_slice(&class.base));
        velocities.push(DVector::from_column_slice(&class.velocity));
        covariances.push(DMatrix::from_row_slice(
            dim,
            dim,
            &class.covariance_row_major,
        ));
    }
    DriftScenario::new(
        dim,
        doc.points_per_class,
        doc.trials,
        bases,
        velocities,
        covariances,
        doc.rng_seed,
    )
}
