//! Versioned JSON serialization of posterior states and classifier
//! checkpoints.
//!
//! Every float is stored as a hex literal (see [`super::hexfloat`]), so a
//! save/load cycle reproduces the model bit for bit. Documents carry
//! `schema_version` for forward evolution; only version 1 exists.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::hexfloat::{encode_hex_f64, parse_hex_f64};
use crate::bayes::{ClassPosteriorState, DirichletParams, GaussWishartParams};
use crate::classifier::{GcmClassifier, LearningMode};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ClassBlockDoc {
    m: Vec<String>,
    beta: String,
    nu: String,
    w_inv_row_major: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StateDoc {
    schema_version: u32,
    dim: usize,
    num_classes: usize,
    per_class: Vec<ClassBlockDoc>,
    alpha: Vec<String>,
}

/// Checkpoint = the state document's fields plus mode metadata, all in one
/// flat object; `schema_version` comes from the flattened state document.
#[derive(Debug, Serialize, Deserialize)]
struct CheckpointDoc {
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_th: Option<String>,
    trial_counter: u32,
    #[serde(flatten)]
    state: StateDoc,
}

fn encode_vec(values: impl IntoIterator<Item = f64>) -> Result<Vec<String>> {
    values.into_iter().map(encode_hex_f64).collect()
}

fn parse_vec(values: &[String], what: &str) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|s| parse_hex_f64(s).map_err(|e| Error::parse(format!("{what}: {e}"))))
        .collect()
}

fn state_to_doc(state: &ClassPosteriorState) -> Result<StateDoc> {
    let per_class = state
        .classes()
        .iter()
        .map(|p| {
            Ok(ClassBlockDoc {
                m: encode_vec(p.mean().iter().copied())?,
                beta: encode_hex_f64(p.beta())?,
                nu: encode_hex_f64(p.nu())?,
                // Row-major is explicit in the field name; nalgebra iterates
                // column-major, so walk rows by hand.
                w_inv_row_major: encode_vec(
                    (0..p.dim()).flat_map(|r| (0..p.dim()).map(move |c| p.scale_inv()[(r, c)])),
                )?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StateDoc {
        schema_version: SCHEMA_VERSION,
        dim: state.dim(),
        num_classes: state.num_classes(),
        per_class,
        alpha: encode_vec(state.mixing().alpha().iter().copied())?,
    })
}

fn doc_to_state(doc: &StateDoc) -> Result<ClassPosteriorState> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::parse(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    if doc.per_class.len() != doc.num_classes {
        return Err(Error::parse(format!(
            "document declares {} classes but carries {}",
            doc.num_classes,
            doc.per_class.len()
        )));
    }
    let classes = doc
        .per_class
        .iter()
        .enumerate()
        .map(|(c, block)| {
            let m = parse_vec(&block.m, "class mean")?;
            if m.len() != doc.dim {
                return Err(Error::parse(format!(
                    "class {c} mean has length {} but dim is {}",
                    m.len(),
                    doc.dim
                )));
            }
            let w = parse_vec(&block.w_inv_row_major, "inverse scale")?;
            if w.len() != doc.dim * doc.dim {
                return Err(Error::parse(format!(
                    "class {c} inverse scale has {} entries, expected {}",
                    w.len(),
                    doc.dim * doc.dim
                )));
            }
            GaussWishartParams::new(
                DVector::from_vec(m),
                parse_hex_f64(&block.beta)?,
                parse_hex_f64(&block.nu)?,
                DMatrix::from_row_slice(doc.dim, doc.dim, &w),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let alpha = parse_vec(&doc.alpha, "concentration")?;
    ClassPosteriorState::new(classes, DirichletParams::new(DVector::from_vec(alpha))?)
}

/// Serializes a posterior state to pretty-printed JSON.
pub fn state_to_json(state: &ClassPosteriorState) -> Result<String> {
    let doc = state_to_doc(state)?;
    serde_json::to_string_pretty(&doc).map_err(|e| Error::parse(e.to_string()))
}

/// Parses and fully validates a posterior state document.
pub fn state_from_json(json: &str) -> Result<ClassPosteriorState> {
    let doc: StateDoc =
        serde_json::from_str(json).map_err(|e| Error::parse(format!("state JSON: {e}")))?;
    doc_to_state(&doc)
}

/// Serializes a classifier checkpoint (`.gcm.json`): the posterior state
/// plus mode, threshold, and trial counter.
pub fn checkpoint_to_json(clf: &GcmClassifier) -> Result<String> {
    let theta_th = match clf.mode() {
        LearningMode::SemiSupervised { theta_th } => Some(encode_hex_f64(theta_th)?),
        _ => None,
    };
    let doc = CheckpointDoc {
        mode: clf.mode().token().to_string(),
        theta_th,
        trial_counter: clf.trial_counter(),
        state: state_to_doc(clf.state())?,
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::parse(e.to_string()))
}

/// Parses and validates a classifier checkpoint.
pub fn checkpoint_from_json(json: &str) -> Result<GcmClassifier> {
    let doc: CheckpointDoc =
        serde_json::from_str(json).map_err(|e| Error::parse(format!("checkpoint JSON: {e}")))?;
    let state = doc_to_state(&doc.state)?;
    let mode = match doc.mode.as_str() {
        "ss" => {
            let theta = doc
                .theta_th
                .as_deref()
                .ok_or_else(|| Error::parse("checkpoint mode \"ss\" is missing theta_th"))?;
            LearningMode::semi_supervised(parse_hex_f64(theta)?)?
        }
        other => {
            if doc.theta_th.is_some() {
                return Err(Error::parse(format!(
                    "checkpoint mode {other:?} must not carry theta_th"
                )));
            }
            other.parse::<LearningMode>()?
        }
    };
    GcmClassifier::from_state(state, mode, doc.trial_counter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::{accumulate_stats, update_posterior};
    use crate::data::{ClassLabel, FeatureVector};

    fn trained_state() -> ClassPosteriorState {
        let block = GaussWishartParams::new(
            DVector::from_column_slice(&[0.1, -0.2]),
            1.5,
            3.25,
            DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
        )
        .unwrap();
        let prior =
            ClassPosteriorState::symmetric(3, block, DirichletParams::uniform(3, 0.7).unwrap())
                .unwrap();
        let features: Vec<FeatureVector> = (0..30)
            .map(|i| {
                FeatureVector::new(vec![
                    (i % 5) as f64 * 0.3 - 1.0,
                    ((i * 7) % 11) as f64 * 0.1,
                ])
                .unwrap()
            })
            .collect();
        let labels: Vec<ClassLabel> = (0..30).map(|i| ClassLabel(i % 3)).collect();
        let stats = accumulate_stats(&features, &labels, 3, 2).unwrap();
        update_posterior(&prior, &stats).unwrap()
    }

    fn assert_states_bit_equal(a: &ClassPosteriorState, b: &ClassPosteriorState) {
        assert_eq!(a.dim(), b.dim());
        assert_eq!(a.num_classes(), b.num_classes());
        for c in 0..a.num_classes() {
            let (x, y) = (a.class(c).unwrap(), b.class(c).unwrap());
            assert_eq!(x.beta().to_bits(), y.beta().to_bits());
            assert_eq!(x.nu().to_bits(), y.nu().to_bits());
            for (u, v) in x.mean().iter().zip(y.mean().iter()) {
                assert_eq!(u.to_bits(), v.to_bits());
            }
            for (u, v) in x.scale_inv().iter().zip(y.scale_inv().iter()) {
                assert_eq!(u.to_bits(), v.to_bits());
            }
        }
        for (u, v) in a.mixing().alpha().iter().zip(b.mixing().alpha().iter()) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn state_round_trip_is_bit_exact() {
        let state = trained_state();
        let json = state_to_json(&state).unwrap();
        let back = state_from_json(&json).unwrap();
        assert_states_bit_equal(&state, &back);
        // And the re-serialization is byte-identical.
        assert_eq!(json, state_to_json(&back).unwrap());
    }

    #[test]
    fn state_document_shape_is_stable() {
        let json = state_to_json(&trained_state()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["dim"], 2);
        assert_eq!(v["num_classes"], 3);
        assert_eq!(v["per_class"].as_array().unwrap().len(), 3);
        assert_eq!(v["alpha"].as_array().unwrap().len(), 3);
        let block = &v["per_class"][0];
        assert!(block["m"].is_array());
        assert!(block["beta"].is_string());
        assert!(block["nu"].is_string());
        assert_eq!(block["w_inv_row_major"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn checkpoint_round_trip_preserves_mode_and_counter() {
        let clf = GcmClassifier::from_state(
            trained_state(),
            LearningMode::semi_supervised(0.9).unwrap(),
            7,
        )
        .unwrap();
        let json = checkpoint_to_json(&clf).unwrap();
        let back = checkpoint_from_json(&json).unwrap();
        assert_eq!(back.mode(), clf.mode());
        assert_eq!(back.trial_counter(), 7);
        assert_states_bit_equal(clf.state(), back.state());

        let frozen = GcmClassifier::from_state(trained_state(), LearningMode::Frozen, 0).unwrap();
        let json = checkpoint_to_json(&frozen).unwrap();
        assert!(!json.contains("theta_th"));
        assert_eq!(
            checkpoint_from_json(&json).unwrap().mode(),
            LearningMode::Frozen
        );
    }

    #[test]
    fn malformed_documents_error_cleanly() {
        assert!(state_from_json("").is_err());
        assert!(state_from_json("{}").is_err());
        assert!(state_from_json("not json").is_err());
        // Wrong version.
        let mut v: serde_json::Value =
            serde_json::from_str(&state_to_json(&trained_state()).unwrap()).unwrap();
        v["schema_version"] = 99.into();
        assert!(state_from_json(&v.to_string()).is_err());
        // Corrupt a float.
        let mut v: serde_json::Value =
            serde_json::from_str(&state_to_json(&trained_state()).unwrap()).unwrap();
        v["per_class"][0]["beta"] = "0xnope".into();
        assert!(state_from_json(&v.to_string()).is_err());
        // Break an invariant (beta <= 0) with a valid hex literal.
        let mut v: serde_json::Value =
            serde_json::from_str(&state_to_json(&trained_state()).unwrap()).unwrap();
        v["per_class"][0]["beta"] = "-0x1.0000000000000p+0".into();
        assert!(state_from_json(&v.to_string()).is_err());
        // Checkpoint with ss mode but no threshold.
        let clf = GcmClassifier::from_state(trained_state(), LearningMode::Frozen, 1).unwrap();
        let mut v: serde_json::Value =
            serde_json::from_str(&checkpoint_to_json(&clf).unwrap()).unwrap();
        v["mode"] = "ss".into();
        assert!(checkpoint_from_json(&v.to_string()).is_err());
    }
}
