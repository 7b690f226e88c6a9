//! CSV formats for feature trials and raw recordings.
//!
//! Trial files carry one feature vector per row under headers `f1..fD`, with
//! an optional trailing `label` column (all rows labeled or none). Recording
//! files carry one sample per row under `ch1..chD`, with acquisition
//! metadata in a JSON sidecar. Floats use Rust's shortest round-trip
//! formatting, so write→read reproduces values exactly and rewrites are
//! byte-stable.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{ClassLabel, FeatureVector, TrialDataset};
use crate::error::{Error, Result};
use crate::features::RawRecording;

/// Sidecar metadata for a recording CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub sample_rate_hz: f64,
    pub trial_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion_label: Option<usize>,
}

fn parse_f64(field: &str, row: usize, col: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::parse(format!(
            "row {row}: column {col} is not a number: {field:?}"
        ))
    })
}

/// Checks that `headers` is exactly `<prefix>1..<prefix>D` (plus, for trial
/// files, an optional trailing `label`). Returns `(dim, has_label)`.
fn check_headers(
    headers: &csv::StringRecord,
    prefix: &str,
    allow_label: bool,
) -> Result<(usize, bool)> {
    let mut names: Vec<&str> = headers.iter().map(str::trim).collect();
    let has_label = allow_label && names.last() == Some(&"label");
    if has_label {
        names.pop();
    }
    if names.is_empty() {
        return Err(Error::parse(format!(
            "header must contain {prefix}1..{prefix}D columns"
        )));
    }
    for (i, name) in names.iter().enumerate() {
        let expected = format!("{prefix}{}", i + 1);
        if *name != expected {
            return Err(Error::parse(format!(
                "header column {} is {name:?}, expected {expected:?}",
                i + 1
            )));
        }
    }
    Ok((names.len(), has_label))
}

/// Parses a trial CSV (`f1..fD[,label]`). The trial id comes from the caller
/// because the format keeps it in the file name, not the content.
pub fn parse_trial_csv(text: &str, trial_id: u32) -> Result<TrialDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(format!("trial CSV header: {e}")))?
        .clone();
    let (dim, has_label) = check_headers(&headers, "f", true)?;

    let mut features = Vec::new();
    let mut labels = if has_label { Some(Vec::new()) } else { None };
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(format!("row {}: {e}", i + 1)))?;
        let expected_len = dim + usize::from(has_label);
        if record.len() != expected_len {
            return Err(Error::parse(format!(
                "row {}: has {} fields, expected {expected_len}",
                i + 1,
                record.len()
            )));
        }
        let values = (0..dim)
            .map(|j| parse_f64(&record[j], i + 1, &format!("f{}", j + 1)))
            .collect::<Result<Vec<_>>>()?;
        features.push(FeatureVector::new(values)?);
        if let Some(labels) = labels.as_mut() {
            let raw = record[dim].trim();
            let label: usize = raw.parse().map_err(|_| {
                Error::parse(format!(
                    "row {}: label is not a class index: {raw:?}",
                    i + 1
                ))
            })?;
            labels.push(ClassLabel(label));
        }
    }
    if features.is_empty() {
        return Err(Error::parse("trial CSV contains no data rows"));
    }
    TrialDataset::new(trial_id, features, labels)
}

/// Writes a trial CSV with `f1..fD[,label]` headers.
pub fn write_trial_csv(dataset: &TrialDataset, mut writer: impl Write) -> Result<()> {
    let mut header: Vec<String> = (1..=dataset.dim()).map(|i| format!("f{i}")).collect();
    if dataset.is_labeled() {
        header.push("label".to_string());
    }
    writeln!(writer, "{}", header.join(","))?;
    for (i, x) in dataset.features().iter().enumerate() {
        let mut fields: Vec<String> = x.as_slice().iter().map(|v| format!("{v}")).collect();
        if let Some(labels) = dataset.labels() {
            fields.push(labels[i].index().to_string());
        }
        writeln!(writer, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn trial_csv_to_string(dataset: &TrialDataset) -> Result<String> {
    let mut buf = Vec::new();
    write_trial_csv(dataset, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::parse(e.to_string()))
}

pub fn read_trial_csv_file(path: &Path, trial_id: u32) -> Result<TrialDataset> {
    let text = std::fs::read_to_string(path)?;
    parse_trial_csv(&text, trial_id).map_err(|e| Error::parse(format!("{}: {e}", path.display())))
}

/// Parses a recording CSV (`ch1..chD`) into per-channel sample series.
pub fn parse_recording_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(format!("recording CSV header: {e}")))?
        .clone();
    let (dim, _) = check_headers(&headers, "ch", false)?;

    let mut channels = vec![Vec::new(); dim];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(format!("row {}: {e}", i + 1)))?;
        if record.len() != dim {
            return Err(Error::parse(format!(
                "row {}: has {} fields, expected {dim}",
                i + 1,
                record.len()
            )));
        }
        for (j, channel) in channels.iter_mut().enumerate() {
            channel.push(parse_f64(&record[j], i + 1, &format!("ch{}", j + 1))?);
        }
    }
    if channels[0].is_empty() {
        return Err(Error::parse("recording CSV contains no data rows"));
    }
    Ok(channels)
}

pub fn parse_recording_meta(text: &str) -> Result<RecordingMeta> {
    let meta: RecordingMeta =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("recording meta: {e}")))?;
    Ok(meta)
}

/// Assembles a validated recording from parsed channels and metadata.
pub fn recording_from_parts(channels: Vec<Vec<f64>>, meta: &RecordingMeta) -> Result<RawRecording> {
    RawRecording::new(
        meta.sample_rate_hz,
        channels,
        meta.motion_label.map(ClassLabel),
        meta.trial_id,
    )
}

pub fn read_recording_files(csv_path: &Path, meta_path: &Path) -> Result<RawRecording> {
    let channels = parse_recording_csv(&std::fs::read_to_string(csv_path)?)
        .map_err(|e| Error::parse(format!("{}: {e}", csv_path.display())))?;
    let meta = parse_recording_meta(&std::fs::read_to_string(meta_path)?)
        .map_err(|e| Error::parse(format!("{}: {e}", meta_path.display())))?;
    recording_from_parts(channels, &meta)
}

/// Writes a recording CSV with `ch1..chD` headers.
pub fn write_recording_csv(recording: &RawRecording, mut writer: impl Write) -> Result<()> {
    let header: Vec<String> = (1..=recording.num_channels())
        .map(|i| format!("ch{i}"))
        .collect();
    writeln!(writer, "{}", header.join(","))?;
    for i in 0..recording.len() {
        let fields: Vec<String> = recording
            .channels()
            .iter()
            .map(|c| format!("{}", c[i]))
            .collect();
        writeln!(writer, "{}", fields.join(","))?;
    }
    Ok(())
}
