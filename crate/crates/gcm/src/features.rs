//! Envelope features for multi-channel recordings.
//!
//! The pipeline is fixed: full-wave rectification, a causal second-order
//! Butterworth low-pass, then dropping a leading fraction of samples so the
//! classifier never sees the movement-onset (and filter warm-up) transient.
//! Every retained sample becomes one feature vector across channels.

use crate::data::{ClassLabel, FeatureVector, TrialDataset};
use crate::error::{Error, Result};

/// Multi-channel time series plus acquisition metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecording {
    sample_rate_hz: f64,
    channels: Vec<Vec<f64>>,
    motion_label: Option<ClassLabel>,
    trial_id: u32,
}

impl RawRecording {
    /// Validates channel geometry: at least one channel, all the same length,
    /// at least two samples, finite amplitudes, positive sample rate.
    pub fn new(
        sample_rate_hz: f64,
        channels: Vec<Vec<f64>>,
        motion_label: Option<ClassLabel>,
        trial_id: u32,
    ) -> Result<Self> {
        if !sample_rate_hz.is_finite() || sample_rate_hz <= 0.0 {
            return Err(Error::config(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if channels.is_empty() {
            return Err(Error::dimension("recording needs at least one channel"));
        }
        let len = channels[0].len();
        if len < 2 {
            return Err(Error::dimension(
                "recording channels need at least two samples",
            ));
        }
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::dimension("recording channels differ in length"));
        }
        if channels.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid_state(
                "recording contains non-finite samples",
            ));
        }
        Ok(Self {
            sample_rate_hz,
            channels,
            motion_label,
            trial_id,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false // validated recordings always hold samples
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn motion_label(&self) -> Option<ClassLabel> {
        self.motion_label
    }

    pub fn trial_id(&self) -> u32 {
        self.trial_id
    }

    fn with_channels(&self, channels: Vec<Vec<f64>>) -> Self {
        Self {
            sample_rate_hz: self.sample_rate_hz,
            channels,
            motion_label: self.motion_label,
            trial_id: self.trial_id,
        }
    }
}

/// Normalized second-order digital filter section (`a0 = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterCoeffs {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl FilterCoeffs {
    /// Validates stability (poles strictly inside the unit circle, via the
    /// Schur triangle `|a2| < 1`, `|a1| < 1 + a2`) and unit DC gain.
    pub fn new(b0: f64, b1: f64, b2: f64, a1: f64, a2: f64) -> Result<Self> {
        for (name, v) in [("b0", b0), ("b1", b1), ("b2", b2), ("a1", a1), ("a2", a2)] {
            if !v.is_finite() {
                return Err(Error::config(format!("coefficient {name} is not finite")));
            }
        }
        if a2.abs() >= 1.0 || a1.abs() >= 1.0 + a2 {
            return Err(Error::config(
                "filter poles are not strictly inside the unit circle",
            ));
        }
        let dc = (b0 + b1 + b2) / (1.0 + a1 + a2);
        if (dc - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "DC gain must be 1 within 1e-9, got {dc}"
            )));
        }
        Ok(Self { b0, b1, b2, a1, a2 })
    }

    /// Magnitude response at `freq_hz` for the given sample rate.
    pub fn magnitude_at(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        use nalgebra::Complex;
        let omega = 2.0 * std::f64::consts::PI * freq_hz / sample_rate_hz;
        let z_inv = Complex::new(0.0, -omega).exp();
        let num = Complex::new(self.b0, 0.0)
            + Complex::new(self.b1, 0.0) * z_inv
            + Complex::new(self.b2, 0.0) * z_inv * z_inv;
        let den = Complex::new(1.0, 0.0)
            + Complex::new(self.a1, 0.0) * z_inv
            + Complex::new(self.a2, 0.0) * z_inv * z_inv;
        (num / den).norm()
    }
}

/// Replaces every sample by its absolute value.
pub fn rectify(recording: &RawRecording) -> RawRecording {
    let channels = recording
        .channels
        .iter()
        .map(|c| c.iter().map(|v| v.abs()).collect())
        .collect();
    recording.with_channels(channels)
}

/// Designs a second-order Butterworth low-pass section.
///
/// Bilinear transform of the analog prototype `1 / (s^2 + sqrt(2) s + 1)`
/// with frequency prewarping, so the digital magnitude hits exactly
/// -3.0103 dB at the requested cutoff.
pub fn butterworth2_lowpass(cutoff_hz: f64, sample_rate_hz: f64) -> Result<FilterCoeffs> {
    if !sample_rate_hz.is_finite() || sample_rate_hz <= 0.0 {
        return Err(Error::config(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    if !cutoff_hz.is_finite() || cutoff_hz <= 0.0 || cutoff_hz >= sample_rate_hz / 2.0 {
        return Err(Error::config(format!(
            "cutoff must lie in (0, {}), got {cutoff_hz}",
            sample_rate_hz / 2.0
        )));
    }
    // Prewarped analog cutoff, normalized so the bilinear map needs no
    // explicit sampling-period factor.
    let w = (std::f64::consts::PI * cutoff_hz / sample_rate_hz).tan();
    let den = 1.0 + std::f64::consts::SQRT_2 * w + w * w;
    let b0 = w * w / den;
    FilterCoeffs::new(
        b0,
        2.0 * b0,
        b0,
        2.0 * (w * w - 1.0) / den,
        (1.0 - std::f64::consts::SQRT_2 * w + w * w) / den,
    )
}

/// Causal single-pass filtering with zero initial state, direct form II
/// transposed. Output length equals input length.
pub fn filter_forward(coeffs: &FilterCoeffs, series: &[f64]) -> Vec<f64> {
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    series
        .iter()
        .map(|&x| {
            let y = coeffs.b0 * x + s1;
            s1 = coeffs.b1 * x - coeffs.a1 * y + s2;
            s2 = coeffs.b2 * x - coeffs.a2 * y;
            y
        })
        .collect()
}

/// Drops the first `floor(fraction * len)` samples from every channel.
pub fn trim_transient(recording: &RawRecording, fraction: f64) -> Result<RawRecording> {
    if !fraction.is_finite() || !(0.0..1.0).contains(&fraction) {
        return Err(Error::config(format!(
            "trim fraction must lie in [0, 1), got {fraction}"
        )));
    }
    let drop = (fraction * recording.len() as f64).floor() as usize;
    let channels = recording
        .channels
        .iter()
        .map(|c| c[drop..].to_vec())
        .collect();
    Ok(recording.with_channels(channels))
}

/// Full pipeline: rectify, low-pass at `cutoff_hz`, trim the leading
/// `trim_fraction`, then emit one feature vector per remaining sample. The
/// recording's motion label, when present, is copied to every sample.
pub fn extract_features(
    recording: &RawRecording,
    cutoff_hz: f64,
    trim_fraction: f64,
) -> Result<TrialDataset> {
    let coeffs = butterworth2_lowpass(cutoff_hz, recording.sample_rate_hz)?;
    let rectified = rectify(recording);
    let filtered = rectified.with_channels(
        rectified
            .channels
            .iter()
            .map(|c| filter_forward(&coeffs, c))
            .collect(),
    );
    let trimmed = trim_transient(&filtered, trim_fraction)?;
    if trimmed.is_empty() {
        return Err(Error::config(
            "trimming removed every sample from the recording",
        ));
    }

    let dim = trimmed.num_channels();
    let features = (0..trimmed.len())
        .map(|i| FeatureVector::new((0..dim).map(|ch| trimmed.channels[ch][i]).collect()))
        .collect::<Result<Vec<_>>>()?;
    let labels = trimmed
        .motion_label
        .map(|label| vec![label; features.len()]);
    TrialDataset::new(trimmed.trial_id, features, labels)
}
