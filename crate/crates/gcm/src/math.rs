//! Small numeric helpers used throughout the crate.

use nalgebra::DMatrix;

/// Log-sum-exp of a slice, stable for arbitrarily large-magnitude inputs.
///
/// Returns `-inf` for an empty slice or when every entry is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Normalizes a slice of log-weights into a probability vector in place.
pub fn softmax_in_place(log_weights: &mut [f64]) {
    let lse = log_sum_exp(log_weights);
    for w in log_weights.iter_mut() {
        *w = (*w - lse).exp();
    }
}

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Max-norm relative symmetry check: `|a_ij - a_ji| <= rel_tol * scale`
/// where `scale` is the largest absolute entry (at least 1).
pub fn is_symmetric(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > rel_tol * scale {
                return false;
            }
        }
    }
    true
}

/// Replaces `m` with `(m + m^T) / 2` to suppress asymmetry drift.
pub fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// SplitMix64 step, used to derive decorrelated RNG substreams from a base
/// seed and counter words.
pub fn split_mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with counter words into one substream seed.
///
/// Counter-based so that generation order never matters: the stream for
/// `(seed, words)` is independent of any other `(seed, words')`.
pub fn substream_seed(seed: u64, words: &[u64]) -> u64 {
    let mut acc = split_mix64(seed);
    for &w in words {
        acc = split_mix64(acc ^ split_mix64(w));
    }
    acc
}
