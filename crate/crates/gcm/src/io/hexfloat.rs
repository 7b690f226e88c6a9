//! Exact hexadecimal encoding of finite `f64` values.
//!
//! State files store every hyperparameter as a C99-style hex-float literal
//! (`-0x1.5bf0a8b145769p+1`), which round-trips the binary value exactly and
//! stays human-readable. Only finite values are representable; model
//! invariants already exclude NaN and infinities.

use crate::error::{Error, Result};

/// Encodes a finite `f64` as a hex-float literal.
///
/// Normal values use a `0x1.<13 hex digits>p<exp>` mantissa, subnormals
/// `0x0.<13 hex digits>p-1022`, zero `0x0p+0`; the sign is prefixed.
pub fn encode_hex_f64(value: f64) -> Result<String> {
    if !value.is_finite() {
        return Err(Error::numerical(format!(
            "cannot encode non-finite value {value} as hex float"
        )));
    }
    let bits = value.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mantissa == 0 {
        return Ok(format!("{sign}0x0p+0"));
    }
    if exp_bits == 0 {
        // Subnormal: leading digit 0, fixed exponent -1022.
        return Ok(format!("{sign}0x0.{mantissa:013x}p-1022"));
    }
    let exp = exp_bits - 1023;
    Ok(format!("{sign}0x1.{mantissa:013x}p{exp:+}"))
}

/// Parses a hex-float literal produced by [`encode_hex_f64`] (and the usual
/// C99 variants with up to 13 fraction digits). Never panics on malformed
/// input.
pub fn parse_hex_f64(s: &str) -> Result<f64> {
    let fail = |why: &str| Error::parse(format!("invalid hex float {s:?}: {why}"));

    let mut rest = s.trim();
    let negative = if let Some(r) = rest.strip_prefix('-') {
        rest = r;
        true
    } else {
        if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        false
    };
    rest = rest
        .strip_prefix("0x")
        .or_else(|| rest.strip_prefix("0X"))
        .ok_or_else(|| fail("missing 0x prefix"))?;

    let (mantissa_str, exp_str) = rest
        .split_once(['p', 'P'])
        .ok_or_else(|| fail("missing p exponent"))?;
    let exp: i32 = exp_str
        .parse()
        .map_err(|_| fail("malformed exponent digits"))?;
    if !(-1100..=1100).contains(&exp) {
        return Err(fail("exponent out of f64 range"));
    }

    let (lead_str, frac_str) = match mantissa_str.split_once('.') {
        Some((l, f)) => (l, f),
        None => (mantissa_str, ""),
    };
    let lead: u64 = match lead_str {
        "0" => 0,
        "1" => 1,
        _ => return Err(fail("leading digit must be 0 or 1")),
    };
    if frac_str.len() > 13 {
        return Err(fail("more than 13 fraction digits"));
    }
    if frac_str.is_empty() && lead_str.is_empty() {
        return Err(fail("empty mantissa"));
    }
    let mut frac: u64 = 0;
    for c in frac_str.chars() {
        let d = c.to_digit(16).ok_or_else(|| fail("non-hex digit"))? as u64;
        frac = (frac << 4) | d;
    }
    // Pad to a full 52-bit fraction.
    frac <<= 4 * (13 - frac_str.len());

    // value = (lead + frac / 2^52) * 2^exp, assembled exactly from integers:
    // (lead << 52 | frac) * 2^(exp - 52).
    let int_mantissa = (lead << 52) | frac;
    let magnitude = assemble(int_mantissa, exp - 52)?;
    Ok(if negative { -magnitude } else { magnitude })
}

/// Computes `mantissa * 2^exp` with correct rounding.
///
/// `mantissa` has at most 53 significant bits, so the `f64` conversion is
/// exact and `ldexp` performs the only (correctly rounded) rounding step.
fn assemble(mantissa: u64, exp: i32) -> Result<f64> {
    let value = libm::ldexp(mantissa as f64, exp);
    if value.is_infinite() {
        return Err(Error::parse("hex float overflows f64".to_string()));
    }
    Ok(value)
}
