//! Hexadecimal floating-point literals (`0x1.999999999999ap-4`), the bit-exact
//! text form used for every binary64/binary32 value that crosses a file or
//! process boundary.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FloatLiteralError {
    #[error("empty numeric literal")]
    Empty,
    #[error("malformed numeric literal `{0}`")]
    Malformed(String),
    #[error("hex-float literal `{0}` is not exactly representable as binary64")]
    Inexact(String),
    #[error("literal `{0}` is not a finite number")]
    NonFinite(String),
}

const FRAC_BITS: u32 = 52;
const EXP_BIAS: i64 = 1023;
const FRAC_MASK: u64 = (1 << FRAC_BITS) - 1;

/// Renders `x` the way C's `%a` does: `0x1.8p+1`, `-0x0p+0`, `0x0.0000000000001p-1022`.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> FRAC_BITS) & 0x7ff) as i64;
    let frac = bits & FRAC_MASK;
    let frac_digits = format!("{frac:013x}");
    let frac_digits = frac_digits.trim_end_matches('0');
    let dot = if frac_digits.is_empty() { "" } else { "." };
    match (biased, frac) {
        (0, 0) => format!("{sign}0x0p+0"),
        (0, _) => format!("{sign}0x0{dot}{frac_digits}p-1022"),
        _ => format!("{sign}0x1{dot}{frac_digits}p{:+}", biased - EXP_BIAS),
    }
}

/// Parses a hex-float literal. The literal must denote a binary64 value exactly;
/// rounding is refused so that fixtures cannot silently drift.
pub fn parse_hex_f64(text: &str) -> Result<f64, FloatLiteralError> {
    let malformed = || FloatLiteralError::Malformed(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(FloatLiteralError::Empty);
    }
    let (negative, s) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let s = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .ok_or_else(malformed)?;
    let (digits, exp_text) = s.split_once(['p', 'P']).ok_or_else(malformed)?;
    let exp: i64 = exp_text.parse().map_err(|_| malformed())?;

    let mut mantissa: u128 = 0;
    let mut exp2: i64 = 0;
    let mut seen_digit = false;
    let mut seen_dot = false;
    let mut saturated = false;
    for ch in digits.chars() {
        if ch == '.' {
            if seen_dot {
                return Err(malformed());
            }
            seen_dot = true;
            continue;
        }
        let d = ch.to_digit(16).ok_or_else(malformed)? as u128;
        seen_digit = true;
        if saturated || mantissa >> 124 != 0 {
            saturated = true;
            if d != 0 {
                return Err(FloatLiteralError::Inexact(text.to_string()));
            }
            if !seen_dot {
                exp2 += 4;
            }
            continue;
        }
        mantissa = (mantissa << 4) | d;
        if seen_dot {
            exp2 -= 4;
        }
    }
    if !seen_digit {
        return Err(malformed());
    }
    if exp.abs() > 1 << 20 {
        return if mantissa == 0 {
            Ok(if negative { -0.0 } else { 0.0 })
        } else {
            Err(FloatLiteralError::Inexact(text.to_string()))
        };
    }
    compose_f64(negative, mantissa, exp2 + exp)
        .ok_or_else(|| FloatLiteralError::Inexact(text.to_string()))
}

/// `(-1)^negative * mantissa * 2^exp2` as binary64, or `None` when inexact.
fn compose_f64(negative: bool, mut mantissa: u128, mut exp2: i64) -> Option<f64> {
    let sign = (negative as u64) << 63;
    if mantissa == 0 {
        return Some(f64::from_bits(sign));
    }
    let tz = mantissa.trailing_zeros();
    mantissa >>= tz;
    exp2 += tz as i64;
    let len = 128 - mantissa.leading_zeros() as i64;
    if len > FRAC_BITS as i64 + 1 {
        return None;
    }
    let top = exp2 + len - 1;
    if top > EXP_BIAS {
        return None;
    }
    let bits = if top >= 1 - EXP_BIAS {
        let frac = ((mantissa << (FRAC_BITS as i64 - (len - 1))) as u64) & FRAC_MASK;
        (((top + EXP_BIAS) as u64) << FRAC_BITS) | frac
    } else {
        let shift = exp2 + EXP_BIAS - 1 + FRAC_BITS as i64;
        if shift < 0 {
            return None;
        }
        (mantissa << shift) as u64
    };
    Some(f64::from_bits(sign | bits))
}

/// Parses either a hex-float or a decimal literal. Decimal input is rounded to
/// nearest; non-finite values are rejected.
pub fn parse_f64(text: &str) -> Result<f64, FloatLiteralError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(FloatLiteralError::Empty);
    }
    let unsigned = s.trim_start_matches(['+', '-']);
    let value = if unsigned.starts_with("0x") || unsigned.starts_with("0X") {
        parse_hex_f64(s)?
    } else {
        s.parse::<f64>()
            .map_err(|_| FloatLiteralError::Malformed(s.to_string()))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(FloatLiteralError::NonFinite(s.to_string()))
    }
}

/// True when `x` is finite and survives a round trip through binary32.
pub fn is_binary32(x: f64) -> bool {
    x.is_finite() && (x as f32) as f64 == x
}
