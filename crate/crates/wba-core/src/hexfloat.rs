//! C99-style hexadecimal float encoding.
//!
//! JSON has no lossless decimal representation contract for doubles, so
//! wire formats in this crate carry `f64` values as hex-float strings
//! ("0x1.5bf0a8b145769p+1"). Encoding is canonical (13 mantissa digits);
//! decoding also accepts trimmed digits and plain JSON numbers.

use crate::error::{Error, Result};

/// Canonical hex-float string for `v`. Round-trips bit-exactly through
/// [`decode`] for every finite and non-finite double.
pub fn encode(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    let sign = if v.is_sign_negative() { "-" } else { "" };
    if v.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = v.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 {
        if mantissa == 0 {
            return format!("{sign}0x0p+0");
        }
        // Subnormal: 0.mantissa * 2^-1022.
        return format!("{sign}0x0.{mantissa:013x}p-1022");
    }
    let exp = exp_bits - 1023;
    format!("{sign}0x1.{mantissa:013x}p{exp:+}")
}

/// Parse a hex-float string produced by [`encode`] (or a trimmed variant).
pub fn decode(s: &str) -> Result<f64> {
    let err = |m: &str| Error::HexFloat(format!("{m}: {s:?}"));
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    match rest {
        "inf" => return Ok(if neg { f64::NEG_INFINITY } else { f64::INFINITY }),
        "nan" => return Ok(f64::NAN),
        _ => {}
    }
    let rest = rest
        .strip_prefix("0x")
        .or_else(|| rest.strip_prefix("0X"))
        .ok_or_else(|| err("missing 0x prefix"))?;
    let pidx = rest
        .find(['p', 'P'])
        .ok_or_else(|| err("missing p exponent"))?;
    let (mant_str, exp_str) = rest.split_at(pidx);
    let exp: i64 = exp_str[1..]
        .parse()
        .map_err(|_| err("bad exponent digits"))?;
    let (int_str, frac_str) = match mant_str.find('.') {
        Some(d) => (&mant_str[..d], &mant_str[d + 1..]),
        None => (mant_str, ""),
    };
    if frac_str.len() > 13 {
        return Err(err("more than 13 fractional hex digits"));
    }
    let leading = match int_str {
        "0" => 0u64,
        "1" => 1u64,
        _ => return Err(err("integer part must be 0 or 1")),
    };
    let mut frac = 0u64;
    for c in frac_str.chars() {
        frac = frac
            .checked_mul(16)
            .ok_or_else(|| err("fraction overflow"))?
            + u64::from(c.to_digit(16).ok_or_else(|| err("bad hex digit"))?);
    }
    frac <<= 4 * (13 - frac_str.len());

    let bits = if leading == 0 {
        if frac == 0 {
            0u64
        } else if exp == -1022 {
            frac // subnormal
        } else {
            return Err(err("denormal form requires exponent -1022"));
        }
    } else {
        let biased = exp + 1023;
        if !(1..=2046).contains(&biased) {
            return Err(err("exponent out of range"));
        }
        ((biased as u64) << 52) | frac
    };
    let v = f64::from_bits(bits);
    Ok(if neg { -v } else { v })
}

/// Serde adapter: serialize an `f64` as a hex-float string; deserialize
/// from either a hex-float string or a plain JSON number.
pub mod serde_hex {
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::encode(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = f64;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a hex-float string or a number")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                super::decode(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}
