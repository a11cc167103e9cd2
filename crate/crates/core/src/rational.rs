//! Exact time values.
//!
//! Latency arithmetic is done on `Ratio<i64>` so that comparisons against a
//! bound never go through floating point. JSON encodes integral values as
//! plain numbers and fractional ones as `"p/q"` strings; decimal numbers are
//! accepted on input and converted exactly.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = Ratio<i64>;

pub fn from_int(v: u64) -> Rational {
    Rational::from_integer(v as i64)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"3"`, `"1.25"`, `"2e-3"` or `"7/4"` into an exact rational.
pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().ok()?;
        let den: i64 = den.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: i64 = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let pow = 10i64.checked_pow(scale.unsigned_abs())?;
    let mut value = if scale >= 0 {
        Rational::from_integer(digits.checked_mul(pow)?)
    } else {
        Rational::new(digits, pow)
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Rounds `x` to the nearest multiple of 1e-6.
pub fn from_f64_micro(x: f64) -> Rational {
    const SCALE: i64 = 1_000_000;
    Rational::new((x * SCALE as f64).round() as i64, SCALE)
}

pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    if r.is_integer() {
        s.serialize_i64(r.to_integer())
    } else {
        s.serialize_str(&format(r))
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let value = serde_json::Value::deserialize(d)?;
    let text = match &value {
        serde_json::Value::Number(n) => n.to_string(),
        serde_json::Value::String(s) => s.clone(),
        other => return Err(de::Error::custom(format!("expected a number, got {other}"))),
    };
    parse(&text).ok_or_else(|| de::Error::custom(format!("not a rational: {text}")))
}

/// Serde adapter for `Option<Rational>`.
pub mod opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => super::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    #[allow(dead_code)]
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let value = Option::<serde_json::Value>::deserialize(d)?;
        match value {
            None | Some(serde_json::Value::Null) => Ok(None),
            Some(v) => super::deserialize(v).map(Some).map_err(de::Error::custom),
        }
    }
}

/// Wrapper that serializes through this module; handy inside `Vec`s and maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(pub Rational);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        deserialize(d).map(Exact)
    }
}

pub fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}
