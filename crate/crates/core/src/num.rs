//! Fixed-point decimal numbers.
//!
//! Table values are either integers or reals with a configured number of
//! decimals, so every number is stored as an integer count of `10^-scale`
//! units. Sums are exact, and averages are rounded once, half away from zero.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug)]
pub struct Fixed {
    units: i64,
    scale: u8,
}

const POW10: [i128; 19] = {
    let mut t = [1i128; 19];
    let mut i = 1;
    while i < 19 {
        t[i] = t[i - 1] * 10;
        i += 1;
    }
    t
};

pub(crate) fn pow10(exp: u8) -> i128 {
    POW10[exp as usize]
}

/// Integer division rounding half away from zero.
pub(crate) fn div_round(num: i128, den: i128) -> i128 {
    debug_assert!(den != 0);
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let q = num / den;
    let r = num % den;
    if 2 * r.abs() >= den {
        q + num.signum()
    } else {
        q
    }
}

impl Fixed {
    pub const fn new(units: i64, scale: u8) -> Self {
        Fixed { units, scale }
    }

    pub const fn from_int(v: i64) -> Self {
        Fixed { units: v, scale: 0 }
    }

    pub fn units(&self) -> i64 {
        self.units
    }

    pub fn scale(&self) -> u8 {
        self.scale
    }

    pub fn to_f64(&self) -> f64 {
        self.units as f64 / pow10(self.scale) as f64
    }

    /// Rounds an `f64` to `scale` decimals.
    pub fn from_f64(v: f64, scale: u8) -> Self {
        let scaled = v * pow10(scale) as f64;
        Fixed::new(scaled.round() as i64, scale)
    }

    /// Re-expresses the number with `scale` decimals, rounding if it shrinks.
    pub fn rescale(&self, scale: u8) -> Self {
        match scale.cmp(&self.scale) {
            Ordering::Equal => *self,
            Ordering::Greater => Fixed::new((self.units as i128 * pow10(scale - self.scale)) as i64, scale),
            Ordering::Less => {
                Fixed::new(div_round(self.units as i128, pow10(self.scale - scale)) as i64, scale)
            }
        }
    }

    /// Exact quotient `sum / count` rounded to `scale` decimals, where `sum`
    /// is a count of units at `sum_scale`.
    pub fn ratio(sum: i128, sum_scale: u8, count: i128, scale: u8) -> Self {
        let (num, den) = if scale >= sum_scale {
            (sum * pow10(scale - sum_scale), count)
        } else {
            (sum, count * pow10(sum_scale - scale))
        };
        Fixed::new(div_round(num, den) as i64, scale)
    }

    fn cmp_value(&self, other: &Fixed) -> Ordering {
        let s = self.scale.max(other.scale);
        let a = self.units as i128 * pow10(s - self.scale);
        let b = other.units as i128 * pow10(s - other.scale);
        a.cmp(&b)
    }

    /// Parses a plain decimal literal such as `-12`, `3.50` or `1,234.5`.
    /// The scale is the number of digits after the point.
    pub fn parse(text: &str) -> Option<Fixed> {
        let t: String = text.trim().chars().filter(|c| *c != ',').collect();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(&t)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.len() > 18
            || int_part.len() > 18
        {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let units: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
        Some(Fixed::new(if neg { -units } else { units }, frac_part.len() as u8))
    }
}

impl PartialEq for Fixed {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl Eq for Fixed {}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fixed {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_value(other)
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.units);
        }
        let p = pow10(self.scale) as u128;
        let abs = (self.units as i128).unsigned_abs();
        let sign = if self.units < 0 { "-" } else { "" };
        write!(f, "{sign}{}.{:0width$}", abs / p, abs % p, width = self.scale as usize)
    }
}

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Fixed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Fixed::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad number `{s}`")))
    }
}
