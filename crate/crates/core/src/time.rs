//! Exact time values.
//!
//! Every deadline comparison in the protocol must be exact, so times are held
//! as a signed count of attoseconds (10^-18 s) rather than as floats. Values
//! are written and parsed as plain decimal strings (`"0.965"`, `"1e-5"`), and
//! any input that is not an exact multiple of one attosecond is refused.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const FRACTION_DIGITS: u32 = 18;
const SCALE: i128 = 10i128.pow(FRACTION_DIGITS);

/// A signed duration or instant in seconds, exact to one attosecond.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Seconds(i128);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseSecondsError {
    #[error("empty time value")]
    Empty,
    #[error("malformed time value {0:?}")]
    Malformed(String),
    #[error("time value {0:?} is not a whole number of attoseconds")]
    Inexact(String),
    #[error("time value {0:?} is out of range")]
    Overflow(String),
}

impl Seconds {
    pub const ZERO: Seconds = Seconds(0);
    /// Smallest representable step.
    pub const TICK: Seconds = Seconds(1);

    pub const fn from_atto(atto: i128) -> Self {
        Seconds(atto)
    }

    pub const fn as_atto(self) -> i128 {
        self.0
    }

    pub const fn from_secs(secs: i64) -> Self {
        Seconds(secs as i128 * SCALE)
    }

    /// `num / 10^exp` seconds, e.g. `from_decimal(5, 3)` is 5 ms.
    pub fn from_decimal(num: i64, exp: u32) -> Self {
        assert!(exp <= FRACTION_DIGITS, "at most 18 fractional digits");
        Seconds(num as i128 * 10i128.pow(FRACTION_DIGITS - exp))
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn abs(self) -> Self {
        Seconds(self.0.abs())
    }

    /// Multiplies by a non-negative integer count.
    pub fn times(self, n: u64) -> Self {
        Seconds(self.0 * n as i128)
    }

    pub fn checked_add(self, other: Seconds) -> Option<Seconds> {
        self.0.checked_add(other.0).map(Seconds)
    }

    pub fn to_f64(self) -> f64 {
        let whole = (self.0 / SCALE) as f64;
        let frac = (self.0 % SCALE) as f64 / SCALE as f64;
        whole + frac
    }
}

impl Add for Seconds {
    type Output = Seconds;
    fn add(self, rhs: Seconds) -> Seconds {
        Seconds(self.0 + rhs.0)
    }
}

impl Sub for Seconds {
    type Output = Seconds;
    fn sub(self, rhs: Seconds) -> Seconds {
        Seconds(self.0 - rhs.0)
    }
}

impl Neg for Seconds {
    type Output = Seconds;
    fn neg(self) -> Seconds {
        Seconds(-self.0)
    }
}

impl fmt::Display for Seconds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / SCALE as u128;
        let frac = abs % SCALE as u128;
        if frac == 0 {
            return write!(f, "{sign}{whole}");
        }
        let digits = format!("{frac:018}");
        write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
    }
}

impl FromStr for Seconds {
    type Err = ParseSecondsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(ParseSecondsError::Empty);
        }
        let malformed = || ParseSecondsError::Malformed(s.to_string());
        let (negative, body) = match s.as_bytes()[0] {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(at) => {
                let exp: i32 = body[at + 1..].parse().map_err(|_| malformed())?;
                (&body[..at], exp)
            }
            None => (body, 0),
        };
        let (int_part, frac_part) = match mantissa.find('.') {
            Some(at) => (&mantissa[..at], &mantissa[at + 1..]),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(malformed());
        }
        if !int_part
            .bytes()
            .chain(frac_part.bytes())
            .all(|b| b.is_ascii_digit())
        {
            return Err(malformed());
        }

        let overflow = || ParseSecondsError::Overflow(s.to_string());
        let digits = format!("{int_part}{frac_part}");
        let digits = digits.trim_start_matches('0');
        let mut value: i128 = 0;
        for d in digits.bytes() {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((d - b'0') as i128))
                .ok_or_else(overflow)?;
        }
        // value * 10^(exponent - frac_len) seconds == value * 10^shift attoseconds
        let shift = exponent as i64 - frac_part.len() as i64 + FRACTION_DIGITS as i64;
        let atto = if value == 0 {
            0
        } else if shift >= 0 {
            let factor = u32::try_from(shift)
                .ok()
                .and_then(|e| 10i128.checked_pow(e))
                .ok_or_else(overflow)?;
            value.checked_mul(factor).ok_or_else(overflow)?
        } else {
            let divisor = u32::try_from(-shift)
                .ok()
                .and_then(|e| 10i128.checked_pow(e))
                .ok_or_else(|| ParseSecondsError::Inexact(s.to_string()))?;
            if value % divisor != 0 {
                return Err(ParseSecondsError::Inexact(s.to_string()));
            }
            value / divisor
        };
        Ok(Seconds(if negative { -atto } else { atto }))
    }
}

impl Serialize for Seconds {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Seconds {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
