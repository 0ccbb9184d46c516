//! Binary fractions `0.b_1 b_2 ... b_M`, most significant digit first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest digit count whose fraction is exactly representable in an `f64`.
pub const MAX_DIGITS: u32 = 52;

/// An `M`-digit binary fraction such as the scaled eigenvalue `s` or a
/// measurement result `R`.
///
/// Stored as the integer numerator over `2^M`, so `value()` is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitString {
    numerator: u64,
    len: u32,
}

impl DigitString {
    /// Builds from bits `b_1 ... b_M` (each 0 or 1), most significant first.
    pub fn new(bits: &[u8]) -> Result<Self> {
        let len = check_len(bits.len())?;
        let mut numerator = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(invalid(format!("bit {} is {b}, expected 0 or 1", i + 1)));
            }
            numerator = (numerator << 1) | u64::from(b);
        }
        Ok(Self { numerator, len })
    }

    pub fn from_numerator(numerator: u64, len: u32) -> Result<Self> {
        check_len(len as usize)?;
        if numerator >> len != 0 {
            return Err(invalid(format!(
                "numerator {numerator} does not fit in {len} digits"
            )));
        }
        Ok(Self { numerator, len })
    }

    pub fn zeros(len: u32) -> Result<Self> {
        Self::from_numerator(0, len)
    }

    /// First `len` digits of `s`, i.e. `floor(s 2^M) / 2^M` taken modulo 1.
    pub fn truncated(s: f64, len: u32) -> Result<Self> {
        check_len(len as usize)?;
        check_fraction(s)?;
        let scaled = (s * pow2(len)).floor() as u64;
        Ok(Self {
            numerator: scaled & mask(len),
            len,
        })
    }

    /// The `len`-digit fraction nearest to `s`, taken modulo 1.
    pub fn nearest(s: f64, len: u32) -> Result<Self> {
        check_len(len as usize)?;
        check_fraction(s)?;
        let scaled = (s * pow2(len)).round() as u64;
        Ok(Self {
            numerator: scaled & mask(len),
            len,
        })
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    /// Digit `b_l` for `1 <= l <= M`.
    pub fn bit(&self, l: u32) -> u8 {
        assert!(
            l >= 1 && l <= self.len,
            "digit index {l} out of 1..={}",
            self.len
        );
        ((self.numerator >> (self.len - l)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (1..=self.len).map(|l| self.bit(l)).collect()
    }

    /// `sum_l b_l 2^-l`, in `[0, 1 - 2^-M]`.
    pub fn value(&self) -> f64 {
        self.numerator as f64 / pow2(self.len)
    }

    /// The dyadic complement `1 - R` (modulo 1) with the same digit count.
    pub fn complement(&self) -> Self {
        Self {
            numerator: self.numerator.wrapping_neg() & mask(self.len),
            len: self.len,
        }
    }

    /// Bit mask of the digits where `self` and `other` differ (bit `M - l` for digit `l`).
    pub(crate) fn differing_digits(&self, other: &Self) -> u64 {
        debug_assert_eq!(self.len, other.len);
        self.numerator ^ other.numerator
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("0.")?;
        for b in self.bits() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for DigitString {
    type Err = Error;

    /// Accepts `"0.101"`, `".101"` or `"101"`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let digits = t
            .strip_prefix("0.")
            .or_else(|| t.strip_prefix('.'))
            .unwrap_or(t);
        let bits = digits
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(invalid(format!(
                    "'{other}' is not a binary digit in \"{s}\""
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&bits)
    }
}

pub(crate) fn pow2(n: u32) -> f64 {
    (2.0f64).powi(n as i32)
}

fn mask(len: u32) -> u64 {
    if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

fn check_len(len: usize) -> Result<u32> {
    if len == 0 || len > MAX_DIGITS as usize {
        return Err(invalid(format!(
            "digit count {len} outside 1..={MAX_DIGITS}"
        )));
    }
    Ok(len as u32)
}

fn check_fraction(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(invalid(format!("fraction {s} outside [0, 1]")));
    }
    Ok(())
}
