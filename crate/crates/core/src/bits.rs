// SPDX-License-Identifier: Apache-2.0

//! Fixed-width binary values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Widest signal the simulator can represent.
pub const MAX_WIDTH: u32 = 64;

/// A two-state bit vector of 1..=64 bits stored in the low bits of a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bits {
    width: u32,
    value: u64,
}

#[inline]
pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl Bits {
    /// Builds a value, truncating `value` to `width` bits.
    ///
    /// Panics if `width` is outside `1..=64`.
    pub fn new(width: u32, value: u64) -> Self {
        assert!(
            (1..=MAX_WIDTH).contains(&width),
            "bit width {width} outside 1..={MAX_WIDTH}"
        );
        Self {
            width,
            value: value & mask(width),
        }
    }

    /// Like [`Bits::new`] but rejects values that do not fit.
    pub fn checked(width: u32, value: u64) -> Option<Self> {
        if !(1..=MAX_WIDTH).contains(&width) || value & !mask(width) != 0 {
            return None;
        }
        Some(Self { width, value })
    }

    pub fn zero(width: u32) -> Self {
        Self::new(width, 0)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn bit(&self, index: u32) -> bool {
        index < self.width && (self.value >> index) & 1 == 1
    }

    /// Returns a copy with bit `index` inverted.
    pub fn flip(&self, index: u32) -> Self {
        assert!(
            index < self.width,
            "bit {index} out of range for width {}",
            self.width
        );
        Self {
            width: self.width,
            value: self.value ^ (1u64 << index),
        }
    }

    /// Parses an MSB-first string of `0`/`1` digits; `_` separators are ignored.
    pub fn from_binary(text: &str) -> Result<Self, BitsParseError> {
        let digits: Vec<char> = text.trim().chars().filter(|c| *c != '_').collect();
        if digits.is_empty() {
            return Err(BitsParseError::Empty);
        }
        if digits.len() > MAX_WIDTH as usize {
            return Err(BitsParseError::TooWide(digits.len()));
        }
        let mut value = 0u64;
        for c in &digits {
            value <<= 1;
            match c {
                '0' => {}
                '1' => value |= 1,
                other => return Err(BitsParseError::BadDigit(*other)),
            }
        }
        Ok(Self::new(digits.len() as u32, value))
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.width).rev() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = BitsParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_binary(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitsParseError {
    #[error("empty binary literal")]
    Empty,
    #[error("binary literal has {0} digits, maximum is 64")]
    TooWide(usize),
    #[error("invalid binary digit {0:?}")]
    BadDigit(char),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_text_roundtrip() {
        let b = Bits::from_binary("0101").unwrap();
        assert_eq!(b.width(), 4);
        assert_eq!(b.value(), 5);
        assert_eq!(b.to_string(), "0101");
        assert_eq!(Bits::from_binary("1_0").unwrap(), Bits::new(2, 2));
    }

    #[test]
    fn rejects_bad_binary() {
        assert_eq!(Bits::from_binary(""), Err(BitsParseError::Empty));
        assert_eq!(Bits::from_binary("012"), Err(BitsParseError::BadDigit('2')));
        assert!(matches!(
            Bits::from_binary(&"1".repeat(65)),
            Err(BitsParseError::TooWide(65))
        ));
    }

    #[test]
    fn flip_and_mask() {
        let b = Bits::new(3, 0b1111);
        assert_eq!(b.value(), 0b111);
        assert_eq!(b.flip(1).value(), 0b101);
        assert_eq!(Bits::new(64, u64::MAX).flip(63).value(), u64::MAX >> 1);
        assert!(Bits::checked(2, 4).is_none());
        assert!(Bits::checked(2, 3).is_some());
    }
}
