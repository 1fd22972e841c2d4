// SPDX-License-Identifier: Apache-2.0

//! Report percentages, half-up rounded to a fixed number of decimals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("total is zero")]
    ZeroTotal,
    #[error("{part} exceeds {total}")]
    PartExceedsTotal { part: u64, total: u64 },
    #[error("baseline time must be positive, got {0}")]
    NonPositiveBaseline(f64),
    #[error("time must be finite and non-negative, got {0}")]
    BadTime(f64),
}

/// A fixed-point percentage: `scaled / 10^decimals`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Percentage {
    scaled: i64,
    decimals: u32,
}

impl Percentage {
    pub fn from_scaled(scaled: i64, decimals: u32) -> Self {
        Self { scaled, decimals }
    }

    pub fn scaled(self) -> i64 {
        self.scaled
    }

    pub fn decimals(self) -> u32 {
        self.decimals
    }

    pub fn value(self) -> f64 {
        self.scaled as f64 / 10f64.powi(self.decimals as i32)
    }

    /// Exact `100 * num / den`, half-up at `decimals`. `den > 0`.
    fn ratio(num: u64, den: u64, decimals: u32) -> Self {
        let n = num as u128 * 100 * 10u128.pow(decimals);
        let d = den as u128;
        let mut q = n / d;
        if 2 * (n % d) >= d {
            q += 1;
        }
        Self::from_scaled(q as i64, decimals)
    }

    fn from_f64(v: f64, decimals: u32) -> Self {
        let s = v * 10f64.powi(decimals as i32);
        // Half away from zero; rounds half-up on the non-negative values
        // reports normally carry.
        Self::from_scaled(s.round() as i64, decimals)
    }
}

impl fmt::Display for Percentage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = 10i64.pow(self.decimals);
        let sign = if self.scaled < 0 { "-" } else { "" };
        let a = self.scaled.abs();
        if self.decimals == 0 {
            write!(f, "{sign}{a}")
        } else {
            write!(
                f,
                "{sign}{}.{:0w$}",
                a / p,
                a % p,
                w = self.decimals as usize
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a fixed-point percentage: `{0}`")]
pub struct PercentageParseError(String);

impl FromStr for Percentage {
    type Err = PercentageParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PercentageParseError(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty()
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let decimals = frac.len() as u32;
        let digits = format!("{int}{frac}");
        let v: i64 = digits.parse().map_err(|_| bad())?;
        Ok(Self::from_scaled(if neg { -v } else { v }, decimals))
    }
}

impl Serialize for Percentage {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Percentage {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub const COVERAGE_DECIMALS: u32 = 3;
pub const REDUCTION_DECIMALS: u32 = 2;

/// Detected over injected faults, 3 decimals.
pub fn fault_coverage(detected: u64, total: u64) -> Result<Percentage, MetricError> {
    if total == 0 {
        return Err(MetricError::ZeroTotal);
    }
    if detected > total {
        return Err(MetricError::PartExceedsTotal {
            part: detected,
            total,
        });
    }
    Ok(Percentage::ratio(detected, total, COVERAGE_DECIMALS))
}

/// Share of baseline injections avoided, 2 decimals.
pub fn reduction_percentage(
    baseline_total: u64,
    pruned_total: u64,
) -> Result<Percentage, MetricError> {
    if baseline_total == 0 {
        return Err(MetricError::ZeroTotal);
    }
    if pruned_total > baseline_total {
        return Err(MetricError::PartExceedsTotal {
            part: pruned_total,
            total: baseline_total,
        });
    }
    Ok(Percentage::ratio(
        baseline_total - pruned_total,
        baseline_total,
        REDUCTION_DECIMALS,
    ))
}

/// Share of baseline time saved, 2 decimals. Negative when the pruned run
/// was slower.
pub fn time_saving_percentage(
    baseline_time: f64,
    pruned_time: f64,
) -> Result<Percentage, MetricError> {
    if !baseline_time.is_finite() || baseline_time <= 0.0 {
        return Err(MetricError::NonPositiveBaseline(baseline_time));
    }
    if !pruned_time.is_finite() || pruned_time < 0.0 {
        return Err(MetricError::BadTime(pruned_time));
    }
    Ok(Percentage::from_f64(
        100.0 * (baseline_time - pruned_time) / baseline_time,
        REDUCTION_DECIMALS,
    ))
}
