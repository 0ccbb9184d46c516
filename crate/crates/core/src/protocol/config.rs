use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::digits::{pow2, MAX_DIGITS};
use crate::error::{invalid, Result};
use crate::scale::ScaleMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coverage {
    AllDigits,
    /// Only the most significant half of the digits.
    LeadingHalf,
}

/// Digits `(previous boundary, ceil-ish(fraction * M)]` are repeated `reps` times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionTier {
    pub fraction: f64,
    pub reps: u32,
}

/// Repetition-code error correction: each digit is measured an odd number
/// of times and the majority outcome is kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EcStrategy {
    None,
    StrategyI {
        reps: u32,
        coverage: Coverage,
    },
    /// Tiers apply from the most significant digit down; remaining digits
    /// are measured once.
    StrategyII {
        tiers: Vec<RepetitionTier>,
    },
}

impl EcStrategy {
    /// Three repetitions on every digit.
    pub fn strategy_i_all() -> Self {
        EcStrategy::StrategyI {
            reps: 3,
            coverage: Coverage::AllDigits,
        }
    }

    /// Three repetitions on the leading half of the digits.
    pub fn strategy_i_leading_half() -> Self {
        EcStrategy::StrategyI {
            reps: 3,
            coverage: Coverage::LeadingHalf,
        }
    }

    /// 7 repetitions for the leading M/8 digits, 5 for the next M/8 and 3
    /// for the next M/4.
    pub fn strategy_ii() -> Self {
        EcStrategy::StrategyII {
            tiers: vec![
                RepetitionTier {
                    fraction: 0.125,
                    reps: 7,
                },
                RepetitionTier {
                    fraction: 0.125,
                    reps: 5,
                },
                RepetitionTier {
                    fraction: 0.25,
                    reps: 3,
                },
            ],
        }
    }

    /// Parses the CLI names `none`, `s1`, `s1-half` and `s2`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "none" => Ok(EcStrategy::None),
            "s1" => Ok(Self::strategy_i_all()),
            "s1-half" => Ok(Self::strategy_i_leading_half()),
            "s2" => Ok(Self::strategy_ii()),
            other => Err(invalid(format!(
                "unknown error-correction strategy '{other}' (expected none, s1, s1-half, s2)"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            EcStrategy::None => "none".into(),
            EcStrategy::StrategyI {
                reps: 3,
                coverage: Coverage::AllDigits,
            } => "s1".into(),
            EcStrategy::StrategyI {
                reps: 3,
                coverage: Coverage::LeadingHalf,
            } => "s1-half".into(),
            s if *s == Self::strategy_ii() => "s2".into(),
            EcStrategy::StrategyI { reps, coverage } => match coverage {
                Coverage::AllDigits => format!("s1x{reps}"),
                Coverage::LeadingHalf => format!("s1x{reps}-half"),
            },
            EcStrategy::StrategyII { .. } => "s2-custom".into(),
        }
    }

    fn tiers(&self) -> Vec<RepetitionTier> {
        match self {
            EcStrategy::None => vec![],
            EcStrategy::StrategyI { reps, coverage } => vec![RepetitionTier {
                fraction: match coverage {
                    Coverage::AllDigits => 1.0,
                    Coverage::LeadingHalf => 0.5,
                },
                reps: *reps,
            }],
            EcStrategy::StrategyII { tiers } => tiers.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tiers = self.tiers();
        let mut total = 0.0;
        for t in &tiers {
            if t.reps == 0 || t.reps % 2 == 0 {
                return Err(invalid(format!(
                    "repetition count {} must be odd and at least 1",
                    t.reps
                )));
            }
            if !(t.fraction.is_finite() && t.fraction >= 0.0) {
                return Err(invalid(format!(
                    "tier fraction {} must be nonnegative",
                    t.fraction
                )));
            }
            total += t.fraction;
        }
        if total > 1.0 + 1e-12 {
            return Err(invalid(format!("tier fractions sum to {total} > 1")));
        }
        Ok(())
    }

    /// Repetitions per digit, indexed by `l - 1` (most significant first).
    ///
    /// Tier boundaries sit at `round(cumulative fraction * M)`, halves
    /// rounded up.
    pub fn repetitions(&self, digits: u32) -> Vec<u32> {
        let mut reps = vec![1u32; digits as usize];
        let mut cumulative = 0.0;
        let mut start = 0usize;
        for tier in self.tiers() {
            cumulative += tier.fraction;
            let end = ((cumulative * digits as f64 + 0.5).floor() as usize).min(digits as usize);
            for r in reps.iter_mut().take(end).skip(start) {
                *r = tier.reps;
            }
            start = start.max(end);
        }
        reps
    }
}

impl fmt::Display for EcStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Number of digits `M`.
    pub digits: u32,
    pub scale: ScaleMap,
    /// Duration of one preparation plus readout (s).
    pub tau_m: f64,
    /// Probability that a single repetition's outcome is flipped.
    pub error_p: f64,
    pub ec: EcStrategy,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(digits: u32, scale: ScaleMap) -> Self {
        Self {
            digits,
            scale,
            tau_m: 0.0,
            error_p: 0.0,
            ec: EcStrategy::None,
            seed: 0,
        }
    }

    pub fn with_tau_m(mut self, tau_m: f64) -> Self {
        self.tau_m = tau_m;
        self
    }

    pub fn with_error_p(mut self, p: f64) -> Self {
        self.error_p = p;
        self
    }

    pub fn with_ec(mut self, ec: EcStrategy) -> Self {
        self.ec = ec;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_digits(mut self, digits: u32) -> Self {
        self.digits = digits;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.digits == 0 || self.digits > MAX_DIGITS {
            return Err(invalid(format!(
                "digit count {} outside 1..={MAX_DIGITS}",
                self.digits
            )));
        }
        if !(self.tau_m.is_finite() && self.tau_m >= 0.0) {
            return Err(invalid(format!(
                "measurement time {} must be >= 0",
                self.tau_m
            )));
        }
        if !(0.0..=1.0).contains(&self.error_p) {
            return Err(invalid(format!(
                "error probability {} outside [0, 1]",
                self.error_p
            )));
        }
        self.ec.validate()
    }

    /// Longest interaction time `t_1 = pi 2^M / alpha = pi 2^M / (2 f delta0)`.
    pub fn t1(&self) -> f64 {
        PI * pow2(self.digits) / self.scale.alpha()
    }

    /// `t_j = t_1 2^(1-j)`.
    pub fn interaction_time(&self, step: u32) -> f64 {
        self.t1() / pow2(step - 1)
    }

    /// Repetitions of step `j`, which reads digit `M + 1 - j`.
    pub fn step_repetitions(&self) -> Vec<u32> {
        let mut reps = self.ec.repetitions(self.digits);
        reps.reverse();
        reps
    }
}
