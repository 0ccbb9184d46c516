use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::digits::DigitString;
use crate::error::{invalid, Error, Result};
use crate::likelihood::{rotation_fraction, step_probability_unchecked};

use super::timing::{protocol_time, ProtocolTime};
use super::ProtocolConfig;

/// One adaptive step of a readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// `j`, starting at 1.
    pub step: u32,
    /// Index `l = M + 1 - j` of the digit this step reads.
    pub digit_index: u32,
    pub interaction_time: f64,
    /// `phi_j` in radians.
    pub basis_angle: f64,
    /// Probability of outcome 1 before any readout error.
    pub probability_one: f64,
    /// Recorded outcomes of every repetition, after readout errors.
    pub raw_outcomes: Vec<u8>,
    /// Majority vote of `raw_outcomes`.
    pub decoded: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub s: f64,
    pub steps: Vec<StepRecord>,
    pub result: DigitString,
    pub time: ProtocolTime,
}

impl Transcript {
    /// Rechecks that every basis angle follows from the earlier decoded
    /// digits, that the result matches the decoded digits and that the step
    /// durations add up to the reported interaction time.
    pub fn check_consistency(&self, config: &ProtocolConfig) -> Result<()> {
        let m = config.digits;
        if self.steps.len() != m as usize || self.result.len() != m {
            return Err(Error::Contract(format!(
                "transcript has {} steps for {m} digits",
                self.steps.len()
            )));
        }
        let mut history = Vec::with_capacity(m as usize);
        let mut interaction = 0.0;
        for rec in &self.steps {
            let expected = std::f64::consts::FRAC_PI_2 * rotation_fraction(&history);
            if rec.basis_angle != expected {
                return Err(Error::Contract(format!(
                    "step {} basis angle {} differs from {expected}",
                    rec.step, rec.basis_angle
                )));
            }
            if self.result.bit(rec.digit_index) != rec.decoded {
                return Err(Error::Contract(format!(
                    "digit {} of the result disagrees with step {}",
                    rec.digit_index, rec.step
                )));
            }
            interaction += rec.interaction_time * rec.raw_outcomes.len() as f64;
            history.push(rec.decoded);
        }
        if (interaction - self.time.interaction).abs() > 1e-12 * self.time.interaction {
            return Err(Error::Contract(format!(
                "step times add to {interaction}, reported {}",
                self.time.interaction
            )));
        }
        Ok(())
    }
}

/// Error-free readout of an exactly representable eigenvalue.
///
/// Every step is deterministic, so the result reproduces `s` digit for digit.
pub fn run_ideal(s: &DigitString, config: &ProtocolConfig) -> Result<Transcript> {
    config.validate()?;
    if config.error_p != 0.0 {
        return Err(Error::Contract(format!(
            "ideal readout requires error probability 0, got {}",
            config.error_p
        )));
    }
    if s.len() != config.digits {
        return Err(invalid(format!(
            "eigenvalue has {} digits, configuration expects {}",
            s.len(),
            config.digits
        )));
    }
    let value = s.value();
    let transcript = transcript(value, config, |p1| {
        if p1 > 1.0 - 1e-12 {
            Ok(1)
        } else if p1 < 1e-12 {
            Ok(0)
        } else {
            Err(Error::Contract(format!(
                "step outcome is random (p = {p1}) for an exactly representable eigenvalue"
            )))
        }
    })?;
    debug_assert_eq!(transcript.result, *s);
    Ok(transcript)
}

/// Readout with random outcomes and independent flips of each recorded
/// outcome with probability `config.error_p`.
pub fn run_noisy<R: Rng + ?Sized>(
    s: f64,
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<Transcript> {
    config.validate()?;
    check_eigenvalue_range(s)?;
    let p = config.error_p;
    transcript(s, config, |p1| Ok(draw(rng, p1, p)))
}

pub(crate) fn check_eigenvalue_range(s: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&s) {
        return Err(invalid(format!("scaled eigenvalue {s} outside [0, 1/2]")));
    }
    Ok(())
}

#[inline]
fn draw<R: Rng + ?Sized>(rng: &mut R, p1: f64, flip: f64) -> u8 {
    let mut o = u8::from(rng.random::<f64>() < p1);
    if flip > 0.0 && rng.random::<f64>() < flip {
        o ^= 1;
    }
    o
}

fn transcript(
    s: f64,
    config: &ProtocolConfig,
    mut outcome: impl FnMut(f64) -> Result<u8>,
) -> Result<Transcript> {
    let m = config.digits;
    let reps = config.step_repetitions();
    let mut steps = Vec::with_capacity(m as usize);
    let mut rotation = 0.0;
    let mut numerator = 0u64;
    for j in 1..=m {
        let p1 = step_probability_unchecked(s, m, j, rotation, 1);
        let raw = (0..reps[(j - 1) as usize])
            .map(|_| outcome(p1))
            .collect::<Result<Vec<u8>>>()?;
        let decoded = majority(raw.iter().map(|&o| u32::from(o)).sum(), raw.len() as u32);
        steps.push(StepRecord {
            step: j,
            digit_index: m + 1 - j,
            interaction_time: config.interaction_time(j),
            basis_angle: std::f64::consts::FRAC_PI_2 * rotation,
            probability_one: p1,
            raw_outcomes: raw,
            decoded,
        });
        numerator |= u64::from(decoded) << (j - 1);
        rotation = (rotation + f64::from(decoded)) * 0.5;
    }
    Ok(Transcript {
        s,
        steps,
        result: DigitString::from_numerator(numerator, m)?,
        time: protocol_time(config)?,
    })
}

#[inline]
fn majority(ones: u32, reps: u32) -> u8 {
    u8::from(2 * ones > reps)
}

/// Allocation-free noisy readout returning the result numerator.
/// `reps` is indexed by step.
#[inline]
pub(crate) fn fast_readout<R: Rng + ?Sized>(
    s: f64,
    digits: u32,
    reps: &[u32],
    flip: f64,
    rng: &mut R,
) -> u64 {
    let mut rotation = 0.0;
    let mut numerator = 0u64;
    for j in 1..=digits {
        let p1 = step_probability_unchecked(s, digits, j, rotation, 1);
        let r = reps[(j - 1) as usize];
        let ones: u32 = (0..r).map(|_| u32::from(draw(rng, p1, flip))).sum();
        let bit = majority(ones, r);
        numerator |= u64::from(bit) << (j - 1);
        rotation = (rotation + f64::from(bit)) * 0.5;
    }
    numerator
}
