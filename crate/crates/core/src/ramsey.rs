//! Fixed-interaction-time Ramsey baseline.
//!
//! Every shot interacts for the same time `t_fixed`, so the phase
//! `Omega_s t_fixed` with `Omega_s = alpha s / 2` is learned only through
//! shot statistics and the error falls as `1/sqrt(n_shots)`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::pow2;
use crate::error::{invalid, Result};
use crate::prior::PriorDistribution;
use crate::protocol::{check_eigenvalue_range, ProtocolConfig};
use crate::scale::ScaleMap;
use crate::stream::{split_evenly, unit_stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyConfig {
    /// Interaction time per shot (s).
    pub t_fixed: f64,
    pub n_shots: u64,
    /// Preparation plus readout time per shot (s).
    pub tau_m: f64,
}

impl RamseyConfig {
    /// `t_fixed = pi / (f delta0)`, which maps `s` in `[0, 1/2]` onto phases
    /// in `[0, pi/2]`.
    pub fn new(scale: &ScaleMap, n_shots: u64, tau_m: f64) -> Self {
        Self {
            t_fixed: PI / (scale.safety_factor() * scale.delta0()),
            n_shots,
            tau_m,
        }
    }

    /// `t_fixed = 1 / delta0`.
    pub fn dephasing_limited(scale: &ScaleMap, n_shots: u64, tau_m: f64) -> Self {
        Self {
            t_fixed: scale.delta0().recip(),
            n_shots,
            tau_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_fixed.is_finite() && self.t_fixed > 0.0) {
            return Err(invalid(format!(
                "t_fixed {} must be positive",
                self.t_fixed
            )));
        }
        if self.n_shots == 0 {
            return Err(invalid("shot count must be at least 1"));
        }
        if !(self.tau_m.is_finite() && self.tau_m >= 0.0) {
            return Err(invalid(format!(
                "measurement time {} must be >= 0",
                self.tau_m
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyEstimate {
    /// Estimated scaled eigenvalue.
    pub estimate: f64,
    /// Fraction of shots found in `|+>`.
    pub frequency: f64,
    /// Set when the inverted phase lies within `1/sqrt(n_shots)` of a
    /// `cos^2` extremum, where the branch choice is unreliable.
    pub ambiguous: bool,
}

/// Samples `n_shots` outcomes with `P(+) = cos^2(Omega_s t_fixed)` and inverts
/// the observed frequency, choosing the branch nearest the prior mean.
pub fn run_ramsey<R: Rng + ?Sized>(
    s: f64,
    config: &RamseyConfig,
    scale: &ScaleMap,
    prior_mean: f64,
    rng: &mut R,
) -> Result<RamseyEstimate> {
    config.validate()?;
    check_eigenvalue_range(s)?;
    let rate = 0.5 * scale.alpha() * config.t_fixed;
    let p_plus = (rate * s).cos().powi(2).clamp(0.0, 1.0);
    let hits = Binomial::new(config.n_shots, p_plus)
        .map_err(|e| invalid(format!("binomial sampler: {e}")))?
        .sample(rng);
    Ok(invert(hits, config.n_shots, rate, prior_mean))
}

fn invert(hits: u64, shots: u64, rate: f64, prior_mean: f64) -> RamseyEstimate {
    let frequency = hits as f64 / shots as f64;
    let base = frequency.sqrt().acos();
    let target = rate * prior_mean;
    // Candidates +-base + k pi; take the one nearest the prior phase.
    let k = (target / PI).round();
    let phase = [-1.0, 0.0, 1.0]
        .iter()
        .flat_map(|dk| {
            let shift = (k + dk) * PI;
            [shift + base, shift - base]
        })
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .unwrap_or(base);
    let to_extremum = {
        let r = phase.rem_euclid(FRAC_PI_2);
        r.min(FRAC_PI_2 - r)
    };
    RamseyEstimate {
        estimate: phase / rate,
        frequency,
        ambiguous: to_extremum < (shots as f64).sqrt().recip(),
    }
}

/// `n_shots (t_fixed + tau_m)`.
pub fn ramsey_time(config: &RamseyConfig) -> Result<f64> {
    config.validate()?;
    Ok(config.n_shots as f64 * (config.t_fixed + config.tau_m))
}

/// Comparison budget `2 t_1 + tau_m 2^M` for a Ramsey scheme matching an
/// `M`-digit readout.
pub fn ramsey_comparison_time(config: &ProtocolConfig) -> Result<f64> {
    config.validate()?;
    Ok(2.0 * config.t1() + config.tau_m * pow2(config.digits))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyReport {
    pub n_shots: u64,
    pub runs: usize,
    pub rms_scaled: f64,
    /// RMS physical error over `delta0`.
    pub rms_ratio: f64,
    pub rms_ratio_std_error: f64,
    /// Fraction of runs flagged ambiguous.
    pub ambiguous_fraction: f64,
    pub time: f64,
}

/// RMS error of the Ramsey estimate with `s` drawn from `prior`.
pub fn ramsey_monte_carlo(
    prior: &PriorDistribution,
    scale: &ScaleMap,
    config: &RamseyConfig,
    runs: usize,
    batches: usize,
    seed: u64,
) -> Result<RamseyReport> {
    config.validate()?;
    if runs == 0 || batches == 0 {
        return Err(invalid("run and batch counts must be at least 1"));
    }
    let batches = batches.min(runs);
    let prior_mean = prior.mean();
    let per_batch = split_evenly(runs, batches)
        .par_iter()
        .enumerate()
        .map(|(b, &n)| {
            let mut rng = unit_stream(seed, b);
            let mut sq = 0.0;
            let mut ambiguous = 0usize;
            for _ in 0..n {
                let s = prior.sample(&mut rng);
                let e = run_ramsey(s, config, scale, prior_mean, &mut rng)?;
                sq += (e.estimate - s).powi(2);
                ambiguous += usize::from(e.ambiguous);
            }
            Ok((sq, n, ambiguous))
        })
        .collect::<Result<Vec<_>>>()?;
    let to_ratio = scale.alpha() / scale.delta0();
    let total: f64 = per_batch.iter().map(|b| b.0).sum();
    let ratios: Vec<f64> = per_batch
        .iter()
        .map(|&(sq, n, _)| to_ratio * (sq / n as f64).sqrt())
        .collect();
    let std_error = if ratios.len() < 2 {
        f64::NAN
    } else {
        let n = ratios.len() as f64;
        let mean = ratios.iter().sum::<f64>() / n;
        (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    };
    let rms_scaled = (total / runs as f64).sqrt();
    Ok(RamseyReport {
        n_shots: config.n_shots,
        runs,
        rms_scaled,
        rms_ratio: to_ratio * rms_scaled,
        rms_ratio_std_error: std_error,
        ambiguous_fraction: per_batch.iter().map(|b| b.2).sum::<usize>() as f64 / runs as f64,
        time: ramsey_time(config)?,
    })
}
