//! Bayesian update on the prior grid and the averaged uncertainty metrics.

use std::collections::HashMap;
use std::sync::RwLock;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::DigitString;
use crate::error::{invalid, Error, Result};
use crate::likelihood::{
    folded_result, likelihood_closed_form, rotation_fraction, step_probability_unchecked,
};
use crate::prior::PriorDistribution;
use crate::stream::{split_evenly, unit_stream};

/// Largest digit count for which all `2^M` results are enumerated.
pub const EXACT_DIGIT_LIMIT: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorReport {
    pub posterior: PriorDistribution,
    /// Posterior mean `s_R`, the reported point estimate.
    pub mean: f64,
    pub variance: f64,
    pub result: DigitString,
}

/// Posterior mean, variance and evidence `sum_s p_M(R|s) p(s)` for one result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub evidence: f64,
}

/// Moments of `p_M(s|R)` without materializing the posterior.
///
/// Sums are taken relative to the folded result, which sits close to the
/// posterior mean, so the variance does not cancel for narrow posteriors.
pub fn posterior_moments(prior: &PriorDistribution, result: &DigitString) -> Result<Moments> {
    let shift = folded_result(result);
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (&s, &w) in prior.support().iter().zip(prior.weights()) {
        if w == 0.0 {
            continue;
        }
        let p = w * likelihood_closed_form(s, result);
        let d = s - shift;
        z += p;
        m1 += p * d;
        m2 += p * d * d;
    }
    if !(z > 0.0) {
        return Err(Error::InconsistentResult {
            result: result.to_string(),
        });
    }
    let offset = m1 / z;
    Ok(Moments {
        mean: shift + offset,
        variance: (m2 / z - offset * offset).max(0.0),
        evidence: z,
    })
}

/// `p_M(s|R) = p_M(R|s) p(s) / sum_s p_M(R|s) p(s)` on the prior grid.
pub fn posterior_update(
    prior: &PriorDistribution,
    result: &DigitString,
) -> Result<PosteriorReport> {
    let weights: Vec<f64> = prior
        .support()
        .iter()
        .zip(prior.weights())
        .map(|(&s, &w)| w * likelihood_closed_form(s, result))
        .collect();
    if !(weights.iter().sum::<f64>() > 0.0) {
        return Err(Error::InconsistentResult {
            result: result.to_string(),
        });
    }
    let posterior = prior.reweighted(weights)?;
    let mean = posterior.mean();
    let variance = posterior.variance();
    Ok(PosteriorReport {
        posterior,
        mean,
        variance,
        result: *result,
    })
}

/// Memoized posterior moments for a fixed prior and digit count.
///
/// The moments are a pure function of `R`, so sharing the table between
/// workers does not change any result.
#[derive(Debug)]
pub struct PosteriorCache<'a> {
    prior: &'a PriorDistribution,
    digits: u32,
    entries: RwLock<HashMap<u64, Option<(f64, f64)>>>,
}

impl<'a> PosteriorCache<'a> {
    pub fn new(prior: &'a PriorDistribution, digits: u32) -> Self {
        Self {
            prior,
            digits,
            entries: RwLock::new(HashMap::new()),
        }
    }

    /// `(mean, variance)` of the posterior for `result`.
    pub fn get(&self, result: &DigitString) -> Result<(f64, f64)> {
        debug_assert_eq!(result.len(), self.digits);
        let key = result.numerator();
        let hit = self.entries.read().expect("cache lock").get(&key).copied();
        let entry = match hit {
            Some(e) => e,
            None => {
                let e = posterior_moments(self.prior, result)
                    .ok()
                    .map(|m| (m.mean, m.variance));
                self.entries.write().expect("cache lock").insert(key, e);
                e
            }
        };
        entry.ok_or_else(|| Error::InconsistentResult {
            result: result.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MetricMode {
    /// Enumerate every result `R`; allowed up to [`EXACT_DIGIT_LIMIT`] digits.
    Exact,
    /// Average over `samples` draws of `(s, R)`.
    Sampled { samples: usize, seed: u64 },
}

/// Averaged posterior spread after `M` digits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageMetrics {
    /// `sum_R p_M(R) sum_s (s - s_R)^2 p_M(s|R)`.
    pub variance: f64,
    /// `sum_R p_M(R) sqrt(sum_s (s - s_R)^2 p_M(s|R))`.
    pub uncertainty: f64,
}

/// Both averaged metrics in one pass, in scaled units.
pub fn average_metrics(
    prior: &PriorDistribution,
    digits: u32,
    mode: MetricMode,
) -> Result<AverageMetrics> {
    if digits == 0 {
        return Err(invalid("digit count must be at least 1"));
    }
    match mode {
        MetricMode::Exact => exact_metrics(prior, digits),
        MetricMode::Sampled { samples, seed } => sampled_metrics(prior, digits, samples, seed),
    }
}

/// Average posterior variance in scaled units.
pub fn average_variance(prior: &PriorDistribution, digits: u32, mode: MetricMode) -> Result<f64> {
    average_metrics(prior, digits, mode).map(|m| m.variance)
}

/// Average posterior standard deviation in scaled units.
pub fn average_uncertainty(
    prior: &PriorDistribution,
    digits: u32,
    mode: MetricMode,
) -> Result<f64> {
    average_metrics(prior, digits, mode).map(|m| m.uncertainty)
}

fn exact_metrics(prior: &PriorDistribution, digits: u32) -> Result<AverageMetrics> {
    if digits > EXACT_DIGIT_LIMIT {
        return Err(Error::Capacity {
            digits,
            limit: EXACT_DIGIT_LIMIT,
        });
    }
    const CHUNK: u64 = 256;
    let count = 1u64 << digits;
    let chunks = count.div_ceil(CHUNK);
    // Per-chunk partial sums, merged in chunk order for thread-count independence.
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (mut v, mut u) = (0.0, 0.0);
            for n in c * CHUNK..((c + 1) * CHUNK).min(count) {
                let r = DigitString::from_numerator(n, digits).expect("numerator in range");
                if let Ok(m) = posterior_moments(prior, &r) {
                    v += m.evidence * m.variance;
                    u += m.evidence * m.variance.sqrt();
                }
            }
            (v, u)
        })
        .collect();
    let (variance, uncertainty) = partial
        .iter()
        .fold((0.0, 0.0), |(v, u), (pv, pu)| (v + pv, u + pu));
    Ok(AverageMetrics {
        variance,
        uncertainty,
    })
}

fn sampled_metrics(
    prior: &PriorDistribution,
    digits: u32,
    samples: usize,
    seed: u64,
) -> Result<AverageMetrics> {
    if samples == 0 {
        return Err(invalid("sampling mode needs at least one sample"));
    }
    let cache = PosteriorCache::new(prior, digits);
    let units = split_evenly(samples, 16);
    let partial: Vec<Result<(f64, f64)>> = units
        .par_iter()
        .enumerate()
        .map(|(u, &n)| {
            let mut rng = unit_stream(seed, u);
            let (mut v, mut sd) = (0.0, 0.0);
            for _ in 0..n {
                let s = prior.sample(&mut rng);
                let r = sample_result(s, digits, &mut rng);
                let (_, var) = cache.get(&r)?;
                v += var;
                sd += var.sqrt();
            }
            Ok((v, sd))
        })
        .collect();
    let mut total = (0.0, 0.0);
    for p in partial {
        let (v, sd) = p?;
        total.0 += v;
        total.1 += sd;
    }
    Ok(AverageMetrics {
        variance: total.0 / samples as f64,
        uncertainty: total.1 / samples as f64,
    })
}

/// Draws `R ~ p_M(R|s)` by running the error-free readout chain.
pub(crate) fn sample_result<R: Rng + ?Sized>(s: f64, digits: u32, rng: &mut R) -> DigitString {
    let mut numerator = 0u64;
    let mut history = Vec::with_capacity(digits as usize);
    for j in 1..=digits {
        let p1 = step_probability_unchecked(s, digits, j, rotation_fraction(&history), 1);
        let bit = u8::from(rng.random::<f64>() < p1);
        history.push(bit);
        numerator |= u64::from(bit) << (j - 1);
    }
    DigitString::from_numerator(numerator, digits).expect("numerator in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::likelihood_product;

    fn b_v(m: u32) -> f64 {
        (1.0 + 0.5f64.powi(m as i32)) / 2.0
    }

    #[test]
    fn point_mass_is_invariant() {
        let prior = PriorDistribution::point_mass(0.375).unwrap();
        let r: DigitString = "0.011".parse().unwrap();
        let post = posterior_update(&prior, &r).unwrap();
        assert_eq!(post.posterior.weights(), &[1.0]);
        assert_eq!(post.mean, 0.375);
        assert_eq!(post.variance, 0.0);
    }

    #[test]
    fn two_point_prior_resolves() {
        // p(00 | 1/4) = cos^2(pi/4) cos^2(pi/2) = 0
        let prior = PriorDistribution::new(vec![0.0, 0.25], vec![1.0, 1.0]).unwrap();
        let r = DigitString::zeros(2).unwrap();
        let post = posterior_update(&prior, &r).unwrap();
        assert!((post.posterior.weights()[0] - 1.0).abs() < 1e-15);
        assert!(post.posterior.weights()[1] < 1e-30);
        assert!(post.mean.abs() < 1e-15);
    }

    #[test]
    fn impossible_result_is_reported() {
        let prior = PriorDistribution::point_mass(0.5).unwrap();
        let r = DigitString::zeros(1).unwrap();
        assert!(matches!(
            posterior_update(&prior, &r),
            Err(Error::InconsistentResult { .. })
        ));
        assert!(posterior_moments(&prior, &r).is_err());
        let cache = PosteriorCache::new(&prior, 1);
        assert!(cache.get(&r).is_err());
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn moments_agree_with_materialized_posterior() {
        let prior = PriorDistribution::uniform(1024).unwrap();
        for s in ["0.0101101", "0.1100000", "0.0000001"] {
            let r: DigitString = s.parse().unwrap();
            let post = posterior_update(&prior, &r).unwrap();
            let m = posterior_moments(&prior, &r).unwrap();
            assert!((post.mean - m.mean).abs() < 1e-12);
            assert!((post.variance - m.variance).abs() < 1e-12);
            let mean: f64 = post
                .posterior
                .support()
                .iter()
                .zip(post.posterior.weights())
                .map(|(s, w)| s * w)
                .sum();
            assert!((post.mean - mean).abs() < 1e-12);
        }
    }

    /// Brute-force oracle for the averaged variance: explicit double loop
    /// with the product-form likelihood.
    fn brute_average_variance(prior: &PriorDistribution, m: u32) -> f64 {
        let mut total = 0.0;
        for n in 0..1u64 << m {
            let r = DigitString::from_numerator(n, m).unwrap();
            let joint: Vec<f64> = prior
                .support()
                .iter()
                .zip(prior.weights())
                .map(|(&s, &w)| w * likelihood_product(s, &r))
                .collect();
            let z: f64 = joint.iter().sum();
            if z == 0.0 {
                continue;
            }
            let mean: f64 = joint
                .iter()
                .zip(prior.support())
                .map(|(p, s)| p * s)
                .sum::<f64>()
                / z;
            let var: f64 = joint
                .iter()
                .zip(prior.support())
                .map(|(p, s)| p * (s - mean).powi(2))
                .sum::<f64>();
            total += var;
        }
        total
    }

    #[test]
    fn exact_metrics_match_brute_force() {
        let prior = PriorDistribution::uniform(257).unwrap();
        for m in 1..=6 {
            let exact = average_variance(&prior, m, MetricMode::Exact).unwrap();
            let brute = brute_average_variance(&prior, m);
            assert!((exact - brute).abs() < 1e-12, "m={m}: {exact} vs {brute}");
        }
    }

    #[test]
    fn point_mass_metrics_vanish() {
        let prior = PriorDistribution::point_mass(0.25).unwrap();
        let m = average_metrics(&prior, 5, MetricMode::Exact).unwrap();
        assert!(m.variance.abs() < 1e-30);
        assert!(m.uncertainty.abs() < 1e-15);
    }

    #[test]
    fn uncertainty_below_root_variance() {
        let prior = PriorDistribution::uniform(4096).unwrap();
        let m = average_metrics(&prior, 8, MetricMode::Exact).unwrap();
        assert!(m.uncertainty <= m.variance.sqrt());
        assert!(m.variance <= b_v(8) * 0.5f64.powi(8));
    }

    #[test]
    fn capacity_limit() {
        let prior = PriorDistribution::uniform(16).unwrap();
        assert_eq!(
            average_variance(&prior, 21, MetricMode::Exact),
            Err(Error::Capacity {
                digits: 21,
                limit: 20
            })
        );
        let sampled = average_variance(
            &prior,
            21,
            MetricMode::Sampled {
                samples: 200,
                seed: 1,
            },
        );
        assert!(sampled.is_ok());
    }

    #[test]
    fn sampled_mode_tracks_exact() {
        let prior = PriorDistribution::uniform(1024).unwrap();
        let exact = average_metrics(&prior, 6, MetricMode::Exact).unwrap();
        let sampled = average_metrics(
            &prior,
            6,
            MetricMode::Sampled {
                samples: 40_000,
                seed: 17,
            },
        )
        .unwrap();
        assert!((sampled.variance / exact.variance - 1.0).abs() < 0.05);
        assert!((sampled.uncertainty / exact.uncertainty - 1.0).abs() < 0.05);
    }

    #[test]
    fn posterior_variance_shrinks_on_average() {
        let prior = PriorDistribution::uniform(4096).unwrap();
        let v = average_variance(
            &prior,
            8,
            MetricMode::Sampled {
                samples: 2000,
                seed: 4,
            },
        )
        .unwrap();
        assert!(v <= prior.variance());
    }

    #[test]
    fn sampled_results_follow_likelihood() {
        let mut rng = crate::stream::unit_stream(21, 0);
        let s = 0.3;
        let n = 60_000;
        let mut counts = [0usize; 8];
        for _ in 0..n {
            counts[sample_result(s, 3, &mut rng).numerator() as usize] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            let p = likelihood_product(s, &DigitString::from_numerator(k as u64, 3).unwrap());
            let sigma = (n as f64 * p * (1.0 - p)).sqrt().max(1.0);
            assert!((c as f64 - n as f64 * p).abs() < 5.0 * sigma, "R={k}");
        }
    }
}
