use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::DigitString;
use crate::error::{invalid, Result};
use crate::likelihood::folded_result;
use crate::posterior::PosteriorCache;
use crate::prior::PriorDistribution;
use crate::stream::{split_evenly, unit_stream};

use super::engine::fast_readout;
use super::timing::{protocol_time, ProtocolTime};
use super::ProtocolConfig;

/// How a readout result is turned into an estimate of `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    /// Mean of the error-free posterior given the result.
    PosteriorMean,
    /// `min(R, 1 - R)`.
    Folded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOptions {
    pub runs: usize,
    /// Independent batches used for standard errors.
    pub batches: usize,
    pub estimator: Estimator,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        Self {
            runs: 10_000,
            batches: 10,
            estimator: Estimator::PosteriorMean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub digits: u32,
    pub error_p: f64,
    pub ec: String,
    pub runs: usize,
    /// RMS estimation error in scaled units.
    pub rms_scaled: f64,
    /// RMS error in physical units divided by `delta0`.
    pub rms_ratio: f64,
    /// Standard error of `rms_ratio` from the spread of batch values.
    pub rms_ratio_std_error: f64,
    pub batch_ratios: Vec<f64>,
    /// Mean over batches of `log10` of the batch RMS ratio.
    pub mean_log10_ratio: f64,
    pub log10_std_error: f64,
    pub time: ProtocolTime,
    /// Fraction of runs whose decoded digit `l` differs from the nearest
    /// `M`-digit fraction of `s`, indexed by `l - 1`.
    pub digit_mismatch_rates: Vec<f64>,
}

impl RunReport {
    /// `delta0` over the RMS error.
    pub fn improvement(&self) -> f64 {
        self.rms_ratio.recip()
    }
}

/// Draws `s` from the prior, runs the noisy readout and scores the estimate.
pub fn monte_carlo_uncertainty(
    prior: &PriorDistribution,
    config: &ProtocolConfig,
    options: &MonteCarloOptions,
) -> Result<RunReport> {
    let cache = PosteriorCache::new(prior, config.digits);
    monte_carlo_with_cache(prior, config, options, &cache)
}

/// As [`monte_carlo_uncertainty`], reusing posterior moments from `cache`,
/// which must have been built for the same prior and digit count.
pub fn monte_carlo_with_cache(
    prior: &PriorDistribution,
    config: &ProtocolConfig,
    options: &MonteCarloOptions,
    cache: &PosteriorCache<'_>,
) -> Result<RunReport> {
    config.validate()?;
    if options.runs == 0 {
        return Err(invalid("run count must be at least 1"));
    }
    if options.batches == 0 {
        return Err(invalid("batch count must be at least 1"));
    }
    if *prior.support().last().unwrap_or(&0.0) > 0.5 {
        return Err(invalid("prior support must lie in [0, 1/2]"));
    }
    let m = config.digits;
    let reps = config.step_repetitions();
    let batches = options.batches.min(options.runs);
    let sizes = split_evenly(options.runs, batches);

    let results = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &n)| {
            let mut rng = unit_stream(config.seed, b);
            let mut sq = 0.0;
            let mut mismatches = vec![0usize; m as usize];
            for _ in 0..n {
                let s = prior.sample(&mut rng);
                let numerator = fast_readout(s, m, &reps, config.error_p, &mut rng);
                let result = DigitString::from_numerator(numerator, m)?;
                let estimate = match options.estimator {
                    Estimator::PosteriorMean => match cache.get(&result) {
                        Ok((mean, _)) => mean,
                        Err(_) => folded_result(&result),
                    },
                    Estimator::Folded => folded_result(&result),
                };
                sq += (estimate - s).powi(2);
                let diff = result.differing_digits(&DigitString::nearest(s, m)?);
                for (l, count) in mismatches.iter_mut().enumerate() {
                    *count += ((diff >> (m as usize - 1 - l)) & 1) as usize;
                }
            }
            Ok((sq, n, mismatches))
        })
        .collect::<Result<Vec<_>>>()?;

    let to_ratio = 2.0 * config.scale.safety_factor();
    let mut total_sq = 0.0;
    let mut mismatches = vec![0usize; m as usize];
    let mut batch_ratios = Vec::with_capacity(batches);
    for (sq, n, mm) in &results {
        total_sq += sq;
        batch_ratios.push(to_ratio * (sq / *n as f64).sqrt());
        for (acc, c) in mismatches.iter_mut().zip(mm) {
            *acc += c;
        }
    }
    let rms_scaled = (total_sq / options.runs as f64).sqrt();
    let logs: Vec<f64> = batch_ratios.iter().map(|r| r.log10()).collect();
    let (mean_log10_ratio, log10_std_error) = mean_and_std_error(&logs);
    let (_, rms_ratio_std_error) = mean_and_std_error(&batch_ratios);

    Ok(RunReport {
        digits: m,
        error_p: config.error_p,
        ec: config.ec.name(),
        runs: options.runs,
        rms_scaled,
        rms_ratio: to_ratio * rms_scaled,
        rms_ratio_std_error,
        batch_ratios,
        mean_log10_ratio,
        log10_std_error,
        time: protocol_time(config)?,
        digit_mismatch_rates: mismatches
            .iter()
            .map(|&c| c as f64 / options.runs as f64)
            .collect(),
    })
}

/// Sample mean and its standard error; the error is NaN for fewer than two values.
fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::{average_metrics, MetricMode};
    use crate::protocol::EcStrategy;
    use crate::scale::ScaleMap;

    fn cfg(m: u32) -> ProtocolConfig {
        ProtocolConfig::new(m, ScaleMap::new(1e8, 1.0).unwrap()).with_seed(11)
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let prior = PriorDistribution::uniform(512).unwrap();
        let opts = MonteCarloOptions {
            runs: 2000,
            ..Default::default()
        };
        let a = monte_carlo_uncertainty(&prior, &cfg(6).with_error_p(0.01), &opts).unwrap();
        let b = monte_carlo_uncertainty(&prior, &cfg(6).with_error_p(0.01), &opts).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_uncertainty(&prior, &cfg(6).with_error_p(0.01).with_seed(12), &opts)
            .unwrap();
        assert_ne!(a.rms_scaled, c.rms_scaled);
    }

    #[test]
    fn error_free_rms_matches_average_variance() {
        // Without readout errors the mean squared error of the posterior
        // mean equals the averaged posterior variance.
        let prior = PriorDistribution::uniform(1024).unwrap();
        let m = 6;
        let exact = average_metrics(&prior, m, MetricMode::Exact).unwrap();
        let opts = MonteCarloOptions {
            runs: 40_000,
            ..Default::default()
        };
        let r = monte_carlo_uncertainty(&prior, &cfg(m), &opts).unwrap();
        let mse = r.rms_scaled.powi(2);
        // Relative error of the MSE is twice that of the RMS.
        let tol = 4.0 * 2.0 * r.rms_ratio_std_error / r.rms_ratio;
        assert!(
            (mse - exact.variance).abs() < tol * exact.variance,
            "mc {} exact {}",
            r.rms_scaled.powi(2),
            exact.variance
        );
    }

    #[test]
    fn folded_estimator_is_worse_than_posterior_mean() {
        let prior = PriorDistribution::uniform(1024).unwrap();
        let mut opts = MonteCarloOptions {
            runs: 20_000,
            ..Default::default()
        };
        let pm = monte_carlo_uncertainty(&prior, &cfg(5), &opts).unwrap();
        opts.estimator = Estimator::Folded;
        let fo = monte_carlo_uncertainty(&prior, &cfg(5), &opts).unwrap();
        assert!(pm.rms_scaled < fo.rms_scaled);
    }

    #[test]
    fn mismatch_rates_grow_with_error_probability() {
        let prior = PriorDistribution::uniform(1024).unwrap();
        let opts = MonteCarloOptions {
            runs: 5000,
            ..Default::default()
        };
        let lo = monte_carlo_uncertainty(&prior, &cfg(8).with_error_p(0.001), &opts).unwrap();
        let hi = monte_carlo_uncertainty(&prior, &cfg(8).with_error_p(0.1), &opts).unwrap();
        let sum = |r: &RunReport| r.digit_mismatch_rates.iter().sum::<f64>();
        assert!(sum(&hi) > sum(&lo));
        assert_eq!(lo.digit_mismatch_rates.len(), 8);
    }

    #[test]
    fn correction_helps_at_high_error() {
        let prior = PriorDistribution::uniform(1024).unwrap();
        let opts = MonteCarloOptions {
            runs: 20_000,
            ..Default::default()
        };
        let base = cfg(10).with_error_p(0.02);
        let plain = monte_carlo_uncertainty(&prior, &base, &opts).unwrap();
        let ec =
            monte_carlo_uncertainty(&prior, &base.with_ec(EcStrategy::strategy_i_all()), &opts)
                .unwrap();
        assert!(ec.rms_ratio < plain.rms_ratio);
        assert_eq!(ec.ec, "s1");
    }

    #[test]
    fn batch_statistics() {
        let prior = PriorDistribution::uniform(256).unwrap();
        let opts = MonteCarloOptions {
            runs: 3,
            batches: 10,
            ..Default::default()
        };
        let r = monte_carlo_uncertainty(&prior, &cfg(4), &opts).unwrap();
        assert_eq!(r.batch_ratios.len(), 3);
        let one = MonteCarloOptions {
            runs: 5,
            batches: 1,
            ..Default::default()
        };
        assert!(monte_carlo_uncertainty(&prior, &cfg(4), &one)
            .unwrap()
            .log10_std_error
            .is_nan());
        let zero = MonteCarloOptions {
            runs: 0,
            ..Default::default()
        };
        assert!(monte_carlo_uncertainty(&prior, &cfg(4), &zero).is_err());
    }
}
