use spinladder::protocol::{monte_carlo_with_cache, Estimator};
use spinladder::{
    EcStrategy, MonteCarloOptions, PosteriorCache, PriorDistribution, ProtocolConfig, RunReport,
    ScaleMap,
};

fn run(
    prior: &PriorDistribution,
    cache: &PosteriorCache,
    cfg: ProtocolConfig,
    runs: usize,
) -> RunReport {
    let opts = MonteCarloOptions {
        runs,
        batches: 10,
        estimator: Estimator::PosteriorMean,
    };
    monte_carlo_with_cache(prior, &cfg, &opts, cache).unwrap()
}

fn cfg(m: u32) -> ProtocolConfig {
    ProtocolConfig::new(m, ScaleMap::new(1e8, 1.0).unwrap()).with_seed(21)
}

#[test]
fn error_free_curve_beats_the_digit_bound() {
    let prior = PriorDistribution::uniform(4096).unwrap();
    let cache = PosteriorCache::new(&prior, 8);
    let r = run(&prior, &cache, cfg(8), 10_000);
    // log10 of 2 * 2^(-M/2), plus a margin of two standard errors.
    let bound = (2.0 * 0.5f64.powi(4)).log10();
    assert!(r.mean_log10_ratio <= bound + 2.0 * r.log10_std_error);
}

#[test]
fn curves_ordered_by_error_rate() {
    let prior = PriorDistribution::uniform(4096).unwrap();
    let cache = PosteriorCache::new(&prior, 16);
    let reports: Vec<RunReport> = [0.0, 1e-4, 1e-2, 1e-1]
        .iter()
        .map(|&p| run(&prior, &cache, cfg(16).with_error_p(p), 100_000))
        .collect();
    for w in reports.windows(2) {
        let gap = w[1].rms_ratio - w[0].rms_ratio;
        let se = w[0].rms_ratio_std_error.hypot(w[1].rms_ratio_std_error);
        assert!(gap > 2.0 * se, "p = {} vs {}", w[0].error_p, w[1].error_p);
    }
}

#[test]
fn plateau_is_flat_at_large_digit_counts() {
    let prior = PriorDistribution::uniform(4096).unwrap();
    let c12 = PosteriorCache::new(&prior, 12);
    let c16 = PosteriorCache::new(&prior, 16);
    for p in [1e-2, 1e-1] {
        let a = run(&prior, &c12, cfg(12).with_error_p(p), 50_000);
        let b = run(&prior, &c16, cfg(16).with_error_p(p), 50_000);
        assert!((a.rms_ratio / b.rms_ratio - 1.0).abs() < 0.1, "p = {p}");
    }
}

#[test]
fn strategy_ii_gains_a_decade() {
    let prior = PriorDistribution::uniform(4096).unwrap();
    let cache = PosteriorCache::new(&prior, 16);
    let base = cfg(16).with_error_p(1e-2);
    let plain = run(&prior, &cache, base.clone(), 100_000);
    let s2 = run(
        &prior,
        &cache,
        base.with_ec(EcStrategy::strategy_ii()),
        100_000,
    );
    assert!(
        plain.mean_log10_ratio - s2.mean_log10_ratio >= 1.0,
        "{} vs {}",
        plain.mean_log10_ratio,
        s2.mean_log10_ratio
    );
}

#[test]
fn correction_is_neutral_without_errors_on_dyadic_eigenvalues() {
    // Every step outcome is certain, so repetitions change nothing.
    let m = 10;
    let support: Vec<f64> = (0..=512).map(|k| f64::from(k) / 1024.0).collect();
    let prior = PriorDistribution::new(support.clone(), vec![1.0; support.len()]).unwrap();
    let cache = PosteriorCache::new(&prior, m);
    let plain = run(&prior, &cache, cfg(m), 5_000);
    for ec in [
        EcStrategy::strategy_i_all(),
        EcStrategy::strategy_i_leading_half(),
        EcStrategy::strategy_ii(),
    ] {
        let r = run(&prior, &cache, cfg(m).with_ec(ec), 5_000);
        assert!(r.rms_ratio < 1e-12 && plain.rms_ratio < 1e-12);
    }
}

#[test]
fn repetitions_sharpen_random_outcomes_without_errors() {
    // For a continuous prior the majority of three draws is more decisive
    // than one draw, so repetition lowers the error even at p = 0.
    let prior = PriorDistribution::uniform(4096).unwrap();
    let cache = PosteriorCache::new(&prior, 10);
    let plain = run(&prior, &cache, cfg(10), 20_000);
    let rep = run(
        &prior,
        &cache,
        cfg(10).with_ec(EcStrategy::strategy_i_all()),
        20_000,
    );
    assert!(rep.rms_ratio < plain.rms_ratio / 3.0);
}

#[test]
fn mismatch_rates_concentrate_on_unprotected_digits() {
    let prior = PriorDistribution::uniform(4096).unwrap();
    let cache = PosteriorCache::new(&prior, 12);
    let r = run(
        &prior,
        &cache,
        cfg(12)
            .with_error_p(0.05)
            .with_ec(EcStrategy::strategy_i_leading_half()),
        20_000,
    );
    let lead: f64 = r.digit_mismatch_rates[..6].iter().sum();
    let plain = run(&prior, &cache, cfg(12).with_error_p(0.05), 20_000);
    let plain_lead: f64 = plain.digit_mismatch_rates[..6].iter().sum();
    assert!(lead < plain_lead);
}
