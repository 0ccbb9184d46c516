use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::simpson;
use crate::stream::unit_stream;

use super::process::{sample_trajectory, BathProcess, Trajectory};

/// Largest `T_M / t_c` and `(lag + T_M) / t_c` accepted by the
/// small-time expansion.
pub const EXPANSION_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecorrelationMode {
    /// Second-order expansion of the autocorrelation in `u / t_c`.
    Expansion,
    /// Direct quadrature over the autocorrelation.
    Quadrature,
}

/// Windowed average of the field over `[t_k - T_M, t_k]` plus Gaussian
/// estimation noise of variance `noise_var`.
pub fn measurement_record<R: Rng + ?Sized>(
    trajectory: &Trajectory,
    t_m: f64,
    t_k: f64,
    noise_var: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(t_m > 0.0) {
        return Err(invalid(format!("window {t_m} must be positive")));
    }
    if t_k < t_m {
        return Err(Error::Range(format!(
            "record time {t_k} precedes window length {t_m}"
        )));
    }
    let noise = Normal::new(0.0, noise_var.sqrt())
        .map_err(|_| invalid(format!("noise variance {noise_var} must be >= 0")))?;
    Ok(trajectory.integrate(t_k - t_m, t_k)? / t_m + noise.sample(rng))
}

/// `<(m_k - A_z(t_k + lag))^2>` for a record of window `t_m` and estimation
/// variance `est_var`.
///
/// The expansion gives
/// `est_var + (delta0 / t_c)^2 [((lag + T)^3 - lag^3) / (3T) - T^2 / 12]`,
/// which at `lag = T` is `est_var + delta0^2 (T / t_c)^2 9/4`.
pub fn decorrelation_variance(
    process: &BathProcess,
    t_m: f64,
    est_var: f64,
    lag: f64,
    mode: DecorrelationMode,
) -> Result<f64> {
    if !(t_m.is_finite() && t_m >= 0.0) {
        return Err(invalid(format!("window {t_m} must be >= 0")));
    }
    if !(lag.is_finite() && lag >= 0.0) {
        return Err(invalid(format!("lag {lag} must be >= 0")));
    }
    if !(est_var.is_finite() && est_var >= 0.0) {
        return Err(invalid(format!(
            "estimation variance {est_var} must be >= 0"
        )));
    }
    let t_c = process.t_c();
    match mode {
        DecorrelationMode::Expansion => {
            if t_m > EXPANSION_LIMIT * t_c || lag + t_m > EXPANSION_LIMIT * t_c {
                return Err(Error::RegimeViolation(format!(
                    "T_M / t_c = {:.3e} and (lag + T_M) / t_c = {:.3e} must both be <= {EXPANSION_LIMIT}",
                    t_m / t_c,
                    (lag + t_m) / t_c
                )));
            }
            let shape = if t_m == 0.0 {
                lag * lag
            } else {
                ((lag + t_m).powi(3) - lag.powi(3)) / (3.0 * t_m) - t_m * t_m / 12.0
            };
            Ok(est_var + process.variance() / (t_c * t_c) * shape)
        }
        DecorrelationMode::Quadrature => {
            // With D(u) = C(0) - C(u):
            // V = est + (2/T) int_L^(L+T) D - (2/T^2) int_0^T (T - u) D.
            let d = |u: f64| process.structure_function(u);
            if t_m == 0.0 {
                return Ok(est_var + 2.0 * d(lag));
            }
            let panels = 2000;
            let cross = simpson(d, lag, lag + t_m, panels);
            let own = simpson(|u| (t_m - u) * d(u), 0.0, t_m, panels);
            Ok(est_var + 2.0 / t_m * cross - 2.0 / (t_m * t_m) * own)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecorrelationSample {
    pub realizations: usize,
    /// Mean of the squared deviation.
    pub mean_sq: f64,
    pub std_error: f64,
}

fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn check_realizations(realizations: usize, dt: f64) -> Result<()> {
    if realizations == 0 {
        return Err(invalid("realization count must be at least 1"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("time step {dt} must be positive")));
    }
    Ok(())
}

/// Monte Carlo estimate of `<(m_k - A_z(t_k + lag))^2>` with `t_k = t_m`.
/// Realization `r` uses its own stream derived from `seed`.
pub fn simulate_decorrelation(
    process: &BathProcess,
    t_m: f64,
    est_var: f64,
    lag: f64,
    realizations: usize,
    dt: f64,
    seed: u64,
) -> Result<DecorrelationSample> {
    check_realizations(realizations, dt)?;
    if !(t_m > 0.0 && lag >= 0.0) {
        return Err(invalid("window must be positive and lag nonnegative"));
    }
    let squares = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = unit_stream(seed, r);
            let traj = sample_trajectory(process, t_m + lag, dt, &mut rng)?;
            let m = measurement_record(&traj, t_m, t_m, est_var, &mut rng)?;
            Ok((m - traj.value_at(t_m + lag)?).powi(2))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean_sq, std_error) = mean_and_error(&squares);
    Ok(DecorrelationSample {
        realizations,
        mean_sq,
        std_error,
    })
}

/// `exp(-(int_(t - tau)^t A_z dt' - m_k tau)^2 / 4)` for one realization.
pub fn rotation_fidelity(trajectory: &Trajectory, m_k: f64, t: f64, tau: f64) -> Result<f64> {
    let miss = trajectory.integrate(t - tau, t)? - m_k * tau;
    Ok((-0.25 * miss * miss).exp())
}

/// `exp(-tau^2 V / 4)`: the fidelity when the field stays constant over the
/// rotation and the record misses it with variance `V`.
pub fn fidelity_from_variance(variance: f64, tau: f64) -> f64 {
    (-0.25 * tau * tau * variance).exp()
}

/// First-order expansion `1 - tau^2 V / 4` of [`fidelity_from_variance`].
pub fn linearized_fidelity(variance: f64, tau: f64) -> f64 {
    1.0 - 0.25 * tau * tau * variance
}

/// Ensemble fidelity of a rotation by `angle` performed with
/// `tau = angle / delta0` right after time `t_k + lag`, using the record
/// `m_k` of window `t_m` ending at `t_k = t_m`. The squared phase miss is
/// averaged over realizations before exponentiating.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_fidelity(
    process: &BathProcess,
    t_m: f64,
    est_var: f64,
    lag: f64,
    angle: f64,
    realizations: usize,
    dt: f64,
    seed: u64,
) -> Result<f64> {
    check_realizations(realizations, dt)?;
    if process.delta0() == 0.0 {
        return Ok(1.0);
    }
    let tau = angle / process.delta0();
    let t = t_m + lag;
    if tau > t {
        return Err(Error::Range(format!(
            "rotation time {tau} exceeds the simulated span {t}"
        )));
    }
    let misses = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = unit_stream(seed, r);
            let traj = sample_trajectory(process, t, dt, &mut rng)?;
            let m = measurement_record(&traj, t_m, t_m, est_var, &mut rng)?;
            Ok((traj.integrate(t - tau, t)? - m * tau).powi(2))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, _) = mean_and_error(&misses);
    Ok((-0.25 * mean).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn process() -> BathProcess {
        BathProcess::gaussian(1e8, 1e-3).unwrap()
    }

    #[test]
    fn expansion_coefficient_at_lag_equal_window() {
        let p = process();
        for ratio in [0.001, 0.016, 0.05] {
            let t = ratio * 1e-3;
            let v = decorrelation_variance(&p, t, 0.0, t, DecorrelationMode::Expansion).unwrap();
            let expected = p.variance() * ratio * ratio * (7.0 / 3.0 - 1.0 / 12.0);
            assert!((v - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn vanishes_for_instant_exact_record() {
        let p = process();
        for mode in [DecorrelationMode::Expansion, DecorrelationMode::Quadrature] {
            assert_eq!(
                decorrelation_variance(&p, 0.0, 0.0, 0.0, mode).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn expansion_refuses_long_windows() {
        let p = process();
        let r = decorrelation_variance(&p, 0.3e-3, 0.0, 0.0, DecorrelationMode::Expansion);
        assert!(matches!(r, Err(Error::RegimeViolation(_))));
        assert!(
            decorrelation_variance(&p, 0.3e-3, 0.0, 0.0, DecorrelationMode::Quadrature).is_ok()
        );
    }

    /// Brute-force oracle: the double integral
    /// `C(0) + (1/T^2) int int C(u - v) - (2/T) int C(L + T - u)`
    /// on a midpoint grid.
    fn double_integral(p: &BathProcess, t: f64, lag: f64) -> f64 {
        let n = 400;
        let h = t / n as f64;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let mut own = 0.0;
        for &u in &grid {
            for &v in &grid {
                own += p.autocorrelation(u - v);
            }
        }
        own *= h * h / (t * t);
        let cross: f64 = grid
            .iter()
            .map(|&u| p.autocorrelation(lag + t - u))
            .sum::<f64>()
            * h
            / t;
        p.variance() + own - 2.0 * cross
    }

    #[test]
    fn quadrature_matches_double_integral() {
        let p = BathProcess::gaussian(1.0, 1.0).unwrap();
        for (t, lag) in [(0.5, 0.5), (1.0, 0.3), (2.0, 1.5)] {
            let q = decorrelation_variance(&p, t, 0.0, lag, DecorrelationMode::Quadrature).unwrap();
            let b = double_integral(&p, t, lag);
            assert!((q - b).abs() < 1e-4, "{t} {lag}: {q} vs {b}");
        }
    }

    #[test]
    fn quadrature_agrees_with_expansion_in_regime() {
        let p = process();
        for lag_factor in [0.0, 1.0, 2.0] {
            let t = 0.016e-3;
            let lag = lag_factor * t;
            let e = decorrelation_variance(&p, t, 0.0, lag, DecorrelationMode::Expansion).unwrap();
            let q = decorrelation_variance(&p, t, 0.0, lag, DecorrelationMode::Quadrature).unwrap();
            assert!((q / e - 1.0).abs() < 0.01, "{lag_factor}: {q} vs {e}");
        }
    }

    #[test]
    fn record_of_constant_field() {
        let traj = Trajectory::from_values(0.1, vec![3.0; 11]).unwrap();
        let mut rng = unit_stream(0, 0);
        let m = measurement_record(&traj, 0.5, 0.8, 0.0, &mut rng).unwrap();
        assert!((m - 3.0).abs() < 1e-12);
        assert!(matches!(
            measurement_record(&traj, 0.5, 0.3, 0.0, &mut rng),
            Err(Error::Range(_))
        ));
        // Frozen field equal to the record gives perfect fidelity.
        assert_eq!(rotation_fidelity(&traj, 3.0, 0.9, 0.4).unwrap(), 1.0);
    }

    #[test]
    fn record_noise_variance() {
        let traj = Trajectory::from_values(0.1, vec![0.0; 11]).unwrap();
        let mut rng = unit_stream(3, 0);
        let v = 2.5;
        let n = 10_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| measurement_record(&traj, 0.5, 1.0, v, &mut rng).unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var / v - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn fidelity_bounds_and_expansion() {
        for v in [0.0, 1e-4, 1e-2, 1.0, 100.0] {
            let f = fidelity_from_variance(v, 1.0);
            assert!(f > 0.0 && f <= 1.0);
            if v < 1e-2 {
                assert!((f - linearized_fidelity(v, 1.0)).abs() <= v * v / 32.0);
            }
        }
        // pi rotation with V = 1.2e-3 delta0^2.
        let f = fidelity_from_variance(1.2e-3, PI);
        assert!((f - 0.99704).abs() < 1e-4, "{f}");
    }

    #[test]
    fn simulation_matches_expansion() {
        let p = process();
        let t = 0.016e-3;
        let est = (0.025e8f64).powi(2);
        let sim = simulate_decorrelation(&p, t, est, t, 2000, t / 100.0, 5).unwrap();
        let e = decorrelation_variance(&p, t, est, t, DecorrelationMode::Expansion).unwrap();
        assert!(
            (sim.mean_sq / e - 1.0).abs() < 0.1,
            "{} vs {e}",
            sim.mean_sq
        );
        assert!((sim.mean_sq - e).abs() < 4.0 * sim.std_error);
    }

    #[test]
    fn ensemble_fidelity_tracks_variance_formula() {
        let p = process();
        let t = 0.016e-3;
        let est = (0.025e8f64).powi(2);
        let f = ensemble_fidelity(&p, t, est, 0.0, PI, 2000, t / 100.0, 9).unwrap();
        let v = decorrelation_variance(&p, t, est, 0.0, DecorrelationMode::Quadrature).unwrap();
        let expected = fidelity_from_variance(v, PI / 1e8);
        assert!((f - expected).abs() < 5e-4, "{f} vs {expected}");
        let frozen = BathProcess::gaussian(0.0, 1.0).unwrap();
        assert_eq!(
            ensemble_fidelity(&frozen, 1.0, 0.0, 0.0, PI, 10, 0.1, 0).unwrap(),
            1.0
        );
    }
}
