use serde::{Deserialize, Serialize};

use crate::digits::{pow2, MAX_DIGITS};
use crate::error::{invalid, Result};
use crate::protocol::{protocol_time, ProtocolConfig};
use crate::scale::ScaleMap;

/// One inverse nanosecond in rad/s.
pub const NS_INV: f64 = 1e9;

pub const PRESET_NAMES: [&str; 2] = ["GaAs-large", "GaAs-small"];

/// Electron spin in a quantum dot coupled to `N` lattice nuclei.
///
/// Rates are stored in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdPreset {
    pub name: String,
    /// Total hyperfine coupling `A`.
    pub a_total: f64,
    pub nuclei: f64,
    /// Nuclear polarization in `[0, 1]`.
    pub polarization: f64,
    /// Electron Larmor frequency.
    pub epsilon_z: f64,
}

impl QdPreset {
    /// Builds a preset from rates in `ns^-1`.
    pub fn from_ns(
        name: &str,
        a_ns: f64,
        nuclei: f64,
        polarization: f64,
        epsilon_z_ns: f64,
    ) -> Self {
        Self {
            name: name.to_string(),
            a_total: a_ns * NS_INV,
            nuclei,
            polarization,
            epsilon_z: epsilon_z_ns * NS_INV,
        }
    }

    /// Replaces the hyperfine coupling; accepts 50 to 200 ns^-1.
    pub fn with_hyperfine_ns(mut self, a_ns: f64) -> Result<Self> {
        if !(50.0..=200.0).contains(&a_ns) {
            return Err(invalid(format!(
                "hyperfine coupling {a_ns} ns^-1 outside [50, 200]"
            )));
        }
        self.a_total = a_ns * NS_INV;
        Ok(self)
    }

    pub fn with_polarization(mut self, p: f64) -> Self {
        self.polarization = p;
        self
    }

    pub fn with_epsilon_z_ns(mut self, eps_ns: f64) -> Self {
        self.epsilon_z = eps_ns * NS_INV;
        self
    }

    pub fn with_nuclei(mut self, n: f64) -> Self {
        self.nuclei = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_total.is_finite() && self.a_total > 0.0) {
            return Err(invalid(format!(
                "hyperfine coupling {} must be positive",
                self.a_total
            )));
        }
        if !(self.nuclei.is_finite() && self.nuclei >= 1.0) {
            return Err(invalid(format!(
                "nuclear count {} must be >= 1",
                self.nuclei
            )));
        }
        if !(0.0..=1.0).contains(&self.polarization) {
            return Err(invalid(format!(
                "polarization {} outside [0, 1]",
                self.polarization
            )));
        }
        if !(self.epsilon_z.is_finite() && self.epsilon_z > 0.0) {
            return Err(invalid(format!(
                "Larmor frequency {} must be positive",
                self.epsilon_z
            )));
        }
        Ok(())
    }
}

/// Named presets with `A = 100 ns^-1`, `P = 0` and `epsilon_z = 10 ns^-1`.
pub fn preset(name: &str) -> Result<QdPreset> {
    let n = match name {
        "GaAs-large" => 1e6,
        "GaAs-small" => 1e4,
        other => {
            return Err(invalid(format!(
                "unknown preset '{other}' (expected one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(QdPreset::from_ns(name, 100.0, n, 0.0, 10.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QdParameters {
    /// `A sqrt((1 - P^2) / N)` in rad/s.
    pub delta0: f64,
    /// `epsilon_z N^(3/2) / A^2` in s.
    pub t_c: f64,
    /// `1 / delta0`; `None` for a fully polarized bath.
    pub t2_star: Option<f64>,
}

pub fn qd_derived_parameters(preset: &QdPreset) -> Result<QdParameters> {
    preset.validate()?;
    let delta0 = preset.a_total * ((1.0 - preset.polarization.powi(2)) / preset.nuclei).sqrt();
    Ok(QdParameters {
        delta0,
        t_c: preset.epsilon_z * preset.nuclei.powf(1.5) / preset.a_total.powi(2),
        t2_star: (delta0 > 0.0).then(|| delta0.recip()),
    })
}

/// `N = A^2 (1 - P^2) / delta0^2`.
pub fn nuclei_for(a_total: f64, delta0: f64, polarization: f64) -> Result<f64> {
    if !(a_total > 0.0 && delta0 > 0.0 && (0.0..1.0).contains(&polarization)) {
        return Err(invalid("need A > 0, delta0 > 0 and 0 <= P < 1"));
    }
    Ok(a_total.powi(2) * (1.0 - polarization.powi(2)) / delta0.powi(2))
}

/// Bound on the total variance (rad^2/s^2) of an `M`-digit record used one
/// protocol duration after it was taken: `(alpha 2^(-M/2))^2` from the
/// estimate plus `delta0^2 (T / t_c)^2 9/4` from decorrelation, with `T`
/// the full protocol time.
pub fn total_variance(config: &ProtocolConfig, t_c: f64) -> Result<f64> {
    if !(t_c > 0.0) {
        return Err(invalid(format!("correlation time {t_c} must be positive")));
    }
    let noise = (config.scale.alpha() / pow2(config.digits).sqrt()).powi(2);
    let t = protocol_time(config)?.total;
    Ok(noise + config.scale.delta0().powi(2) * (t / t_c).powi(2) * 2.25)
}

/// Digit count in `1..=max_digits` minimizing [`total_variance`]; ties go to
/// fewer digits. `t_c = inf` removes the decorrelation penalty.
pub fn optimal_digit_count_for(config: &ProtocolConfig, t_c: f64, max_digits: u32) -> Result<u32> {
    if max_digits == 0 || max_digits > MAX_DIGITS {
        return Err(invalid(format!(
            "maximum digit count {max_digits} outside 1..={MAX_DIGITS}"
        )));
    }
    let mut best = (1, f64::INFINITY);
    for m in 1..=max_digits {
        let v = total_variance(&config.clone().with_digits(m), t_c)?;
        if v < best.1 {
            best = (m, v);
        }
    }
    Ok(best.0)
}

/// [`optimal_digit_count_for`] with `delta0` and `t_c` taken from the preset.
/// `config` supplies `f`, `tau_m` and the error-correction strategy.
pub fn optimal_digit_count(
    preset: &QdPreset,
    config: &ProtocolConfig,
    max_digits: u32,
) -> Result<u32> {
    let derived = qd_derived_parameters(preset)?;
    let scale = ScaleMap::new(derived.delta0, config.scale.safety_factor())?;
    let cfg = ProtocolConfig {
        scale,
        ..config.clone()
    };
    optimal_digit_count_for(&cfg, derived.t_c, max_digits)
}
