use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Maps scaled eigenvalues `s` in `[0, 1/2]` to physical angular
/// frequencies (rad/s).
///
/// The largest effective eigenvalue is `a_max = f * delta0`, i.e. `f` prior
/// standard deviations, and `alpha = 2 a_max` so that the whole range maps
/// onto `[0, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleMap {
    alpha: f64,
    a_max: f64,
    safety_factor: f64,
    delta0: f64,
}

impl ScaleMap {
    pub fn new(delta0: f64, safety_factor: f64) -> Result<Self> {
        if !(delta0.is_finite() && delta0 > 0.0) {
            return Err(invalid(format!(
                "prior width delta0 = {delta0} must be positive"
            )));
        }
        if !(safety_factor.is_finite() && safety_factor > 0.0) {
            return Err(invalid(format!(
                "safety factor f = {safety_factor} must be positive"
            )));
        }
        let a_max = safety_factor * delta0;
        Ok(Self {
            alpha: 2.0 * a_max,
            a_max,
            safety_factor,
            delta0,
        })
    }

    /// Scale with `1/delta0` given in seconds.
    pub fn from_dephasing_time(t2_star: f64, safety_factor: f64) -> Result<Self> {
        Self::new(t2_star.recip(), safety_factor)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn safety_factor(&self) -> f64 {
        self.safety_factor
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn to_physical(&self, s: f64) -> f64 {
        self.alpha * s
    }

    pub fn to_scaled(&self, value: f64) -> f64 {
        value / self.alpha
    }
}
