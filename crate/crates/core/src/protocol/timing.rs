use serde::{Deserialize, Serialize};

use crate::digits::pow2;
use crate::error::{invalid, Result};

use super::ProtocolConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTime {
    /// Total probe-field interaction time (s).
    pub interaction: f64,
    /// Interaction plus one `tau_m` per measurement (s).
    pub total: f64,
    pub measurements: u64,
}

/// Time budget of one full readout including repetitions.
pub fn protocol_time(config: &ProtocolConfig) -> Result<ProtocolTime> {
    config.validate()?;
    let reps = config.step_repetitions();
    let mut interaction = 0.0;
    let mut bare = 0.0;
    let mut measurements = 0u64;
    for (j, &r) in (1..=config.digits).zip(&reps) {
        let t = config.interaction_time(j);
        bare += t;
        interaction += t * f64::from(r);
        measurements += u64::from(r);
    }
    let geometric = 2.0 * config.t1() * (1.0 - pow2(config.digits).recip());
    assert!(
        (bare - geometric).abs() <= 1e-14 * geometric,
        "sum of t_j = {bare} differs from 2 t_1 (1 - 2^-M) = {geometric}"
    );
    Ok(ProtocolTime {
        interaction,
        total: interaction + config.tau_m * measurements as f64,
        measurements,
    })
}

/// `sqrt(pi f / (delta0 T_int))`, the bound on the relative uncertainty
/// reached after interaction time `T_int`.
pub fn uncertainty_vs_time_bound(config: &ProtocolConfig) -> Result<f64> {
    let t = protocol_time(config)?;
    if !(t.interaction > 0.0) {
        return Err(invalid("interaction time must be positive"));
    }
    let scale = &config.scale;
    Ok((std::f64::consts::PI * scale.safety_factor() / (scale.delta0() * t.interaction)).sqrt())
}
