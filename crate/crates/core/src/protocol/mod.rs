//! Step-by-step simulation of the adaptive readout.
//!
//! Step `j` interacts for `t_j = t_1 2^(1-j)` with `t_1 = pi 2^M / alpha`,
//! so the first (longest) step reads the least significant digit and every
//! following step halves the interaction time. The readout basis of each
//! step is rotated by the digits already decoded.

mod config;
mod engine;
mod montecarlo;
mod timing;

pub use config::{Coverage, EcStrategy, ProtocolConfig, RepetitionTier};
pub(crate) use engine::check_eigenvalue_range;
pub use engine::{run_ideal, run_noisy, StepRecord, Transcript};
pub use montecarlo::{
    monte_carlo_uncertainty, monte_carlo_with_cache, Estimator, MonteCarloOptions, RunReport,
};
pub use timing::{protocol_time, uncertainty_vs_time_bound, ProtocolTime};
