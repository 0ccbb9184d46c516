//! Adaptive, bit-by-bit estimation of a slowly fluctuating dephasing field
//! through a single probe qubit.
//!
//! The probe interacts with the field for a ladder of halving times and is
//! read out in a basis rotated by the digits already measured, so each
//! readout fixes one binary digit of the scaled field eigenvalue, least
//! significant first. The crate is organized as:
//!
//! - [`digits`], [`prior`], [`scale`], [`likelihood`], [`posterior`]: the
//!   digit model, outcome likelihoods, Bayesian update and the averaged
//!   uncertainty metrics.
//! - [`protocol`]: the step-by-step simulation with preparation/measurement
//!   errors, repetition-code error correction, Monte Carlo estimation and
//!   the timing model.
//! - [`ramsey`]: the fixed-interaction-time baseline.
//! - [`bath`]: the field as a stationary Gaussian process, decorrelation
//!   limited accuracy, rotation fidelity and quantum-dot parameter presets.
//!
//! Scaled eigenvalues `s` live in `[0, 1/2]`; the physical field is
//! `alpha * s` with `alpha = 2 f delta0` (see [`scale::ScaleMap`]).

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod digits;
mod error;
pub mod likelihood;
pub mod posterior;
pub mod prior;
pub mod protocol;
pub(crate) mod quadrature;
pub mod ramsey;
pub mod scale;
pub(crate) mod stream;

pub use digits::DigitString;
pub use error::{Error, Result};
pub use likelihood::{
    basis_angle, folded_result, likelihood_closed_form, likelihood_product,
    step_outcome_probability,
};
pub use posterior::{
    average_metrics, average_uncertainty, average_variance, posterior_update, AverageMetrics,
    MetricMode, PosteriorCache, PosteriorReport,
};
pub use prior::PriorDistribution;
pub use protocol::{
    monte_carlo_uncertainty, protocol_time, run_ideal, run_noisy, EcStrategy, Estimator,
    MonteCarloOptions, ProtocolConfig, ProtocolTime, RunReport, Transcript,
};
pub use ramsey::{ramsey_comparison_time, ramsey_time, run_ramsey, RamseyConfig, RamseyEstimate};
pub use scale::ScaleMap;
