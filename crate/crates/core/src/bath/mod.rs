//! The field as a stationary zero-mean Gaussian process.
//!
//! Spectra are two-sided: `C(tau) = int S(w) e^(i w tau) dw` over the whole
//! real line, so `C(0) = delta0^2` and `1/t_c^2 = int S(w) w^2 dw / delta0^2`.
//!
//! Quantum-dot inputs are given in `ns^-1` and converted with
//! `1 ns^-1 = 1e9 rad/s` (see [`NS_INV`]).

mod decorrelation;
mod process;
mod qd;
mod spectrum;

pub use decorrelation::{
    decorrelation_variance, ensemble_fidelity, fidelity_from_variance, linearized_fidelity,
    measurement_record, rotation_fidelity, simulate_decorrelation, DecorrelationMode,
    DecorrelationSample, EXPANSION_LIMIT,
};
pub use process::{sample_trajectory, BathProcess, Trajectory, MIN_MODES};
pub use qd::{
    nuclei_for, optimal_digit_count, optimal_digit_count_for, preset, qd_derived_parameters,
    total_variance, QdParameters, QdPreset, NS_INV, PRESET_NAMES,
};
pub use spectrum::{GaussianSpectrum, Spectrum};
