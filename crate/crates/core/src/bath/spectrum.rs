use std::f64::consts::PI;
use std::fmt::Debug;

use crate::quadrature::simpson;

/// A symmetric two-sided spectral density of the field.
pub trait Spectrum: Debug + Send + Sync {
    /// `S(w)` in (rad/s)^2 per rad/s.
    fn density(&self, omega: f64) -> f64;

    /// Frequency beyond which the density is negligible.
    fn cutoff(&self) -> f64;

    /// `C(tau) = 2 int_0^cutoff S(w) cos(w tau) dw`.
    fn autocorrelation(&self, tau: f64) -> f64 {
        let panels = 2048 + (self.cutoff() * tau.abs() * 8.0) as usize;
        2.0 * simpson(
            |w| self.density(w) * (w * tau).cos(),
            0.0,
            self.cutoff(),
            panels,
        )
    }

    /// `D(tau) = C(0) - C(tau) = 4 int_0^cutoff S(w) sin^2(w tau / 2) dw`,
    /// computed without cancellation.
    fn structure_function(&self, tau: f64) -> f64 {
        let panels = 2048 + (self.cutoff() * tau.abs() * 8.0) as usize;
        4.0 * simpson(
            |w| self.density(w) * (0.5 * w * tau).sin().powi(2),
            0.0,
            self.cutoff(),
            panels,
        )
    }
}

/// `S(w) = delta0^2 / (sqrt(2 pi) sigma) exp(-w^2 / (2 sigma^2))` with `sigma = 1/t_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpectrum {
    pub delta0: f64,
    pub sigma: f64,
}

impl GaussianSpectrum {
    pub fn new(delta0: f64, t_c: f64) -> Self {
        Self {
            delta0,
            sigma: t_c.recip(),
        }
    }
}

impl Spectrum for GaussianSpectrum {
    fn density(&self, omega: f64) -> f64 {
        let z = omega / self.sigma;
        self.delta0.powi(2) / ((2.0 * PI).sqrt() * self.sigma) * (-0.5 * z * z).exp()
    }

    fn cutoff(&self) -> f64 {
        8.0 * self.sigma
    }

    /// `delta0^2 exp(-sigma^2 tau^2 / 2)`.
    fn autocorrelation(&self, tau: f64) -> f64 {
        self.delta0.powi(2) * (-0.5 * (self.sigma * tau).powi(2)).exp()
    }

    fn structure_function(&self, tau: f64) -> f64 {
        -self.delta0.powi(2) * (-0.5 * (self.sigma * tau).powi(2)).exp_m1()
    }
}
