use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::quadrature::simpson;

use super::spectrum::{GaussianSpectrum, Spectrum};

/// Smallest number of harmonics used for trajectory synthesis.
pub const MIN_MODES: usize = 512;

/// A stationary Gaussian field with a given spectrum.
#[derive(Debug, Clone)]
pub struct BathProcess {
    spectrum: Arc<dyn Spectrum>,
    variance: f64,
    t_c: f64,
}

impl BathProcess {
    /// Derives `delta0^2` and `t_c` from the spectrum by quadrature.
    pub fn new(spectrum: Arc<dyn Spectrum>) -> Result<Self> {
        let cutoff = spectrum.cutoff();
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(invalid(format!(
                "spectrum cutoff {cutoff} must be positive"
            )));
        }
        let variance = 2.0 * simpson(|w| spectrum.density(w), 0.0, cutoff, 4096);
        let second = 2.0 * simpson(|w| spectrum.density(w) * w * w, 0.0, cutoff, 4096);
        if !(variance > 0.0) || !(second > 0.0) {
            return Err(invalid(
                "spectrum must have positive weight and second moment",
            ));
        }
        Ok(Self {
            spectrum,
            variance,
            t_c: (variance / second).sqrt(),
        })
    }

    /// Gaussian-shaped spectrum with `sigma = 1/t_c`. `delta0 = 0` gives a
    /// frozen zero field.
    pub fn gaussian(delta0: f64, t_c: f64) -> Result<Self> {
        if !(delta0.is_finite() && delta0 >= 0.0) {
            return Err(invalid(format!("delta0 {delta0} must be >= 0")));
        }
        if !(t_c.is_finite() && t_c > 0.0) {
            return Err(invalid(format!("correlation time {t_c} must be positive")));
        }
        let spectrum = Arc::new(GaussianSpectrum::new(delta0, t_c));
        if delta0 == 0.0 {
            return Ok(Self {
                spectrum,
                variance: 0.0,
                t_c,
            });
        }
        let p = Self::new(spectrum)?;
        if (p.variance / delta0.powi(2) - 1.0).abs() > 0.01 || (p.t_c / t_c - 1.0).abs() > 0.01 {
            return Err(Error::Contract(format!(
                "spectrum quadrature gives delta0^2 = {}, t_c = {}",
                p.variance, p.t_c
            )));
        }
        Ok(p)
    }

    /// `delta0^2`.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn delta0(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn t_c(&self) -> f64 {
        self.t_c
    }

    pub fn spectrum(&self) -> &dyn Spectrum {
        self.spectrum.as_ref()
    }

    pub fn autocorrelation(&self, tau: f64) -> f64 {
        if self.variance == 0.0 {
            0.0
        } else {
            self.spectrum.autocorrelation(tau)
        }
    }

    /// `C(0) - C(tau)`.
    pub fn structure_function(&self, tau: f64) -> f64 {
        if self.variance == 0.0 {
            0.0
        } else {
            self.spectrum.structure_function(tau)
        }
    }
}

/// Field samples `A_z(i dt)` for `i = 0..len`, read as a piecewise-linear curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dt: f64,
    values: Vec<f64>,
    /// Running integral at each grid point.
    cumulative: Vec<f64>,
    under_resolved: bool,
}

impl Trajectory {
    pub fn from_values(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("time step {dt} must be positive")));
        }
        if values.len() < 2 {
            return Err(invalid("trajectory needs at least two samples"));
        }
        let mut cumulative = Vec::with_capacity(values.len());
        cumulative.push(0.0);
        for w in values.windows(2) {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + 0.5 * dt * (w[0] + w[1]));
        }
        Ok(Self {
            dt,
            values,
            cumulative,
            under_resolved: false,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }

    /// Set when the time step exceeds a tenth of the correlation time.
    pub fn is_under_resolved(&self) -> bool {
        self.under_resolved
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let end = self.duration();
        let tol = 1e-9 * self.dt;
        if !(t >= -tol && t <= end + tol) {
            return Err(Error::Range(format!("time {t} outside [0, {end}]")));
        }
        let x = (t / self.dt).clamp(0.0, (self.values.len() - 1) as f64);
        let i = (x.floor() as usize).min(self.values.len() - 2);
        Ok((i, x - i as f64))
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        let (i, u) = self.locate(t)?;
        Ok(self.values[i] + u * (self.values[i + 1] - self.values[i]))
    }

    fn antiderivative(&self, t: f64) -> Result<f64> {
        let (i, u) = self.locate(t)?;
        let (a, b) = (self.values[i], self.values[i + 1]);
        Ok(self.cumulative[i] + self.dt * (a * u + 0.5 * (b - a) * u * u))
    }

    /// `int_a^b A_z(t) dt` of the interpolated curve.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.antiderivative(b)? - self.antiderivative(a)?)
    }
}

/// Spectral synthesis: `A(t) = sum_k X_k cos(w_k t) + Y_k sin(w_k t)` with
/// independent normal `X_k, Y_k` of variance `2 S(w_k) dw` on a midpoint
/// grid over `[0, cutoff]`. The mode count grows with `duration` so the
/// synthesis period stays at least four times the trajectory length.
pub fn sample_trajectory<R: Rng + ?Sized>(
    process: &BathProcess,
    duration: f64,
    dt: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("time step {dt} must be positive")));
    }
    if !(duration.is_finite() && duration >= dt) {
        return Err(invalid(format!(
            "duration {duration} must be at least dt = {dt}"
        )));
    }
    let steps = (duration / dt).ceil() as usize;
    let mut values = vec![0.0; steps + 1];
    if process.variance() > 0.0 {
        let cutoff = process.spectrum().cutoff();
        let modes = MIN_MODES.max((4.0 * duration * cutoff / (2.0 * PI)).ceil() as usize);
        let dw = cutoff / modes as f64;
        for k in 0..modes {
            let w = (k as f64 + 0.5) * dw;
            let sd = (2.0 * process.spectrum().density(w) * dw).sqrt();
            let x: f64 = StandardNormal.sample(rng);
            let y: f64 = StandardNormal.sample(rng);
            let (x, y) = (x * sd, y * sd);
            // Rotate (cos, sin) by w dt each step.
            let (sr, cr) = (w * dt).sin_cos();
            let (mut c, mut s) = (1.0, 0.0);
            for v in values.iter_mut() {
                *v += x * c + y * s;
                let c_next = c * cr - s * sr;
                s = s * cr + c * sr;
                c = c_next;
            }
        }
    }
    let mut traj = Trajectory::from_values(dt, values)?;
    traj.under_resolved = dt > process.t_c() / 10.0;
    Ok(traj)
}
