//! Discretized prior over scaled eigenvalues in `[0, 1/2]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const DEFAULT_GRID_SIZE: usize = 4096;

/// Probability masses on a strictly increasing grid of points in `[0, 1/2]`.
///
/// Weights are normalized on construction; the cumulative sums are kept for
/// sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorDistribution {
    support: Vec<f64>,
    weights: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl PriorDistribution {
    /// Normalizes `weights` and validates the support.
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(invalid("prior support is empty"));
        }
        if support.len() != weights.len() {
            return Err(invalid(format!(
                "support has {} points but {} weights were given",
                support.len(),
                weights.len()
            )));
        }
        if let Some(s) = support.iter().find(|s| !(0.0..=0.5).contains(*s)) {
            return Err(invalid(format!("support point {s} outside [0, 1/2]")));
        }
        if support.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("support is not strictly increasing"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(invalid("weights sum to zero"));
        }
        let weights: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
        Ok(Self::from_normalized(support, weights))
    }

    /// Uniform weights on `grid_size` equally spaced points spanning `[0, 1/2]`.
    pub fn uniform(grid_size: usize) -> Result<Self> {
        if grid_size < 2 {
            return Err(invalid(format!("grid size {grid_size} must be at least 2")));
        }
        let h = 0.5 / (grid_size - 1) as f64;
        let mut support: Vec<f64> = (0..grid_size).map(|i| i as f64 * h).collect();
        support[grid_size - 1] = 0.5;
        let w = 1.0 / grid_size as f64;
        Ok(Self::from_normalized(support, vec![w; grid_size]))
    }

    /// All mass on a single point.
    pub fn point_mass(s: f64) -> Result<Self> {
        Self::new(vec![s], vec![1.0])
    }

    fn from_normalized(support: Vec<f64>, weights: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self {
            support,
            weights,
            cumulative,
        }
    }

    /// Same support, new (unnormalized) weights.
    pub(crate) fn reweighted(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.support.clone(), weights)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid_size(&self) -> usize {
        self.support.len()
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| s * w)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| w * (s - m) * (s - m))
            .sum()
    }

    /// Draws a support index by inverting the cumulative distribution.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let last = *self.cumulative.last().expect("nonempty support");
        let u = rng.random::<f64>() * last;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.support.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.support[self.sample_index(rng)]
    }
}
