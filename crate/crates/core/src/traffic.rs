//! Spatio-temporal log-normal traffic demand and the traffic-gated gain.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const PROFILE_MIN: f64 = 0.8;
pub const PROFILE_MAX: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemporalMode {
    /// Fresh draw for every (epoch, grid).
    #[default]
    Independent,
    /// One log-scale deviate per grid shared by all epochs; only the
    /// epoch mean moves.
    Persistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficModel {
    /// Mbps/km².
    pub base_mean: f64,
    /// Standard deviation of the underlying normal.
    pub sigma_log: f64,
    pub epoch_profile: Vec<f64>,
    pub threshold_fraction: f64,
    pub temporal: TemporalMode,
}

/// `1.1 + 0.3 sin(2π(t−1)/T)` for `t = 1..=T`.
pub fn default_profile(epochs: usize) -> Vec<f64> {
    (0..epochs)
        .map(|t| 1.1 + 0.3 * (2.0 * PI * t as f64 / epochs as f64).sin())
        .collect()
}

impl Default for TrafficModel {
    fn default() -> Self {
        TrafficModel {
            base_mean: 702.0,
            sigma_log: 2.8,
            epoch_profile: default_profile(12),
            threshold_fraction: 0.01,
            temporal: TemporalMode::Independent,
        }
    }
}

impl TrafficModel {
    pub fn epochs(&self) -> usize {
        self.epoch_profile.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_mean > 0.0 && self.base_mean.is_finite()) {
            return Err(invalid(format!("traffic mean must be positive, got {}", self.base_mean)));
        }
        if !(self.sigma_log > 0.0 && self.sigma_log.is_finite()) {
            return Err(invalid(format!("sigma must be positive, got {}", self.sigma_log)));
        }
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction < 1.0) {
            return Err(invalid(format!(
                "threshold fraction must lie in (0, 1), got {}",
                self.threshold_fraction
            )));
        }
        if self.epoch_profile.is_empty() {
            return Err(invalid("at least one epoch is required"));
        }
        // small slack so sin() rounding at the extremes is not rejected
        let eps = 1e-12;
        if let Some(m) = self
            .epoch_profile
            .iter()
            .find(|m| !(**m >= PROFILE_MIN - eps && **m <= PROFILE_MAX + eps))
        {
            return Err(invalid(format!("epoch multiplier {m} outside [0.8, 1.4]")));
        }
        Ok(())
    }

    /// Analytic mean demand at epoch `t` (0-based).
    pub fn mean(&self, t: usize) -> f64 {
        self.base_mean * self.epoch_profile[t]
    }

    /// Log-scale location so the distribution mean equals `mean(t)`.
    pub fn mu(&self, t: usize) -> f64 {
        self.mean(t).ln() - self.sigma_log * self.sigma_log / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficField {
    /// Row-major `[epoch][grid]`, Mbps/km².
    pub demand: Vec<f64>,
    /// Per-epoch threshold, Mbps/km².
    pub threshold: Vec<f64>,
    pub grids: usize,
}

impl TrafficField {
    pub fn epochs(&self) -> usize {
        self.threshold.len()
    }

    pub fn at(&self, epoch: usize, grid: usize) -> f64 {
        self.demand[epoch * self.grids + grid]
    }

    pub fn epoch_row(&self, epoch: usize) -> &[f64] {
        &self.demand[epoch * self.grids..(epoch + 1) * self.grids]
    }
}

pub fn sample_traffic<R: Rng + ?Sized>(model: &TrafficModel, grids: usize, rng: &mut R) -> Result<TrafficField> {
    model.validate()?;
    let epochs = model.epochs();
    let sigma = model.sigma_log;

    let persistent: Vec<f64> = match model.temporal {
        TemporalMode::Persistent => (0..grids).map(|_| rng.sample(StandardNormal)).collect(),
        TemporalMode::Independent => Vec::new(),
    };

    let mut demand = Vec::with_capacity(epochs * grids);
    for t in 0..epochs {
        let mu = model.mu(t);
        for i in 0..grids {
            let z: f64 = match model.temporal {
                TemporalMode::Independent => rng.sample(StandardNormal),
                TemporalMode::Persistent => persistent[i],
            };
            demand.push((mu + sigma * z).exp());
        }
    }
    let threshold = (0..epochs).map(|t| model.threshold_fraction * model.mean(t)).collect();

    Ok(TrafficField { demand, threshold, grids })
}

/// Passes the SNR ratio through only when the grid's demand reaches the
/// threshold; otherwise the grid is worth a unit gain.
pub fn gate_gain(g: f64, demand: f64, threshold: f64) -> f64 {
    if demand >= threshold {
        g
    } else {
        1.0
    }
}
