//! Per-subchannel jamming power profiles.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JammingConfig {
    /// Mean jamming power per subchannel, dBm.
    pub power_dbm: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Spread the power evenly instead of drawing Beta weights.
    pub equal_power: bool,
}

impl Default for JammingConfig {
    fn default() -> Self {
        Self { power_dbm: 10.0, alpha: 5.0, beta: 5.0, equal_power: true }
    }
}

impl JammingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(Error::Config(format!("jamming shape must be positive, got ({}, {})", self.alpha, self.beta)));
        }
        if self.power_dbm.is_nan() || self.power_dbm == f64::INFINITY {
            return Err(Error::Config("jamming.power_dbm must be finite or -inf".into()));
        }
        Ok(())
    }
}

/// Jamming powers (W) whose average over the `k` subchannels is exactly
/// `mean_power`: Beta(`alpha`, `beta`) weights rescaled to sum to `k`.
/// `equal_power` skips the draw and returns a flat profile.
pub fn jam_weights<R: Rng + ?Sized>(
    alpha: f64,
    beta: f64,
    equal_power: bool,
    k: usize,
    mean_power: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if equal_power || k == 0 {
        return Ok(vec![mean_power; k]);
    }
    let dist = Beta::new(alpha, beta).map_err(|e| Error::Config(format!("jamming shape: {e}")))?;
    loop {
        let x: Vec<f64> = (0..k).map(|_| dist.sample(rng)).collect();
        let total: f64 = x.iter().sum();
        if total > 0.0 {
            return Ok(x.into_iter().map(|xi| mean_power * xi * k as f64 / total).collect());
        }
    }
}
