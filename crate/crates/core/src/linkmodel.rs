//! Effective cascaded gains, SINR, the exponential BER model and its
//! inversion to a minimum transmit power.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::ChannelRealization;

/// Surface phase shifts, one per element, each in `[0, 2pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RisConfig {
    theta: Vec<f64>,
}

impl RisConfig {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if let Some(bad) = theta.iter().find(|t| !(0.0..TAU).contains(*t)) {
            return Err(Error::Config(format!("phase shift {bad} outside [0, 2pi)")));
        }
        Ok(Self { theta })
    }

    /// All-zero configuration (identity reflection).
    pub fn zeros(n: usize) -> Self {
        Self { theta: vec![0.0; n] }
    }

    /// Builds a configuration from arbitrary real phases. Values in `[0, 2pi]`
    /// are wrapped silently (`2pi` is the same phase as `0`); anything outside
    /// is clamped into that range first. Returns the config and whether any
    /// coordinate had to be clamped.
    pub fn from_action(action: &[f64]) -> (Self, bool) {
        let mut clamped = false;
        let theta = action
            .iter()
            .map(|&a| {
                let a = if a.is_nan() {
                    clamped = true;
                    0.0
                } else if !(0.0..=TAU).contains(&a) {
                    clamped = true;
                    a.clamp(0.0, TAU)
                } else {
                    a
                };
                if a >= TAU {
                    0.0
                } else {
                    a
                }
            })
            .collect();
        (Self { theta }, clamped)
    }

    pub fn phases(&self) -> &[f64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Reflection coefficients `exp(j theta_n)`.
    pub fn coefficients(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.theta.iter().map(|&t| Complex64::from_polar(1.0, t))
    }
}

/// Per-(user, subchannel) effective power gains plus the interference terms
/// needed to turn them into SINR.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveLinkTable {
    /// `|h_{m,k}|^2`, `[user][subchannel]`.
    pub gain: Vec<Vec<f64>>,
    /// `|h^J_{m,k}|^2`, `[user][subchannel]`.
    pub jam_gain: Vec<Vec<f64>>,
    /// W per subchannel.
    pub noise_power: f64,
    /// Jammer power per subchannel, W.
    pub jam_power: Vec<f64>,
}

impl EffectiveLinkTable {
    pub fn num_users(&self) -> usize {
        self.gain.len()
    }

    pub fn num_subchannels(&self) -> usize {
        self.jam_power.len()
    }

    /// `p^J_k |h^J_{m,k}|^2 + sigma^2`.
    pub fn interference(&self, user: usize, sub: usize) -> f64 {
        self.jam_power[sub] * self.jam_gain[user][sub] + self.noise_power
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.jam_power.len();
        if self.jam_gain.len() != self.gain.len() {
            return Err(Error::Dimension {
                context: "jammer gain users",
                expected: self.gain.len(),
                actual: self.jam_gain.len(),
            });
        }
        for row in self.gain.iter().chain(&self.jam_gain) {
            if row.len() != k {
                return Err(Error::Dimension { context: "gain subchannels", expected: k, actual: row.len() });
            }
        }
        let values = self.gain.iter().flatten().chain(self.jam_gain.iter().flatten()).chain(&self.jam_power);
        for &v in values {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("link table entry {v} is not finite and non-negative")));
            }
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(Error::Config(format!("noise power must be > 0, got {}", self.noise_power)));
        }
        Ok(())
    }
}

/// Applies the surface configuration to one fading block.
///
/// `h_{m,k} = sum_n conj(h_br[n]) exp(-j theta_n) h_ru[n][m] + h_d[m][k]`,
/// and likewise for the jammer with `h_jr` and `h_jd`.
pub fn effective_gains(
    ch: &ChannelRealization,
    ris: &RisConfig,
    jam_power: Vec<f64>,
    noise_power: f64,
) -> Result<EffectiveLinkTable> {
    let n = ch.num_elements();
    if ris.len() != n {
        return Err(Error::Dimension { context: "surface phases", expected: n, actual: ris.len() });
    }
    let k = ch.num_subchannels();
    if jam_power.len() != k {
        return Err(Error::Dimension { context: "jamming powers", expected: k, actual: jam_power.len() });
    }
    let m = ch.num_users();

    // Reflected part is flat across subchannels: one sum per user.
    let mut reflected = vec![Complex64::new(0.0, 0.0); m];
    let mut reflected_jam = vec![Complex64::new(0.0, 0.0); m];
    for (idx, phi) in ris.coefficients().enumerate() {
        let phi_h = phi.conj();
        let br = ch.h_br[idx].conj() * phi_h;
        let jr = ch.h_jr[idx].conj() * phi_h;
        for (user, ru) in ch.h_ru[idx].iter().enumerate() {
            reflected[user] += br * ru;
            reflected_jam[user] += jr * ru;
        }
    }

    let gain = (0..m)
        .map(|u| ch.h_d[u].iter().map(|hd| (reflected[u] + hd).norm_sqr()).collect())
        .collect();
    let jam_gain = (0..m)
        .map(|u| ch.h_jd[u].iter().map(|hj| (reflected_jam[u] + hj).norm_sqr()).collect())
        .collect();
    Ok(EffectiveLinkTable { gain, jam_gain, noise_power, jam_power })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulationTable {
    /// Bits/symbol per mode; mode 0 is "no transmission" with rate 0.
    pub rates: Vec<f64>,
    pub beta1: f64,
    /// Sign is ignored; the BER model always uses `-|beta2|`.
    pub beta2: f64,
}

impl Default for ModulationTable {
    fn default() -> Self {
        Self { rates: vec![0.0, 2.0, 4.0, 6.0], beta1: 0.2, beta2: -1.6 }
    }
}

impl ModulationTable {
    pub fn validate(&self) -> Result<()> {
        if self.rates.first() != Some(&0.0) {
            return Err(Error::Config("modulation.rates must start with 0 (no transmission)".into()));
        }
        if !self.rates.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Config("modulation.rates must be strictly increasing".into()));
        }
        if !(self.beta1 > 0.0 && self.beta2 != 0.0 && self.beta2.is_finite()) {
            return Err(Error::Config("modulation.beta1 must be > 0 and beta2 non-zero".into()));
        }
        Ok(())
    }

    /// Highest rate `r_L`.
    pub fn max_rate(&self) -> f64 {
        self.rates.last().copied().unwrap_or(0.0)
    }

    /// Number of transmitting modes (excluding mode 0).
    pub fn active_modes(&self) -> usize {
        self.rates.len().saturating_sub(1)
    }

    pub fn beta2_magnitude(&self) -> f64 {
        self.beta2.abs()
    }
}

/// Data stream class. `Hq` carries the stricter BER target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StreamClass {
    Hq,
    Lq,
}

impl StreamClass {
    pub const ALL: [StreamClass; 2] = [StreamClass::Hq, StreamClass::Lq];

    pub fn index(self) -> usize {
        match self {
            StreamClass::Hq => 0,
            StreamClass::Lq => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QosProfile {
    pub hq_ber: f64,
    pub lq_ber: f64,
    /// Required HQ/LQ rate ratio per user.
    pub chi: f64,
}

impl Default for QosProfile {
    fn default() -> Self {
        Self { hq_ber: 1e-6, lq_ber: 1e-2, chi: 1.0 }
    }
}

impl QosProfile {
    pub fn ber_target(&self, class: StreamClass) -> f64 {
        match class {
            StreamClass::Hq => self.hq_ber,
            StreamClass::Lq => self.lq_ber,
        }
    }

    pub fn validate(&self, mods: &ModulationTable) -> Result<()> {
        for ber in [self.hq_ber, self.lq_ber] {
            if !(ber > 0.0 && ber < mods.beta1) {
                return Err(Error::Config(format!(
                    "BER target {ber} must lie in (0, beta1 = {})",
                    mods.beta1
                )));
            }
        }
        if !(self.chi > 0.0 && self.chi.is_finite()) {
            return Err(Error::Config(format!("qos.chi must be > 0, got {}", self.chi)));
        }
        Ok(())
    }
}

/// `p g / (p_J g_J + sigma^2)`.
pub fn sinr(power: f64, gain: f64, jam_gain: f64, jam_power: f64, noise: f64) -> f64 {
    power * gain / (jam_power * jam_gain + noise)
}

/// `beta1 exp(-|beta2| gamma / (2^r - 1))`.
pub fn ber(sinr: f64, rate: f64, mods: &ModulationTable) -> Result<f64> {
    if rate <= 0.0 {
        return Err(Error::ZeroRateMode);
    }
    Ok(mods.beta1 * (-mods.beta2_magnitude() * sinr / (2f64.powf(rate) - 1.0)).exp())
}

/// Smallest power whose BER meets `target` exactly.
///
/// `(2^r - 1) ln(beta1 / target) (p_J g_J + sigma^2) / (|beta2| g)`. Mode 0
/// needs no power; a zero gain with a transmitting mode is unservable.
pub fn min_power(
    gain: f64,
    jam_gain: f64,
    jam_power: f64,
    noise: f64,
    rate: f64,
    target: f64,
    mods: &ModulationTable,
) -> Result<f64> {
    if rate == 0.0 {
        return Ok(0.0);
    }
    if gain <= 0.0 {
        return Err(Error::UnservableLink);
    }
    let spectral = 2f64.powf(rate) - 1.0;
    Ok(spectral * (mods.beta1 / target).ln() * (jam_power * jam_gain + noise) / (mods.beta2_magnitude() * gain))
}
