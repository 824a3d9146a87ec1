//! Experiment orchestration: scenario files, training and evaluation runs,
//! baselines, parameter sweeps and the allocator self-check.
//!
//! A scenario is one TOML document. Every configuration struct is a nested
//! table and unknown keys are rejected:
//!
//! ```toml
//! seed = 7
//! baseline = "psd-td3"
//! num_users = 4
//! p_max_dbm = 30.0
//!
//! [geometry]
//! ris_rows = 4
//! ris_cols = 10
//!
//! [jamming]
//! power_dbm = 10.0
//!
//! [agent]
//! episodes = 100
//! steps_per_episode = 100
//! ```

mod oracle;
mod run;
mod sweep;

pub use oracle::{oracle_check, random_instance, OracleInstance, OracleReport};
pub use run::{
    discounted_return, evaluate, run_baseline, run_training, EpisodeSummary, EvalReport, MetricsLog, StepRecord,
    TrainOptions, TrainOutcome, write_eval_csv,
};
pub use sweep::{apply_point, run_sweep, Figure, GeometryAxis, GridFile, GridSpec, SweepRow, SweepSummaryRow};

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{Td3Config, Variant};
use crate::allocator::AllocatorConfig;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::jamming::JammingConfig;
use crate::linkmodel::{ModulationTable, QosProfile};
use crate::propagation::{GeometryConfig, PropagationConfig};
use crate::units::dbm_to_watts;

/// How the surface is driven in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    #[default]
    PsdTd3,
    PsdDdpg,
    /// Phases drawn uniformly on `[0, 2 pi)` every step.
    RandomRis,
    /// Surface removed (zero elements).
    NoRis,
}

impl Baseline {
    pub const ALL: [Baseline; 4] = [Baseline::PsdTd3, Baseline::PsdDdpg, Baseline::RandomRis, Baseline::NoRis];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::PsdTd3 => "psd-td3",
            Baseline::PsdDdpg => "psd-ddpg",
            Baseline::RandomRis => "random-ris",
            Baseline::NoRis => "no-ris",
        }
    }

    /// Whether the run trains an agent.
    pub fn is_learned(self) -> bool {
        matches!(self, Baseline::PsdTd3 | Baseline::PsdDdpg)
    }
}

impl std::str::FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown baseline {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Independent test episodes per replicate.
    pub episodes: usize,
    pub steps: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { episodes: 5, steps: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Factor applied to every sum rate written to CSV. 1 reports
    /// bits/symbol; `bandwidth / subchannels` reports bits/s.
    pub rate_scale: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self { rate_scale: 1.0 }
    }
}

/// One complete experiment description. Powers are given in dBm here and
/// converted to watts by [`ScenarioConfig::env_config`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub baseline: Baseline,
    pub num_users: usize,
    pub p_max_dbm: f64,
    pub geometry: GeometryConfig,
    pub propagation: PropagationConfig,
    pub modulation: ModulationTable,
    pub qos: QosProfile,
    pub jamming: JammingConfig,
    pub allocator: AllocatorConfig,
    pub agent: Td3Config,
    pub eval: EvalConfig,
    pub report: ReportConfig,
}

/// Training budget used unless a scenario asks for more.
pub const DESK_EPISODES: usize = 100;
pub const DESK_STEPS: usize = 100;
/// Full training budget.
pub const FULL_EPISODES: usize = 400;
pub const FULL_STEPS: usize = 200;

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            baseline: Baseline::PsdTd3,
            num_users: 4,
            p_max_dbm: 30.0,
            geometry: GeometryConfig::default(),
            propagation: PropagationConfig::default(),
            modulation: ModulationTable::default(),
            qos: QosProfile::default(),
            jamming: JammingConfig::default(),
            allocator: AllocatorConfig::default(),
            agent: Td3Config { episodes: DESK_EPISODES, steps_per_episode: DESK_STEPS, ..Td3Config::default() },
            eval: EvalConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Canonical TOML form; parsing it back gives an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    /// First 16 hex digits of the SHA-256 of the canonical form with the
    /// seed zeroed, so a (hash, seed) pair identifies a run.
    pub fn hash(&self) -> String {
        let canonical = ScenarioConfig { seed: 0, ..self.clone() }.to_toml();
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }

    /// Switches to the full training budget.
    pub fn full_scale(mut self) -> Self {
        self.agent.episodes = FULL_EPISODES;
        self.agent.steps_per_episode = FULL_STEPS;
        self
    }

    pub fn num_elements(&self) -> usize {
        match self.baseline {
            Baseline::NoRis => 0,
            _ => self.geometry.num_elements(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 {
            return Err(Error::Config("num_users must be >= 1".into()));
        }
        if self.p_max_dbm.is_nan() || self.p_max_dbm == f64::INFINITY {
            return Err(Error::Config("p_max_dbm must be finite or -inf".into()));
        }
        if self.agent.episodes == 0 || self.agent.steps_per_episode == 0 {
            return Err(Error::Config("agent.episodes and agent.steps_per_episode must be >= 1".into()));
        }
        if self.eval.episodes == 0 || self.eval.steps == 0 {
            return Err(Error::Config("eval.episodes and eval.steps must be >= 1".into()));
        }
        if !(self.report.rate_scale.is_finite() && self.report.rate_scale > 0.0) {
            return Err(Error::Config("report.rate_scale must be > 0".into()));
        }
        self.jamming.validate()?;
        self.agent.validate()?;
        self.env_config().validate()
    }

    /// Environment description in watts. `no-ris` drops the surface.
    pub fn env_config(&self) -> EnvConfig {
        let mut geometry = self.geometry.clone();
        if self.baseline == Baseline::NoRis {
            geometry.ris_cols = 0;
        }
        EnvConfig {
            geometry,
            propagation: self.propagation.clone(),
            modulation: self.modulation.clone(),
            qos: self.qos.clone(),
            allocator: self.allocator.clone(),
            num_users: self.num_users,
            p_max: dbm_to_watts(self.p_max_dbm),
            jam_mean_power: dbm_to_watts(self.jamming.power_dbm),
            jam_alpha: self.jamming.alpha,
            jam_beta: self.jamming.beta,
            jam_equal_power: self.jamming.equal_power,
            normalize_state: self.agent.normalize_state,
        }
    }

    /// Agent settings with the variant implied by the baseline.
    pub fn agent_config(&self) -> Td3Config {
        let variant = match self.baseline {
            Baseline::PsdDdpg => Variant::Ddpg,
            _ => Variant::Td3,
        };
        Td3Config { variant, ..self.agent.clone() }
    }
}

/// Purposes of the random streams derived from a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum SeedPurpose {
    TrainEnv = 1,
    AgentInit = 2,
    AgentNoise = 3,
    BaselineActions = 4,
    EvalEnv = 5,
    EvalActions = 6,
    Oracle = 7,
}

/// Deterministic sub-seed for `(master, purpose, index)`.
pub fn derive_seed(master: u64, purpose: SeedPurpose, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((purpose as u64) << 32) | (index & 0xffff_ffff));
    rng.next_u64()
}
