//! Step-based environment: the agent picks surface phases, the environment
//! draws a fading block, solves the allocation and reports the sum rate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::allocator::{solve_allocation, AllocationDecision, AllocatorConfig, DualState};
use crate::error::{Error, Result};
use crate::jamming::jam_weights;
use crate::linkmodel::{effective_gains, ModulationTable, QosProfile, RisConfig};
use crate::propagation::{
    compute_geometry, sample_channels_split, sample_user_positions, DistanceTable, GeometryConfig, Position,
    PropagationConfig,
};

/// Physical description of one environment, all powers in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub geometry: GeometryConfig,
    pub propagation: PropagationConfig,
    pub modulation: ModulationTable,
    pub qos: QosProfile,
    pub allocator: AllocatorConfig,
    pub num_users: usize,
    pub p_max: f64,
    pub jam_mean_power: f64,
    pub jam_alpha: f64,
    pub jam_beta: f64,
    pub jam_equal_power: bool,
    /// Observations are rates divided by `K * r_L`.
    pub normalize_state: bool,
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.propagation.validate()?;
        self.modulation.validate()?;
        self.qos.validate(&self.modulation)?;
        self.allocator.validate()?;
        if self.num_users == 0 {
            return Err(Error::Config("at least one user is required".into()));
        }
        if self.p_max.is_nan() || self.p_max < 0.0 || self.jam_mean_power.is_nan() || self.jam_mean_power < 0.0 {
            return Err(Error::Config("powers must be >= 0".into()));
        }
        Ok(())
    }

    pub fn num_elements(&self) -> usize {
        self.geometry.num_elements()
    }

    /// Largest attainable sum rate, `K * r_L`.
    pub fn rate_ceiling(&self) -> f64 {
        self.propagation.subchannels as f64 * self.modulation.max_rate()
    }
}

/// Independent random streams, so that runs differing only in the surface
/// or in the action sequence see identical user drops, direct fading and
/// jamming.
#[derive(Debug, Clone)]
pub struct EnvStreams {
    pub positions: ChaCha8Rng,
    pub direct: ChaCha8Rng,
    pub surface: ChaCha8Rng,
    pub jamming: ChaCha8Rng,
}

impl EnvStreams {
    pub fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(id);
            r
        };
        Self { positions: stream(1), direct: stream(2), surface: stream(3), jamming: stream(4) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Observation for the next decision.
    pub next_state: Vec<f64>,
    /// Per-user rates, bits/symbol.
    pub rates: Vec<f64>,
    /// Sum rate, bits/symbol.
    pub reward: f64,
    pub total_power: f64,
    pub ratio_residual: Vec<f64>,
    pub converged: bool,
    pub repaired: bool,
    /// Some action coordinate fell outside `[0, 2 pi]` and was clamped.
    pub action_clamped: bool,
    pub allocation: AllocationDecision,
}

#[derive(Debug, Clone)]
pub struct Env {
    cfg: EnvConfig,
    streams: EnvStreams,
    users: Vec<Position>,
    distances: Option<DistanceTable>,
    duals: Option<DualState>,
    steps: u64,
}

impl Env {
    pub fn new(cfg: EnvConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, streams: EnvStreams::new(seed), users: Vec::new(), distances: None, duals: None, steps: 0 })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn streams(&self) -> &EnvStreams {
        &self.streams
    }

    pub fn users(&self) -> &[Position] {
        &self.users
    }

    pub fn state_dim(&self) -> usize {
        self.cfg.num_users
    }

    pub fn action_dim(&self) -> usize {
        self.cfg.num_elements()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Observation for raw per-user rates.
    pub fn observe(&self, rates: &[f64]) -> Vec<f64> {
        if self.cfg.normalize_state {
            let c = self.cfg.rate_ceiling();
            rates.iter().map(|r| r / c).collect()
        } else {
            rates.to_vec()
        }
    }

    /// New user drop and a first block under all-zero phases, with the
    /// allocator multipliers reset.
    pub fn reset(&mut self) -> Result<Vec<f64>> {
        let dist = loop {
            let users = sample_user_positions(&self.cfg.geometry, self.cfg.num_users, &mut self.streams.positions);
            match compute_geometry(&self.cfg.geometry, &users) {
                Ok(d) => {
                    self.users = users;
                    break d;
                }
                Err(Error::CoincidentPoints(_)) => continue,
                Err(e) => return Err(e),
            }
        };
        self.distances = Some(dist);
        self.duals = None;
        let zeros = RisConfig::zeros(self.cfg.num_elements());
        let out = self.play(zeros, false)?;
        Ok(out.next_state)
    }

    /// Applies `action` (one phase per element; ignored when the surface has
    /// no elements) to a fresh fading block.
    pub fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        let n = self.cfg.num_elements();
        let (ris, clamped) = if n == 0 {
            (RisConfig::zeros(0), false)
        } else if action.len() != n {
            return Err(Error::Dimension { context: "surface action", expected: n, actual: action.len() });
        } else {
            RisConfig::from_action(action)
        };
        self.play(ris, clamped)
    }

    fn play(&mut self, ris: RisConfig, action_clamped: bool) -> Result<StepOutcome> {
        let dist = self
            .distances
            .as_ref()
            .ok_or_else(|| Error::Config("environment stepped before reset".into()))?;
        let ch = sample_channels_split(&self.cfg.propagation, dist, &mut self.streams.direct, &mut self.streams.surface);
        let jam = jam_weights(
            self.cfg.jam_alpha,
            self.cfg.jam_beta,
            self.cfg.jam_equal_power,
            self.cfg.propagation.subchannels,
            self.cfg.jam_mean_power,
            &mut self.streams.jamming,
        )?;
        let table = effective_gains(&ch, &ris, jam, self.cfg.propagation.noise_power())?;
        let out = solve_allocation(
            &table,
            &self.cfg.modulation,
            &self.cfg.qos,
            self.cfg.p_max,
            &self.cfg.allocator,
            self.duals.as_ref(),
        )?;
        self.steps += 1;
        self.duals = Some(out.duals);
        let s = out.summary;
        Ok(StepOutcome {
            next_state: self.observe(&s.rate),
            reward: s.total_rate,
            rates: s.rate,
            total_power: s.total_power,
            ratio_residual: s.ratio_residual,
            converged: out.converged,
            repaired: out.repaired,
            action_clamped,
            allocation: out.decision,
        })
    }
}
