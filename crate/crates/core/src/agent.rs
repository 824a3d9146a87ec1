//! TD3 learner over a continuous phase-shift action, with a DDPG variant.
//!
//! The actor maps the state to `N` phases through a sigmoid head scaled to
//! `[0, 2 pi]`; each critic scores the concatenation `[state, action]`.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{optimizer_step, polyak_blend, Activation, DenseNet, GradientSet, OptimizerState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Td3,
    /// Single critic, no target smoothing, actor updated every step.
    Ddpg,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LrSchedule {
    #[default]
    Constant,
    /// `lr / (1 + decay * t)` with `t` the optimizer step count, which is
    /// square-summable but not summable.
    SquareSummable { decay: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Td3Config {
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Polyak weight of the online network in each target blend.
    pub polyak: f64,
    pub buffer_capacity: usize,
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub batch_size: usize,
    pub policy_delay: usize,
    /// Bound on the target-smoothing noise.
    pub max_noise: f64,
    /// Variance of the Gaussian exploration noise.
    pub exploration_variance: f64,
    /// Variance of the Gaussian target-smoothing noise.
    pub policy_variance: f64,
    pub action_low: f64,
    pub action_high: f64,
    pub variant: Variant,
    pub hidden: Vec<usize>,
    /// Divide received rates by the largest attainable sum rate.
    pub normalize_state: bool,
    pub lr_schedule: LrSchedule,
}

impl Default for Td3Config {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            polyak: 5e-3,
            buffer_capacity: 100_000,
            episodes: 400,
            steps_per_episode: 200,
            batch_size: 16,
            policy_delay: 2,
            max_noise: 0.5,
            exploration_variance: 0.2,
            policy_variance: 0.2,
            action_low: 0.0,
            action_high: std::f64::consts::TAU,
            variant: Variant::Td3,
            hidden: vec![128, 64],
            normalize_state: true,
            lr_schedule: LrSchedule::Constant,
        }
    }
}

impl Td3Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("agent.gamma must lie in (0, 1)");
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return bad("learning rates must be > 0");
        }
        if !(0.0..=1.0).contains(&self.polyak) {
            return bad("agent.polyak must lie in [0, 1]");
        }
        if self.policy_delay == 0 || self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return bad("policy_delay and batch_size must be >= 1 and the buffer must hold a batch");
        }
        if self.action_low.partial_cmp(&self.action_high) != Some(std::cmp::Ordering::Less) {
            return bad("action_low must be below action_high");
        }
        if !(self.max_noise >= 0.0 && self.exploration_variance >= 0.0 && self.policy_variance >= 0.0) {
            return bad("noise parameters must be >= 0");
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        if let LrSchedule::SquareSummable { decay } = self.lr_schedule {
            if !(decay > 0.0) {
                return bad("learning-rate decay must be > 0");
            }
        }
        Ok(())
    }

    pub fn effective_delay(&self) -> usize {
        match self.variant {
            Variant::Td3 => self.policy_delay,
            Variant::Ddpg => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    /// Sum rate, bits/symbol.
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Fixed-capacity FIFO of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self { capacity: capacity.max(1), items: Vec::new(), cursor: 0 }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends, overwriting the oldest entry once full.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Entry `i` in insertion order, 0 being the oldest retained.
    pub fn get(&self, i: usize) -> Option<&Transition> {
        if i >= self.items.len() {
            return None;
        }
        let start = if self.items.len() < self.capacity { 0 } else { self.cursor };
        self.items.get((start + i) % self.items.len())
    }

    /// Distinct storage slots drawn uniformly.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<usize>> {
        if batch > self.items.len() {
            return Err(Error::Underfilled { stored: self.items.len(), requested: batch });
        }
        Ok(rand::seq::index::sample(rng, self.items.len(), batch).into_vec())
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<&Transition>> {
        Ok(self.sample_indices(batch, rng)?.into_iter().map(|i| &self.items[i]).collect())
    }
}

/// Network roles, used to count forward evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetRole {
    Actor,
    Critic1,
    Critic2,
    TargetActor,
    TargetCritic1,
    TargetCritic2,
}

impl NetRole {
    pub const ALL: [NetRole; 6] = [
        NetRole::Actor,
        NetRole::Critic1,
        NetRole::Critic2,
        NetRole::TargetActor,
        NetRole::TargetCritic1,
        NetRole::TargetCritic2,
    ];

    pub fn is_target(self) -> bool {
        matches!(self, NetRole::TargetActor | NetRole::TargetCritic1 | NetRole::TargetCritic2)
    }
}

/// Per-network forward-pass counters. Atomic so that a trained agent can
/// be evaluated from several threads at once.
#[derive(Debug, Default)]
pub struct ForwardCounts([AtomicU64; 6]);

impl Clone for ForwardCounts {
    fn clone(&self) -> Self {
        Self(std::array::from_fn(|i| AtomicU64::new(self.0[i].load(Ordering::Relaxed))))
    }
}

impl ForwardCounts {
    fn bump(&self, role: NetRole) {
        self.0[role as usize].fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self, role: NetRole) -> u64 {
        self.0[role as usize].load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> [u64; 6] {
        std::array::from_fn(|i| self.0[i].load(Ordering::Relaxed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticLosses {
    pub critic1: f64,
    /// Absent for the DDPG variant.
    pub critic2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateReport {
    pub losses: CriticLosses,
    pub actor_updated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AgentState {
    config: Td3Config,
    critic_updates: u64,
    actor_updates: u64,
    actor_opt: OptimizerState,
    critic1_opt: OptimizerState,
    critic2_opt: OptimizerState,
}

#[derive(Debug, Clone)]
pub struct Td3Agent {
    cfg: Td3Config,
    pub actor: DenseNet,
    pub critic1: DenseNet,
    pub critic2: DenseNet,
    pub target_actor: DenseNet,
    pub target_critic1: DenseNet,
    pub target_critic2: DenseNet,
    actor_opt: OptimizerState,
    critic1_opt: OptimizerState,
    critic2_opt: OptimizerState,
    critic_updates: u64,
    actor_updates: u64,
    counts: ForwardCounts,
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

fn gaussian(variance: f64) -> Option<Normal<f64>> {
    (variance > 0.0).then(|| Normal::new(0.0, variance.sqrt()).expect("finite positive std"))
}

impl Td3Agent {
    /// Fresh agent with hidden layers `cfg.hidden` (rectifier), a scaled
    /// sigmoid actor head and linear critic heads. Network seeds derive from
    /// `seed`.
    pub fn new(cfg: Td3Config, state_dim: usize, action_dim: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let span = cfg.action_high - cfg.action_low;
        if cfg.action_low != 0.0 {
            return Err(Error::Config("the sigmoid actor head needs action_low = 0".into()));
        }
        let hidden_acts = vec![Activation::Relu; cfg.hidden.len()];
        let mut actor_sizes = vec![state_dim];
        actor_sizes.extend(&cfg.hidden);
        actor_sizes.push(action_dim);
        let mut actor_acts = hidden_acts.clone();
        actor_acts.push(Activation::SigmoidScaled { scale: span });
        let mut critic_sizes = vec![state_dim + action_dim];
        critic_sizes.extend(&cfg.hidden);
        critic_sizes.push(1);
        let mut critic_acts = hidden_acts;
        critic_acts.push(Activation::Identity);

        let mix = |role: u64| seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(role);
        let actor = DenseNet::new(&actor_sizes, &actor_acts, mix(1))?;
        let critic1 = DenseNet::new(&critic_sizes, &critic_acts, mix(2))?;
        let critic2 = DenseNet::new(&critic_sizes, &critic_acts, mix(3))?;
        Self::from_networks(cfg, actor, critic1, critic2)
    }

    /// Agent around explicit networks; targets start as exact copies.
    pub fn from_networks(cfg: Td3Config, actor: DenseNet, critic1: DenseNet, critic2: DenseNet) -> Result<Self> {
        cfg.validate()?;
        let (s, a) = (actor.input_dim(), actor.output_dim());
        for c in [&critic1, &critic2] {
            if c.input_dim() != s + a || c.output_dim() != 1 {
                return Err(Error::Architecture("critic must map state+action to one value".into()));
            }
        }
        Ok(Self {
            actor_opt: OptimizerState::adam(&actor, cfg.actor_lr),
            critic1_opt: OptimizerState::adam(&critic1, cfg.critic_lr),
            critic2_opt: OptimizerState::adam(&critic2, cfg.critic_lr),
            target_actor: actor.clone(),
            target_critic1: critic1.clone(),
            target_critic2: critic2.clone(),
            actor,
            critic1,
            critic2,
            cfg,
            critic_updates: 0,
            actor_updates: 0,
            counts: ForwardCounts::default(),
        })
    }

    pub fn config(&self) -> &Td3Config {
        &self.cfg
    }

    pub fn state_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.actor.output_dim()
    }

    pub fn critic_updates(&self) -> u64 {
        self.critic_updates
    }

    pub fn actor_updates(&self) -> u64 {
        self.actor_updates
    }

    pub fn forward_counts(&self) -> &ForwardCounts {
        &self.counts
    }

    fn net(&self, role: NetRole) -> &DenseNet {
        match role {
            NetRole::Actor => &self.actor,
            NetRole::Critic1 => &self.critic1,
            NetRole::Critic2 => &self.critic2,
            NetRole::TargetActor => &self.target_actor,
            NetRole::TargetCritic1 => &self.target_critic1,
            NetRole::TargetCritic2 => &self.target_critic2,
        }
    }

    /// Forward pass of one network, counted.
    pub fn eval(&self, role: NetRole, input: &[f64]) -> Result<Vec<f64>> {
        self.counts.bump(role);
        self.net(role).forward(input)
    }

    fn clip(&self, a: f64) -> f64 {
        a.clamp(self.cfg.action_low, self.cfg.action_high)
    }

    /// `clip(mu(s) + eps)` with `eps ~ N(0, variance)` per coordinate; pass
    /// zero variance for evaluation.
    pub fn select_action<R: Rng + ?Sized>(&self, state: &[f64], variance: f64, rng: &mut R) -> Result<Vec<f64>> {
        let mut a = self.eval(NetRole::Actor, state)?;
        let noise = gaussian(variance);
        for x in &mut a {
            let eps = noise.map_or(0.0, |n| n.sample(rng));
            *x = self.clip(*x + eps);
        }
        Ok(a)
    }

    /// Target action with clipped smoothing noise (none for DDPG).
    pub fn smooth_target_action<R: Rng + ?Sized>(&self, next_state: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let mut a = self.eval(NetRole::TargetActor, next_state)?;
        let noise = match self.cfg.variant {
            Variant::Td3 => gaussian(self.cfg.policy_variance),
            Variant::Ddpg => None,
        };
        let bound = self.cfg.max_noise;
        for x in &mut a {
            let eps = noise.map_or(0.0, |n| n.sample(rng));
            *x = self.clip(*x + eps.clamp(-bound, bound));
        }
        Ok(a)
    }

    /// TD targets `y = r + gamma * min_k Q'_k(s', a')`, using only target
    /// networks.
    pub fn target_values<R: Rng + ?Sized>(&self, batch: &[&Transition], rng: &mut R) -> Result<Vec<f64>> {
        batch
            .iter()
            .map(|t| {
                let a_next = self.smooth_target_action(&t.next_state, rng)?;
                let x = concat(&t.next_state, &a_next);
                let q1 = self.eval(NetRole::TargetCritic1, &x)?[0];
                let q = match self.cfg.variant {
                    Variant::Td3 => q1.min(self.eval(NetRole::TargetCritic2, &x)?[0]),
                    Variant::Ddpg => q1,
                };
                Ok(t.reward + self.cfg.gamma * q)
            })
            .collect()
    }

    fn scheduled_lr(&self, base: f64, steps: u64) -> f64 {
        match self.cfg.lr_schedule {
            LrSchedule::Constant => base,
            LrSchedule::SquareSummable { decay } => base / (1.0 + decay * steps as f64),
        }
    }

    /// One optimizer step on each critic's mean squared TD error. A
    /// non-finite loss or gradient aborts the update before any network
    /// changes.
    pub fn critic_update<R: Rng + ?Sized>(&mut self, batch: &[&Transition], rng: &mut R) -> Result<CriticLosses> {
        if batch.is_empty() {
            return Err(Error::Underfilled { stored: 0, requested: 1 });
        }
        let y = self.target_values(batch, rng)?;
        let n = batch.len() as f64;
        let two_critics = self.cfg.variant == Variant::Td3;

        let mut computed = Vec::with_capacity(2);
        for (role, net) in [(NetRole::Critic1, &self.critic1), (NetRole::Critic2, &self.critic2)] {
            if role == NetRole::Critic2 && !two_critics {
                break;
            }
            let mut grads = GradientSet::zeros_like(net);
            let mut loss = 0.0;
            for (t, &yi) in batch.iter().zip(&y) {
                self.counts.bump(role);
                let trace = net.forward_trace(&concat(&t.state, &t.action))?;
                let err = trace.output()[0] - yi;
                loss += err * err / n;
                net.backward_trace(&trace, &[2.0 * err / n], &mut grads)?;
            }
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss);
            }
            if !grads.is_finite() {
                return Err(Error::NonFiniteGradient);
            }
            computed.push((loss, grads));
        }

        let lr = self.scheduled_lr(self.cfg.critic_lr, self.critic1_opt.step);
        let mut it = computed.into_iter();
        let (l1, g1) = it.next().expect("first critic always present");
        self.critic1_opt.learning_rate = lr;
        optimizer_step(&mut self.critic1, &g1, &mut self.critic1_opt)?;
        let l2 = match it.next() {
            Some((l2, g2)) => {
                self.critic2_opt.learning_rate = lr;
                optimizer_step(&mut self.critic2, &g2, &mut self.critic2_opt)?;
                Some(l2)
            }
            None => None,
        };
        self.critic_updates += 1;
        Ok(CriticLosses { critic1: l1, critic2: l2 })
    }

    /// Gradient of `-mean_i Q_1(s_i, mu(s_i))` with respect to the actor.
    pub fn actor_gradient(&self, batch: &[&Transition]) -> Result<GradientSet> {
        let n = batch.len() as f64;
        let s_dim = self.state_dim();
        let mut grads = GradientSet::zeros_like(&self.actor);
        for t in batch {
            self.counts.bump(NetRole::Actor);
            let trace = self.actor.forward_trace(&t.state)?;
            self.counts.bump(NetRole::Critic1);
            let x = concat(&t.state, trace.output());
            let (_, dx) = self.critic1.backward(&x, &[1.0])?;
            let upstream: Vec<f64> = dx[s_dim..].iter().map(|g| -g / n).collect();
            self.actor.backward_trace(&trace, &upstream, &mut grads)?;
        }
        Ok(grads)
    }

    /// Ascends the first critic along the deterministic policy gradient,
    /// then blends all three targets toward their online networks.
    pub fn actor_update(&mut self, batch: &[&Transition]) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::Underfilled { stored: 0, requested: 1 });
        }
        let grads = self.actor_gradient(batch)?;
        self.actor_opt.learning_rate = self.scheduled_lr(self.cfg.actor_lr, self.actor_opt.step);
        optimizer_step(&mut self.actor, &grads, &mut self.actor_opt)?;
        let rho = self.cfg.polyak;
        polyak_blend(&mut self.target_actor, &self.actor, rho)?;
        polyak_blend(&mut self.target_critic1, &self.critic1, rho)?;
        if self.cfg.variant == Variant::Td3 {
            polyak_blend(&mut self.target_critic2, &self.critic2, rho)?;
        }
        self.actor_updates += 1;
        Ok(())
    }

    /// Critic update, plus an actor/target update every `policy_delay`
    /// critic updates. Returns `None` while the buffer holds less than one
    /// batch.
    pub fn train_step<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer, rng: &mut R) -> Result<Option<UpdateReport>> {
        if buffer.len() < self.cfg.batch_size {
            return Ok(None);
        }
        let batch = buffer.sample(self.cfg.batch_size, rng)?;
        let losses = self.critic_update(&batch, rng)?;
        let actor_updated = self.critic_updates % self.cfg.effective_delay() as u64 == 0;
        if actor_updated {
            self.actor_update(&batch)?;
        }
        Ok(Some(UpdateReport { losses, actor_updated }))
    }

    /// Writes the six networks and an `agent.json` sidecar into `dir`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, role) in Self::FILES {
            let path = dir.join(name);
            let f = File::create(&path).map_err(|e| Error::Checkpoint { path: path.clone(), reason: e.to_string() })?;
            self.net(role).save(BufWriter::new(f))?;
        }
        let state = AgentState {
            config: self.cfg.clone(),
            critic_updates: self.critic_updates,
            actor_updates: self.actor_updates,
            actor_opt: self.actor_opt.clone(),
            critic1_opt: self.critic1_opt.clone(),
            critic2_opt: self.critic2_opt.clone(),
        };
        let path = dir.join("agent.json");
        serde_json::to_writer_pretty(BufWriter::new(File::create(&path)?), &state)?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let open = |name: &str| -> Result<BufReader<File>> {
            let path = dir.join(name);
            File::open(&path)
                .map(BufReader::new)
                .map_err(|e| Error::Checkpoint { path, reason: e.to_string() })
        };
        let state: AgentState = serde_json::from_reader(open("agent.json")?)?;
        let mut nets = Vec::with_capacity(6);
        for (name, _) in Self::FILES {
            nets.push(DenseNet::load(open(name)?)?);
        }
        let mut nets = nets.into_iter();
        let mut next = || nets.next().expect("six networks");
        let mut agent = Self::from_networks(state.config, next(), next(), next())?;
        agent.target_actor = next();
        agent.target_critic1 = next();
        agent.target_critic2 = next();
        if !agent.target_actor.same_architecture(&agent.actor) || !agent.target_critic1.same_architecture(&agent.critic1) {
            return Err(Error::Checkpoint { path: dir.to_path_buf(), reason: "target architecture mismatch".into() });
        }
        agent.actor_opt = state.actor_opt;
        agent.critic1_opt = state.critic1_opt;
        agent.critic2_opt = state.critic2_opt;
        agent.critic_updates = state.critic_updates;
        agent.actor_updates = state.actor_updates;
        Ok(agent)
    }

    const FILES: [(&'static str, NetRole); 6] = [
        ("actor.bin", NetRole::Actor),
        ("critic1.bin", NetRole::Critic1),
        ("critic2.bin", NetRole::Critic2),
        ("target_actor.bin", NetRole::TargetActor),
        ("target_critic1.bin", NetRole::TargetCritic1),
        ("target_critic2.bin", NetRole::TargetCritic2),
    ];
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(i: usize) -> Transition {
        Transition { state: vec![i as f64], action: vec![0.0], reward: i as f64, next_state: vec![0.0] }
    }

    #[test]
    fn buffer_evicts_oldest() {
        let mut b = ReplayBuffer::new(2);
        for i in 0..3 {
            b.push(transition(i));
        }
        assert_eq!(b.len(), 2);
        assert_eq!(b.get(0).unwrap().reward, 1.0);
        assert_eq!(b.get(1).unwrap().reward, 2.0);
        assert!(b.get(2).is_none());
    }

    #[test]
    fn underfilled_sample_is_an_error() {
        let mut b = ReplayBuffer::new(10);
        b.push(transition(0));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(b.sample(2, &mut rng), Err(Error::Underfilled { stored: 1, requested: 2 })));
    }

    #[test]
    fn sampled_indices_are_distinct_and_reproducible() {
        let mut b = ReplayBuffer::new(50);
        for i in 0..50 {
            b.push(transition(i));
        }
        let a = b.sample_indices(16, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let c = b.sample_indices(16, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, c);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 16);
    }

    #[test]
    fn config_validation() {
        assert!(Td3Config::default().validate().is_ok());
        assert!(Td3Config { gamma: 1.0, ..Default::default() }.validate().is_err());
        assert!(Td3Config { policy_delay: 0, ..Default::default() }.validate().is_err());
        assert!(Td3Config { action_high: 0.0, ..Default::default() }.validate().is_err());
        assert!(Td3Config { exploration_variance: -1.0, ..Default::default() }.validate().is_err());
        assert_eq!(Td3Config { variant: Variant::Ddpg, ..Default::default() }.effective_delay(), 1);
    }

    #[test]
    fn targets_start_as_copies() {
        let agent = Td3Agent::new(Td3Config::default(), 4, 8, 1).unwrap();
        assert_eq!(agent.actor, agent.target_actor);
        assert_eq!(agent.critic1, agent.target_critic1);
        assert_eq!(agent.critic2, agent.target_critic2);
        assert_ne!(agent.critic1, agent.critic2);
        assert_eq!(agent.actor.sizes(), vec![4, 128, 64, 8]);
        assert_eq!(agent.critic1.sizes(), vec![12, 128, 64, 1]);
    }

    #[test]
    fn noiseless_action_is_the_actor_output() {
        let agent = Td3Agent::new(Td3Config::default(), 3, 5, 2).unwrap();
        let s = [0.2, 0.4, 0.1];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(agent.select_action(&s, 0.0, &mut rng).unwrap(), agent.actor.forward(&s).unwrap());
    }

    #[test]
    fn large_noise_is_clamped_to_bounds() {
        let agent = Td3Agent::new(Td3Config::default(), 2, 50, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = agent.select_action(&[0.0, 0.0], 1e6, &mut rng).unwrap();
        assert!(a.iter().all(|&x| x == 0.0 || x == std::f64::consts::TAU));
    }
}
