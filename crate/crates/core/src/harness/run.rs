//! Training, baseline and evaluation loops, and their metric logs.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, ScenarioConfig, SeedPurpose};
use crate::agent::{ReplayBuffer, Td3Agent, Transition};
use crate::env::{Env, StepOutcome};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub episode: usize,
    pub step: usize,
    /// Sum rate, bits/symbol.
    pub reward: f64,
    pub total_power: f64,
    pub ratio_residual: Vec<f64>,
    pub converged: bool,
    pub repaired: bool,
    pub action_clamped: bool,
    /// Loss of the first critic when an update ran this step.
    pub critic_loss: Option<f64>,
}

impl StepRecord {
    fn new(episode: usize, step: usize, o: &StepOutcome, critic_loss: Option<f64>) -> Self {
        Self {
            episode,
            step,
            reward: o.reward,
            total_power: o.total_power,
            ratio_residual: o.ratio_residual.clone(),
            converged: o.converged,
            repaired: o.repaired,
            action_clamped: o.action_clamped,
            critic_loss,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub episode: usize,
    pub mean_reward: f64,
    pub discounted_return: f64,
    pub wall_clock: Duration,
}

/// Per-step and per-episode records of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsLog {
    pub steps: Vec<StepRecord>,
    pub episodes: Vec<EpisodeSummary>,
}

/// `sum_t gamma^t r_t`.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    rewards.iter().rev().fold(0.0, |acc, r| r + gamma * acc)
}

impl MetricsLog {
    /// Rewards of one episode in step order.
    pub fn episode_rewards(&self, episode: usize) -> Vec<f64> {
        self.steps.iter().filter(|s| s.episode == episode).map(|s| s.reward).collect()
    }

    fn close_episode(&mut self, episode: usize, gamma: f64, started: Instant) {
        let rewards = self.episode_rewards(episode);
        let mean_reward = rewards.iter().sum::<f64>() / rewards.len().max(1) as f64;
        self.episodes.push(EpisodeSummary {
            episode,
            mean_reward,
            discounted_return: discounted_return(&rewards, gamma),
            wall_clock: started.elapsed(),
        });
    }

    /// Mean of the per-episode mean rewards over the last `n` episodes.
    pub fn tail_mean(&self, n: usize) -> f64 {
        let tail = &self.episodes[self.episodes.len().saturating_sub(n)..];
        tail.iter().map(|e| e.mean_reward).sum::<f64>() / tail.len().max(1) as f64
    }

    /// `episode,step,reward,total_power,max_abs_ratio_residual,converged,repaired,action_clamped,critic_loss`
    pub fn write_steps_csv<W: Write>(&self, w: W, rate_scale: f64) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "episode",
            "step",
            "reward",
            "total_power",
            "max_abs_ratio_residual",
            "converged",
            "repaired",
            "action_clamped",
            "critic_loss",
        ])?;
        for s in &self.steps {
            let residual = s.ratio_residual.iter().fold(0.0f64, |a, r| a.max(r.abs()));
            out.write_record([
                s.episode.to_string(),
                s.step.to_string(),
                (s.reward * rate_scale).to_string(),
                s.total_power.to_string(),
                residual.to_string(),
                s.converged.to_string(),
                s.repaired.to_string(),
                s.action_clamped.to_string(),
                s.critic_loss.map(|l| l.to_string()).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `episode,mean_reward,discounted_return`. Wall-clock times are left
    /// out so that the file depends only on the configuration and seed.
    pub fn write_episodes_csv<W: Write>(&self, w: W, rate_scale: f64) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["episode", "mean_reward", "discounted_return"])?;
        for e in &self.episodes {
            out.write_record([
                e.episode.to_string(),
                (e.mean_reward * rate_scale).to_string(),
                (e.discounted_return * rate_scale).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// When set, `latest/` under this directory is rewritten after every
    /// episode and `final/` after the last one.
    pub checkpoint_dir: Option<PathBuf>,
}

pub struct TrainOutcome {
    pub log: MetricsLog,
    pub agent: Td3Agent,
}

fn diverged(episode: usize, step: usize, what: impl Into<String>) -> Error {
    Error::Divergence { episode, step, what: what.into() }
}

/// Trains a PSD-TD3 (or PSD-DDPG) agent for `agent.episodes` episodes of
/// `agent.steps_per_episode` steps, with one agent update per step.
pub fn run_training(scenario: &ScenarioConfig, opts: &TrainOptions) -> Result<TrainOutcome> {
    scenario.validate()?;
    if !scenario.baseline.is_learned() {
        return Err(Error::Config(format!("{} does not train an agent", scenario.baseline.name())));
    }
    if scenario.num_elements() == 0 {
        return Err(Error::Config("a learned surface policy needs at least one element".into()));
    }
    let seed = scenario.seed;
    let agent_cfg = scenario.agent_config();
    let mut env = Env::new(scenario.env_config(), derive_seed(seed, SeedPurpose::TrainEnv, 0))?;
    let mut agent =
        Td3Agent::new(agent_cfg.clone(), env.state_dim(), env.action_dim(), derive_seed(seed, SeedPurpose::AgentInit, 0))?;
    let mut noise = ChaCha8Rng::seed_from_u64(derive_seed(seed, SeedPurpose::AgentNoise, 0));
    let mut buffer = ReplayBuffer::new(agent_cfg.buffer_capacity);
    let mut log = MetricsLog::default();

    for episode in 0..agent_cfg.episodes {
        let started = Instant::now();
        let mut state = env.reset()?;
        for step in 0..agent_cfg.steps_per_episode {
            let action = agent.select_action(&state, agent_cfg.exploration_variance, &mut noise)?;
            if action.iter().any(|a| !a.is_finite()) {
                return Err(diverged(episode, step, "non-finite action"));
            }
            let outcome = env.step(&action)?;
            if !outcome.reward.is_finite() {
                return Err(diverged(episode, step, "non-finite reward"));
            }
            buffer.push(Transition {
                state: std::mem::take(&mut state),
                action,
                reward: outcome.reward,
                next_state: outcome.next_state.clone(),
            });
            let report = agent.train_step(&buffer, &mut noise).map_err(|e| match e {
                Error::NonFiniteLoss | Error::NonFiniteGradient => diverged(episode, step, e.to_string()),
                other => other,
            })?;
            let loss = report.map(|r| r.losses.critic1);
            if loss.is_some_and(|l| !l.is_finite()) {
                return Err(diverged(episode, step, "non-finite critic loss"));
            }
            log.steps.push(StepRecord::new(episode, step, &outcome, loss));
            state = outcome.next_state;
        }
        log.close_episode(episode, agent_cfg.gamma, started);
        if let Some(dir) = &opts.checkpoint_dir {
            agent.save_dir(&dir.join("latest"))?;
        }
    }
    if let Some(dir) = &opts.checkpoint_dir {
        agent.save_dir(&dir.join("final"))?;
    }
    Ok(TrainOutcome { log, agent })
}

fn random_phases<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

/// Runs the `random-ris` or `no-ris` policy over the same budget and the
/// same environment seed as training, so the two logs see identical user
/// drops and fading.
pub fn run_baseline(scenario: &ScenarioConfig) -> Result<MetricsLog> {
    scenario.validate()?;
    if scenario.baseline.is_learned() {
        return Err(Error::Config(format!("{} is not a fixed baseline", scenario.baseline.name())));
    }
    let seed = scenario.seed;
    let mut env = Env::new(scenario.env_config(), derive_seed(seed, SeedPurpose::TrainEnv, 0))?;
    let mut actions = ChaCha8Rng::seed_from_u64(derive_seed(seed, SeedPurpose::BaselineActions, 0));
    let n = env.action_dim();
    let mut log = MetricsLog::default();
    for episode in 0..scenario.agent.episodes {
        let started = Instant::now();
        env.reset()?;
        for step in 0..scenario.agent.steps_per_episode {
            let outcome = env.step(&random_phases(n, &mut actions))?;
            log.steps.push(StepRecord::new(episode, step, &outcome, None));
        }
        log.close_episode(episode, scenario.agent.gamma, started);
    }
    Ok(log)
}

/// Test-time results: one mean sum rate per independent episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub episode_means: Vec<f64>,
}

impl EvalReport {
    pub fn mean(&self) -> f64 {
        self.episode_means.iter().sum::<f64>() / self.episode_means.len().max(1) as f64
    }

    /// Sample standard deviation of the episode means (0 for one episode).
    pub fn std(&self) -> f64 {
        sample_std(&self.episode_means)
    }
}

pub(crate) fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Plays `eval.episodes` episodes of `eval.steps` steps without exploration
/// noise. Learned baselines need `agent`; episode `e` always uses the same
/// environment seed, so different policies and grid points are compared
/// on common random numbers.
pub fn evaluate(scenario: &ScenarioConfig, agent: Option<&Td3Agent>) -> Result<EvalReport> {
    scenario.validate()?;
    let seed = scenario.seed;
    let env_cfg = scenario.env_config();
    let agent = match (scenario.baseline.is_learned(), agent) {
        (true, None) => return Err(Error::Config("evaluating a learned policy needs an agent".into())),
        (true, Some(a)) => {
            if a.state_dim() != scenario.num_users || a.action_dim() != env_cfg.num_elements() {
                return Err(Error::Config(format!(
                    "agent expects {} users and {} elements, scenario has {} and {}",
                    a.state_dim(),
                    a.action_dim(),
                    scenario.num_users,
                    env_cfg.num_elements()
                )));
            }
            Some(a)
        }
        (false, _) => None,
    };
    let mut episode_means = Vec::with_capacity(scenario.eval.episodes);
    for e in 0..scenario.eval.episodes as u64 {
        let mut env = Env::new(env_cfg.clone(), derive_seed(seed, SeedPurpose::EvalEnv, e))?;
        let mut actions = ChaCha8Rng::seed_from_u64(derive_seed(seed, SeedPurpose::EvalActions, e));
        let n = env.action_dim();
        let mut state = env.reset()?;
        let mut total = 0.0;
        for _ in 0..scenario.eval.steps {
            let action = match agent {
                Some(a) => a.select_action(&state, 0.0, &mut actions)?,
                None => random_phases(n, &mut actions),
            };
            let outcome = env.step(&action)?;
            total += outcome.reward;
            state = outcome.next_state;
        }
        episode_means.push(total / scenario.eval.steps as f64);
    }
    Ok(EvalReport { episode_means })
}

/// Writes an `episode,mean_reward` CSV.
pub fn write_eval_csv(report: &EvalReport, path: &Path, rate_scale: f64) -> Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["episode", "mean_reward"])?;
    for (e, m) in report.episode_means.iter().enumerate() {
        out.write_record([e.to_string(), (m * rate_scale).to_string()])?;
    }
    out.flush()?;
    Ok(())
}
