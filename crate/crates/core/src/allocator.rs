//! Subchannel, user, stream and modulation selection under a BS power budget
//! and a per-user HQ/LQ rate ratio.
//!
//! The solver relaxes both constraints with multipliers (`lambda` for power,
//! `nu_m` for each user's ratio) and alternates two steps:
//!
//! * primal: for fixed multipliers the Lagrangian separates over subchannels,
//!   so each subchannel independently goes to the `(user, mode, class)` triple
//!   with the largest net reward, or stays idle if no triple has a positive one;
//! * dual: projected subgradient steps on the multipliers.
//!
//! Internally the loop runs on a normalized copy of the problem (powers in
//! units of `P_max`, rates in units of the top mode rate) so that one step
//! size works across link budgets; multipliers are converted back on exit.
//! [`exhaustive_oracle`] enumerates every assignment for small instances and
//! is used to check the solver.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkmodel::{min_power, EffectiveLinkTable, ModulationTable, QosProfile, StreamClass};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub user: usize,
    /// Modulation mode index, always >= 1.
    pub mode: usize,
    pub class: StreamClass,
    /// Minimum power for this tuple, W.
    pub power: f64,
}

/// One optional assignment per subchannel.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationDecision {
    pub slots: Vec<Option<Assignment>>,
}

impl AllocationDecision {
    pub fn empty(subchannels: usize) -> Self {
        Self { slots: vec![None; subchannels] }
    }

    pub fn num_assigned(&self) -> usize {
        self.slots.iter().flatten().count()
    }

    pub fn assignments(&self) -> impl Iterator<Item = (usize, &Assignment)> {
        self.slots.iter().enumerate().filter_map(|(k, a)| a.as_ref().map(|a| (k, a)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    /// Power-budget multiplier, W^-1 in rate units. Always >= 0.
    pub lambda: f64,
    /// Rate-ratio multipliers, one per user.
    pub nu: Vec<f64>,
    pub step: f64,
    /// Outer (Lagrangian) iterations used by the last solve.
    pub outer_iterations: usize,
    /// Total dual updates used by the last solve.
    pub inner_iterations: usize,
}

impl DualState {
    pub fn new(num_users: usize, step: f64) -> Self {
        Self { lambda: 0.0, nu: vec![0.0; num_users], step, outer_iterations: 0, inner_iterations: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSummary {
    /// `R_m`, bits/symbol.
    pub rate: Vec<f64>,
    pub rate_hq: Vec<f64>,
    pub rate_lq: Vec<f64>,
    pub total_rate: f64,
    /// W.
    pub total_power: f64,
    /// `R_m^(1) - chi R_m^(2)`.
    pub ratio_residual: Vec<f64>,
}

impl AllocationSummary {
    pub fn max_abs_residual(&self) -> f64 {
        self.ratio_residual.iter().fold(0.0, |acc, r| acc.max(r.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepSchedule {
    #[default]
    Constant,
    /// `step / sqrt(tau + 1)`.
    Diminishing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepairPolicy {
    /// Single-slot moves (drop, downgrade, reassign) that first restore
    /// feasibility and then raise the sum rate, applied to the dual iterates.
    #[default]
    LocalSearch,
    /// Drop assignments in ascending net-reward order until feasible.
    DropLowestReward,
    None,
}

/// Treatment of the HQ/LQ ratio constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioMode {
    /// Free-sign multipliers (the constraint is an equality).
    Dual,
    /// Multipliers projected onto `nu >= 0` after every step.
    #[default]
    DualProjected,
    /// Constraint dropped; `nu` stays at zero.
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllocatorConfig {
    pub max_outer: usize,
    pub max_inner: usize,
    pub step: f64,
    pub schedule: StepSchedule,
    /// Relative change of the Lagrangian that counts as converged.
    pub tolerance: f64,
    pub repair: RepairPolicy,
    pub ratio_mode: RatioMode,
    /// Largest accepted `|R^(1) - chi R^(2)|` per user, bits/symbol.
    pub ratio_tolerance: f64,
}

impl Default for AllocatorConfig {
    fn default() -> Self {
        Self {
            max_outer: 100,
            max_inner: 50,
            step: 0.01,
            schedule: StepSchedule::Constant,
            tolerance: 1e-4,
            repair: RepairPolicy::LocalSearch,
            ratio_mode: RatioMode::DualProjected,
            ratio_tolerance: 2.0,
        }
    }
}

impl AllocatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Config("allocator iteration caps must be >= 1".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("allocator.step must be > 0, got {}", self.step)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("allocator.tolerance must be > 0".into()));
        }
        if self.ratio_tolerance.is_nan() || self.ratio_tolerance < 0.0 {
            return Err(Error::Config("allocator.ratio_tolerance must be >= 0".into()));
        }
        Ok(())
    }

    fn effective_ratio_tolerance(&self) -> f64 {
        match self.ratio_mode {
            RatioMode::Ignore => f64::INFINITY,
            _ => self.ratio_tolerance,
        }
    }
}

/// Net reward from an already-known power.
pub fn net_reward_with_power(lambda: f64, nu: f64, rate: f64, power: f64, class: StreamClass, chi: f64) -> f64 {
    if rate == 0.0 {
        return 0.0;
    }
    if power.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let weight = match class {
        StreamClass::Hq => 1.0 - nu,
        StreamClass::Lq => 1.0 + nu * chi,
    };
    weight * rate - lambda * power
}

/// Rate weighted by the ratio multiplier minus the priced minimum power.
///
/// Mode 0 scores 0; an unservable link (zero gain) scores negative infinity.
#[allow(clippy::too_many_arguments)]
pub fn net_reward(
    lambda: f64,
    nu: f64,
    gain: f64,
    jam_gain: f64,
    jam_power: f64,
    noise: f64,
    mode: usize,
    class: StreamClass,
    qos: &QosProfile,
    mods: &ModulationTable,
) -> f64 {
    let rate = mods.rates[mode];
    if rate == 0.0 {
        return 0.0;
    }
    match min_power(gain, jam_gain, jam_power, noise, rate, qos.ber_target(class), mods) {
        Ok(p) => net_reward_with_power(lambda, nu, rate, p, class, qos.chi),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Minimum powers for every `(subchannel, user, mode, class)`, W; infinite
/// where the link cannot be served.
#[derive(Debug, Clone)]
struct PowerTable {
    users: usize,
    modes: usize,
    power: Vec<f64>,
}

impl PowerTable {
    fn new(table: &EffectiveLinkTable, mods: &ModulationTable, qos: &QosProfile) -> Self {
        let users = table.num_users();
        let modes = mods.active_modes();
        let mut power = Vec::with_capacity(table.num_subchannels() * users * modes * 2);
        for k in 0..table.num_subchannels() {
            for m in 0..users {
                let g = table.gain[m][k];
                let gj = table.jam_gain[m][k];
                for l in 1..=modes {
                    for class in StreamClass::ALL {
                        let p = min_power(g, gj, table.jam_power[k], table.noise_power, mods.rates[l], qos.ber_target(class), mods)
                            .unwrap_or(f64::INFINITY);
                        power.push(p);
                    }
                }
            }
        }
        Self { users, modes, power }
    }

    #[inline]
    fn get(&self, k: usize, m: usize, l: usize, class: StreamClass) -> f64 {
        self.power[((k * self.users + m) * self.modes + (l - 1)) * 2 + class.index()]
    }
}

/// Normalized view of one allocation problem.
struct Scaled<'a> {
    powers: &'a PowerTable,
    subchannels: usize,
    /// Mode rates divided by `rate_unit`, index 0 is mode 1.
    rates: Vec<f64>,
    rate_unit: f64,
    power_unit: f64,
    /// Power budget in `power_unit`s: 1, or infinite when uncapped.
    budget: f64,
    chi: f64,
}

type Choice = Option<(usize, usize, StreamClass)>;

#[derive(Debug, Clone)]
struct ScaledStats {
    rate_hq: Vec<f64>,
    rate_lq: Vec<f64>,
    total_rate: f64,
    power: f64,
}

impl ScaledStats {
    fn residual(&self, m: usize, chi: f64) -> f64 {
        self.rate_hq[m] - chi * self.rate_lq[m]
    }
}

impl<'a> Scaled<'a> {
    fn power(&self, k: usize, m: usize, l: usize, class: StreamClass) -> f64 {
        self.powers.get(k, m, l, class) / self.power_unit
    }

    fn reward(&self, lambda: f64, nu: &[f64], k: usize, m: usize, l: usize, class: StreamClass) -> f64 {
        net_reward_with_power(lambda, nu[m], self.rates[l - 1], self.power(k, m, l, class), class, self.chi)
    }

    /// Per-subchannel argmax; strict `>` keeps the lexicographically first
    /// `(m, l, q)` on ties, and a best value `<= 0` leaves the slot idle.
    fn winner_takes_all(&self, lambda: f64, nu: &[f64], out: &mut [Choice]) {
        for (k, slot) in out.iter_mut().enumerate() {
            let mut best = 0.0;
            let mut choice = None;
            for m in 0..self.powers.users {
                for l in 1..=self.powers.modes {
                    for class in StreamClass::ALL {
                        let w = self.reward(lambda, nu, k, m, l, class);
                        if w > best {
                            best = w;
                            choice = Some((m, l, class));
                        }
                    }
                }
            }
            *slot = choice;
        }
    }

    fn stats(&self, choices: &[Choice]) -> ScaledStats {
        let users = self.powers.users;
        let mut s = ScaledStats { rate_hq: vec![0.0; users], rate_lq: vec![0.0; users], total_rate: 0.0, power: 0.0 };
        for (k, c) in choices.iter().enumerate() {
            if let Some((m, l, class)) = *c {
                let r = self.rates[l - 1];
                match class {
                    StreamClass::Hq => s.rate_hq[m] += r,
                    StreamClass::Lq => s.rate_lq[m] += r,
                }
                s.total_rate += r;
                s.power += self.power(k, m, l, class);
            }
        }
        s
    }

    /// Dual function value: `lambda * 1 + sum_k max(0, max w)`.
    fn dual_value(&self, lambda: f64, nu: &[f64], choices: &[Choice]) -> f64 {
        let mut value = if lambda > 0.0 { lambda * self.budget } else { 0.0 };
        for (k, c) in choices.iter().enumerate() {
            if let Some((m, l, class)) = *c {
                value += self.reward(lambda, nu, k, m, l, class);
            }
        }
        value
    }

    fn feasible(&self, s: &ScaledStats, ratio_tol: f64) -> bool {
        s.power <= self.budget + 1e-12
            && (0..self.powers.users).all(|m| (s.residual(m, self.chi) * self.rate_unit).abs() <= ratio_tol + 1e-9)
    }

    /// Drops the lowest-reward assignments until the power budget and then
    /// every user's ratio tolerance hold.
    fn repair(&self, lambda: f64, nu: &[f64], choices: &mut [Choice], ratio_tol: f64) {
        let lowest = |choices: &[Choice], filter: &dyn Fn(usize, StreamClass) -> bool| -> Option<usize> {
            choices
                .iter()
                .enumerate()
                .filter_map(|(k, c)| c.map(|(m, l, q)| (k, m, l, q)))
                .filter(|&(_, m, _, q)| filter(m, q))
                .map(|(k, m, l, q)| (k, self.reward(lambda, nu, k, m, l, q)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(k, _)| k)
        };
        while self.stats(choices).power > self.budget + 1e-12 {
            match lowest(choices, &|_, _| true) {
                Some(k) => choices[k] = None,
                None => break,
            }
        }
        if ratio_tol.is_infinite() {
            return;
        }
        for m in 0..self.powers.users {
            loop {
                let residual = self.stats(choices).residual(m, self.chi) * self.rate_unit;
                if residual.abs() <= ratio_tol + 1e-9 {
                    break;
                }
                let over = if residual > 0.0 { StreamClass::Hq } else { StreamClass::Lq };
                match lowest(choices, &|mm, q| mm == m && q == over) {
                    Some(k) => choices[k] = None,
                    None => break,
                }
            }
        }
    }

    fn ratio_excess(&self, hq: f64, lq: f64, tol: f64) -> f64 {
        if tol.is_infinite() {
            0.0
        } else {
            ((hq - self.chi * lq).abs() - (tol + 1e-9) / self.rate_unit).max(0.0)
        }
    }

    /// Greedy single-slot local search.
    ///
    /// While the decision is infeasible, applies the move that most reduces
    /// the power overshoot, then the summed ratio overshoot. Once feasible,
    /// applies the feasible move with the largest sum-rate gain (lower power
    /// on equal rate) until none is left. May stop infeasible when no single
    /// move helps.
    fn local_search(&self, choices: &mut [Choice], tol: f64) {
        // (power excess, ratio excess, -rate, power), compared lexicographically.
        type Key = [f64; 4];
        fn less(a: &Key, b: &Key) -> bool {
            for (x, y) in a.iter().zip(b) {
                if x < &(y - 1e-12) {
                    return true;
                }
                if x > &(y + 1e-12) {
                    return false;
                }
            }
            false
        }
        let users = self.powers.users;
        let modes = self.powers.modes;
        let s = self.stats(choices);
        let (mut hq, mut lq) = (s.rate_hq, s.rate_lq);
        let (mut rate, mut power) = (s.total_rate, s.power);
        let power_excess = |p: f64| (p - self.budget - 1e-12).max(0.0);
        let slot = |k: usize, c: Choice| match c {
            Some((m, l, q)) => (self.rates[l - 1], self.power(k, m, l, q)),
            None => (0.0, 0.0),
        };
        // Adds `sign * rate` of choice `c` to user `m`'s per-class rates.
        let shift = |m: usize, h: &mut f64, lo: &mut f64, c: Choice, sign: f64| {
            if let Some((mm, l, q)) = c {
                if mm == m {
                    match q {
                        StreamClass::Hq => *h += sign * self.rates[l - 1],
                        StreamClass::Lq => *lo += sign * self.rates[l - 1],
                    }
                }
            }
        };
        let mut options: Vec<Choice> = vec![None];
        for m in 0..users {
            for l in 1..=modes {
                options.extend(StreamClass::ALL.into_iter().map(|q| Some((m, l, q))));
            }
        }
        let cap = 4 * choices.len() * options.len() + 16;

        for _ in 0..cap {
            let excess: Vec<f64> = (0..users).map(|m| self.ratio_excess(hq[m], lq[m], tol)).collect();
            let total_excess: f64 = excess.iter().sum();
            let current: Key = [power_excess(power), total_excess, -rate, power];
            let feasible_now = current[0] == 0.0 && current[1] <= 1e-12;
            let mut best: Option<(usize, Choice, Key)> = None;
            for k in 0..choices.len() {
                let (r_old, p_old) = slot(k, choices[k]);
                for &option in &options {
                    if option == choices[k] {
                        continue;
                    }
                    let (r_new, p_new) = slot(k, option);
                    if p_new.is_infinite() {
                        continue;
                    }
                    let mut cand_excess = total_excess;
                    let touched = [choices[k].map(|c| c.0), option.map(|c| c.0)];
                    for (i, m) in touched.iter().enumerate() {
                        let Some(m) = *m else { continue };
                        if i == 1 && touched[0] == Some(m) {
                            continue;
                        }
                        let (mut h, mut lo) = (hq[m], lq[m]);
                        shift(m, &mut h, &mut lo, choices[k], -1.0);
                        shift(m, &mut h, &mut lo, option, 1.0);
                        cand_excess += self.ratio_excess(h, lo, tol) - excess[m];
                    }
                    let cand_power = power - p_old + p_new;
                    let key: Key = [power_excess(cand_power), cand_excess.max(0.0), -(rate - r_old + r_new), cand_power];
                    if feasible_now && (key[0] > 0.0 || key[1] > 1e-12) {
                        continue;
                    }
                    if !less(&key, &current) {
                        continue;
                    }
                    if best.as_ref().is_none_or(|b| less(&key, &b.2)) {
                        best = Some((k, option, key));
                    }
                }
            }
            let Some((k, option, _)) = best else { break };
            let (r_old, p_old) = slot(k, choices[k]);
            let (r_new, p_new) = slot(k, option);
            let mut touched: Vec<usize> = [choices[k], option].iter().flatten().map(|c| c.0).collect();
            touched.dedup();
            for m in touched {
                shift(m, &mut hq[m], &mut lq[m], choices[k], -1.0);
                shift(m, &mut hq[m], &mut lq[m], option, 1.0);
            }
            choices[k] = option;
            rate += r_new - r_old;
            power += p_new - p_old;
        }
    }

    fn materialize(&self, choices: &[Choice]) -> AllocationDecision {
        let slots = choices
            .iter()
            .enumerate()
            .map(|(k, c)| {
                c.map(|(user, mode, class)| Assignment { user, mode, class, power: self.powers.get(k, user, mode, class) })
            })
            .collect();
        AllocationDecision { slots }
    }
}

/// Greedy per-subchannel selection for the given multipliers.
pub fn winner_takes_all(
    duals: &DualState,
    table: &EffectiveLinkTable,
    mods: &ModulationTable,
    qos: &QosProfile,
) -> AllocationDecision {
    let powers = PowerTable::new(table, mods, qos);
    let scaled = Scaled {
        powers: &powers,
        subchannels: table.num_subchannels(),
        rates: mods.rates[1..].to_vec(),
        rate_unit: 1.0,
        power_unit: 1.0,
        budget: f64::INFINITY,
        chi: qos.chi,
    };
    let mut choices = vec![None; scaled.subchannels];
    scaled.winner_takes_all(duals.lambda, &duals.nu, &mut choices);
    scaled.materialize(&choices)
}

/// One projected subgradient step:
/// `lambda <- [lambda + step (P - P_max)]+`,
/// `nu_m <- [nu_m + step (R1_m - chi R2_m)]+`.
pub fn dual_update(duals: &DualState, summary: &AllocationSummary, p_max: f64, chi: f64) -> DualState {
    dual_update_with(duals, summary, p_max, chi, duals.step, true)
}

fn dual_update_with(
    duals: &DualState,
    summary: &AllocationSummary,
    p_max: f64,
    chi: f64,
    step: f64,
    project_nu: bool,
) -> DualState {
    let lambda = (duals.lambda + step * (summary.total_power - p_max)).max(0.0);
    let nu = duals
        .nu
        .iter()
        .zip(summary.rate_hq.iter().zip(&summary.rate_lq))
        .map(|(&nu, (&r1, &r2))| {
            let next = nu + step * (r1 - chi * r2);
            if project_nu {
                next.max(0.0)
            } else {
                next
            }
        })
        .collect();
    DualState { lambda, nu, ..duals.clone() }
}

/// Per-user and per-class rate sums and total power of a decision.
pub fn summarize(decision: &AllocationDecision, mods: &ModulationTable, num_users: usize, chi: f64) -> AllocationSummary {
    let mut s = AllocationSummary {
        rate: vec![0.0; num_users],
        rate_hq: vec![0.0; num_users],
        rate_lq: vec![0.0; num_users],
        total_rate: 0.0,
        total_power: 0.0,
        ratio_residual: vec![0.0; num_users],
    };
    for (_, a) in decision.assignments() {
        let r = mods.rates[a.mode];
        s.rate[a.user] += r;
        match a.class {
            StreamClass::Hq => s.rate_hq[a.user] += r,
            StreamClass::Lq => s.rate_lq[a.user] += r,
        }
        s.total_power += a.power;
    }
    s.total_rate = s.rate.iter().sum();
    for m in 0..num_users {
        s.ratio_residual[m] = s.rate_hq[m] - chi * s.rate_lq[m];
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationOutcome {
    pub decision: AllocationDecision,
    pub summary: AllocationSummary,
    pub duals: DualState,
    /// The Lagrangian settled before the iteration caps.
    pub converged: bool,
    /// The returned decision came out of the repair step rather than being a
    /// feasible iterate.
    pub repaired: bool,
}

/// Primal-dual subgradient solve.
///
/// `warm` seeds the multipliers (they must be non-negative); otherwise they
/// start at zero. The returned decision is the best feasible iterate seen;
/// when none was feasible, the last iterate is repaired according to
/// `cfg.repair`.
pub fn solve_allocation(
    table: &EffectiveLinkTable,
    mods: &ModulationTable,
    qos: &QosProfile,
    p_max: f64,
    cfg: &AllocatorConfig,
    warm: Option<&DualState>,
) -> Result<AllocationOutcome> {
    table.validate()?;
    let users = table.num_users();
    let k_count = table.num_subchannels();
    let mut duals = match warm {
        Some(d) if d.nu.len() == users => {
            if d.lambda < 0.0 || (cfg.ratio_mode == RatioMode::DualProjected && d.nu.iter().any(|&v| v < 0.0)) {
                return Err(Error::Config("initial multipliers must be non-negative".into()));
            }
            DualState { step: cfg.step, ..d.clone() }
        }
        Some(d) => return Err(Error::Dimension { context: "warm-start multipliers", expected: users, actual: d.nu.len() }),
        None => DualState::new(users, cfg.step),
    };
    if cfg.ratio_mode == RatioMode::Ignore {
        duals.nu.iter_mut().for_each(|v| *v = 0.0);
    }

    if p_max <= 0.0 || k_count == 0 || users == 0 {
        let decision = AllocationDecision::empty(k_count);
        let summary = summarize(&decision, mods, users, qos.chi);
        duals.outer_iterations = 0;
        duals.inner_iterations = 0;
        return Ok(AllocationOutcome { decision, summary, duals, converged: true, repaired: false });
    }

    let powers = PowerTable::new(table, mods, qos);
    let rate_unit = mods.max_rate();
    let power_unit = if p_max.is_finite() { p_max } else { 1.0 };
    let scaled = Scaled {
        powers: &powers,
        subchannels: k_count,
        rates: mods.rates[1..].iter().map(|r| r / rate_unit).collect(),
        rate_unit,
        power_unit,
        budget: p_max / power_unit,
        chi: qos.chi,
    };
    let budget = scaled.budget;
    let ratio_tol = cfg.effective_ratio_tolerance();

    // lambda in normalized units: bits per P_max, in multiples of r_L.
    let mut lambda = duals.lambda * power_unit / rate_unit;
    let mut nu = duals.nu.clone();
    let mut choices: Vec<Choice> = vec![None; k_count];
    let outranks = |s: &ScaledStats, best: &Option<(Vec<Choice>, f64, f64)>| match best {
        None => true,
        Some((_, r, p)) => s.total_rate > r + 1e-12 || ((s.total_rate - r).abs() <= 1e-12 && s.power < *p),
    };
    // Best feasible raw iterate, and best decision obtained by local search.
    let mut best: Option<(Vec<Choice>, f64, f64)> = None;
    let mut best_searched: Option<(Vec<Choice>, f64, f64)> = None;
    let local_search = cfg.repair == RepairPolicy::LocalSearch;
    let mut searched: HashSet<Vec<Choice>> = HashSet::new();
    let mut prev_dual: Option<f64> = None;
    let mut converged = false;
    let mut tau = 0usize;
    let mut outer_used = 0;

    for _outer in 0..cfg.max_outer {
        outer_used += 1;
        let mut prev_power: Option<f64> = None;
        for _inner in 0..cfg.max_inner {
            scaled.winner_takes_all(lambda, &nu, &mut choices);
            let stats = scaled.stats(&choices);
            if scaled.feasible(&stats, ratio_tol) && outranks(&stats, &best) {
                best = Some((choices.clone(), stats.total_rate, stats.power));
            }

            let step = match cfg.schedule {
                StepSchedule::Constant => cfg.step,
                StepSchedule::Diminishing => cfg.step / ((tau + 1) as f64).sqrt(),
            };
            tau += 1;
            if p_max.is_finite() {
                lambda = (lambda + step * (stats.power - budget)).max(0.0);
            }
            if cfg.ratio_mode != RatioMode::Ignore {
                for (m, v) in nu.iter_mut().enumerate() {
                    *v += step * stats.residual(m, qos.chi);
                    if cfg.ratio_mode == RatioMode::DualProjected {
                        *v = v.max(0.0);
                    }
                }
            }
            if prev_power == Some(stats.power) {
                break;
            }
            prev_power = Some(stats.power);
        }

        scaled.winner_takes_all(lambda, &nu, &mut choices);
        let value = scaled.dual_value(lambda, &nu, &choices);
        let stats = scaled.stats(&choices);
        if local_search && searched.insert(choices.clone()) {
            let mut c = choices.clone();
            scaled.local_search(&mut c, ratio_tol);
            let s = scaled.stats(&c);
            if scaled.feasible(&s, ratio_tol) && outranks(&s, &best_searched) {
                best_searched = Some((c, s.total_rate, s.power));
            }
        }
        if let Some(prev) = prev_dual {
            let settled = (value - prev).abs() <= cfg.tolerance * value.abs().max(f64::MIN_POSITIVE);
            if settled && scaled.feasible(&stats, ratio_tol) {
                converged = true;
                break;
            }
        }
        prev_dual = Some(value);
    }

    let (final_choices, repaired) = match cfg.repair {
        RepairPolicy::LocalSearch => {
            let mut c = best.map(|b| b.0).unwrap_or_else(|| choices.clone());
            let before = c.clone();
            scaled.local_search(&mut c, ratio_tol);
            let s = scaled.stats(&c);
            let candidate = scaled.feasible(&s, ratio_tol).then(|| (c.clone(), s.total_rate, s.power));
            match (candidate, best_searched) {
                (Some(_), Some(other)) if !outranks(&s, &Some(other.clone())) => (other.0, true),
                (Some(own), _) => {
                    let changed = own.0 != before;
                    (own.0, changed)
                }
                (None, Some(other)) => (other.0, true),
                (None, None) => {
                    // No single-slot move reached feasibility; fall back to
                    // dropping assignments.
                    scaled.repair(lambda, &nu, &mut c, ratio_tol);
                    (c, true)
                }
            }
        }
        RepairPolicy::DropLowestReward | RepairPolicy::None => match best {
            Some((c, _, _)) => (c, false),
            None => {
                let mut c = choices.clone();
                if cfg.repair == RepairPolicy::DropLowestReward {
                    scaled.repair(lambda, &nu, &mut c, ratio_tol);
                }
                (c, true)
            }
        },
    };

    let decision = scaled.materialize(&final_choices);
    let summary = summarize(&decision, mods, users, qos.chi);
    duals.lambda = lambda * rate_unit / power_unit;
    duals.nu = nu;
    duals.outer_iterations = outer_used;
    duals.inner_iterations = tau;
    Ok(AllocationOutcome { decision, summary, duals, converged, repaired })
}

/// Upper bound on the number of leaves the exhaustive search visits.
pub const ORACLE_LIMIT: f64 = 1e7;

/// Exact optimum by enumerating every per-subchannel assignment.
///
/// Keeps decisions with total power `<= p_max` and every user's
/// `|R1 - chi R2| <= ratio_tolerance`, maximizes the sum rate, prefers lower
/// power on equal rate, and otherwise keeps the first decision in
/// lexicographic order (subchannel 0 most significant; idle before any
/// assignment; then user, mode, class ascending).
pub fn exhaustive_oracle(
    table: &EffectiveLinkTable,
    mods: &ModulationTable,
    qos: &QosProfile,
    p_max: f64,
    ratio_tolerance: f64,
) -> Result<AllocationDecision> {
    table.validate()?;
    let users = table.num_users();
    let k_count = table.num_subchannels();
    let options = users * mods.active_modes() * 2 + 1;
    let size = (options as f64).powi(k_count as i32);
    if size > ORACLE_LIMIT {
        return Err(Error::SearchTooLarge(size, ORACLE_LIMIT));
    }
    let powers = PowerTable::new(table, mods, qos);

    // Per-subchannel candidates in lexicographic order.
    let candidates: Vec<Vec<(usize, usize, StreamClass, f64)>> = (0..k_count)
        .map(|k| {
            let mut v = Vec::new();
            for m in 0..users {
                for l in 1..=mods.active_modes() {
                    for class in StreamClass::ALL {
                        let p = powers.get(k, m, l, class);
                        if p.is_finite() && p <= p_max {
                            v.push((m, l, class, p));
                        }
                    }
                }
            }
            v
        })
        .collect();

    struct Search<'a> {
        candidates: &'a [Vec<(usize, usize, StreamClass, f64)>],
        mods: &'a ModulationTable,
        chi: f64,
        p_max: f64,
        tol: f64,
        current: Vec<Choice>,
        rate_hq: Vec<f64>,
        rate_lq: Vec<f64>,
        best: Option<(Vec<Choice>, f64, f64)>,
    }

    impl Search<'_> {
        fn visit(&mut self, k: usize, rate: f64, power: f64) {
            if k == self.candidates.len() {
                let ok = self
                    .rate_hq
                    .iter()
                    .zip(&self.rate_lq)
                    .all(|(r1, r2)| (r1 - self.chi * r2).abs() <= self.tol + 1e-9);
                if !ok {
                    return;
                }
                let better = match &self.best {
                    None => true,
                    Some((_, r, p)) => rate > r + 1e-12 || ((rate - r).abs() <= 1e-12 && power < p - 1e-15),
                };
                if better {
                    self.best = Some((self.current.clone(), rate, power));
                }
                return;
            }
            self.current[k] = None;
            self.visit(k + 1, rate, power);
            for i in 0..self.candidates[k].len() {
                let (m, l, class, p) = self.candidates[k][i];
                if power + p > self.p_max {
                    continue;
                }
                let r = self.mods.rates[l];
                let bucket = match class {
                    StreamClass::Hq => &mut self.rate_hq,
                    StreamClass::Lq => &mut self.rate_lq,
                };
                bucket[m] += r;
                self.current[k] = Some((m, l, class));
                self.visit(k + 1, rate + r, power + p);
                let bucket = match class {
                    StreamClass::Hq => &mut self.rate_hq,
                    StreamClass::Lq => &mut self.rate_lq,
                };
                bucket[m] -= r;
            }
            self.current[k] = None;
        }
    }

    let mut search = Search {
        candidates: &candidates,
        mods,
        chi: qos.chi,
        p_max,
        tol: ratio_tolerance,
        current: vec![None; k_count],
        rate_hq: vec![0.0; users],
        rate_lq: vec![0.0; users],
        best: None,
    };
    search.visit(0, 0.0, 0.0);
    let best = search.best.map(|(c, _, _)| c).unwrap_or_else(|| vec![None; k_count]);
    let slots = best
        .iter()
        .enumerate()
        .map(|(k, c)| c.map(|(user, mode, class)| Assignment { user, mode, class, power: powers.get(k, user, mode, class) }))
        .collect();
    Ok(AllocationDecision { slots })
}
