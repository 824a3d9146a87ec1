//! Allocator self-check against exhaustive search on small random
//! instances.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, SeedPurpose};
use crate::allocator::{exhaustive_oracle, solve_allocation, summarize, AllocatorConfig};
use crate::error::{Error, Result};
use crate::linkmodel::{EffectiveLinkTable, ModulationTable, QosProfile};

/// A random allocation problem in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleInstance {
    pub table: EffectiveLinkTable,
    pub p_max: f64,
}

/// `1..=kmax` subchannels and `1..=max_users` users. Noise power is 0.1,
/// jamming powers and jammer gains are uniform on `[0, 1)`, link gains are
/// unit exponentials times a log-uniform factor in `[0.1, 10)`, and the
/// budget is log-uniform in `[1, 10^3.5)` so that both binding and slack
/// budgets occur.
pub fn random_instance<R: Rng>(rng: &mut R, kmax: usize, max_users: usize) -> OracleInstance {
    let k = rng.random_range(1..=kmax);
    let m = rng.random_range(1..=max_users);
    let gain = (0..m)
        .map(|_| {
            (0..k)
                .map(|_| -(1.0 - rng.random::<f64>()).ln() * 10f64.powf(rng.random_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let jam_gain = (0..m).map(|_| (0..k).map(|_| rng.random::<f64>()).collect()).collect();
    let jam_power = (0..k).map(|_| rng.random::<f64>()).collect();
    let table = EffectiveLinkTable { gain, jam_gain, noise_power: 0.1, jam_power };
    OracleInstance { table, p_max: 10f64.powf(rng.random_range(0.0..3.5)) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub instances: usize,
    /// Same sum rate as the exhaustive optimum.
    pub exact: usize,
    /// Within `quantum` bits/symbol of the optimum.
    pub within_quantum: usize,
    pub quantum: f64,
    /// Allocator results that broke a constraint or beat the optimum.
    pub violations: usize,
    pub worst_gap: f64,
    pub elapsed: Duration,
}

impl OracleReport {
    pub fn exact_fraction(&self) -> f64 {
        self.exact as f64 / self.instances.max(1) as f64
    }

    pub fn within_fraction(&self) -> f64 {
        self.within_quantum as f64 / self.instances.max(1) as f64
    }

    /// At least 80% exact, at least 95% within one quantum, and no
    /// violations.
    pub fn passes(&self) -> bool {
        self.violations == 0 && self.exact_fraction() >= 0.8 && self.within_fraction() >= 0.95
    }
}

/// Solves `instances` random problems with the allocator and with
/// exhaustive search under default modulation and QoS settings.
pub fn oracle_check(instances: usize, kmax: usize, seed: u64, cfg: &AllocatorConfig) -> Result<OracleReport> {
    if kmax == 0 {
        return Err(Error::Config("kmax must be >= 1".into()));
    }
    cfg.validate()?;
    let mods = ModulationTable::default();
    let qos = QosProfile::default();
    let quantum = mods.rates.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SeedPurpose::Oracle, 0));
    let started = Instant::now();
    let mut report =
        OracleReport { instances, exact: 0, within_quantum: 0, quantum, violations: 0, worst_gap: 0.0, elapsed: Duration::ZERO };
    for _ in 0..instances {
        let inst = random_instance(&mut rng, kmax, 3);
        let users = inst.table.num_users();
        let out = solve_allocation(&inst.table, &mods, &qos, inst.p_max, cfg, None)?;
        let best = exhaustive_oracle(&inst.table, &mods, &qos, inst.p_max, cfg.ratio_tolerance)?;
        let optimum = summarize(&best, &mods, users, qos.chi).total_rate;
        let got = out.summary.total_rate;
        let gap = optimum - got;
        if gap.abs() <= 1e-9 {
            report.exact += 1;
        }
        if gap <= quantum + 1e-9 {
            report.within_quantum += 1;
        }
        let infeasible = out.summary.total_power > inst.p_max * (1.0 + 1e-12)
            || out.summary.max_abs_residual() > cfg.ratio_tolerance + 1e-9;
        if infeasible || gap < -1e-9 {
            report.violations += 1;
        }
        report.worst_gap = report.worst_gap.max(gap);
    }
    report.elapsed = started.elapsed();
    Ok(report)
}
