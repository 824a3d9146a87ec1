use ris_antijam::allocator::*;
use ris_antijam::env::*;
use ris_antijam::error::Error;
use ris_antijam::jamming::jam_weights;
use ris_antijam::linkmodel::*;
use ris_antijam::propagation::*;
use ris_antijam::units::dbm_to_watts;

fn config(users: usize, subchannels: usize, cols: usize) -> EnvConfig {
    EnvConfig {
        geometry: GeometryConfig { ris_rows: 2, ris_cols: cols, ..GeometryConfig::default() },
        propagation: PropagationConfig { subchannels, ..PropagationConfig::default() },
        modulation: ModulationTable::default(),
        qos: QosProfile::default(),
        allocator: AllocatorConfig::default(),
        num_users: users,
        p_max: dbm_to_watts(30.0),
        jam_mean_power: dbm_to_watts(10.0),
        jam_alpha: 2.0,
        jam_beta: 2.0,
        jam_equal_power: false,
        normalize_state: true,
    }
}

fn phases(n: usize, t: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 7 + t * 3) % 13) as f64 * 0.45).collect()
}

/// Rebuilds the link tables the environment sees, straight from the
/// propagation, jamming and link-model functions on fresh streams: the
/// reset block under zero phases, then one block per action.
fn replay_tables(cfg: &EnvConfig, seed: u64, actions: &[Vec<f64>]) -> Vec<EffectiveLinkTable> {
    let mut s = EnvStreams::new(seed);
    let dist = loop {
        let users = sample_user_positions(&cfg.geometry, cfg.num_users, &mut s.positions);
        if let Ok(d) = compute_geometry(&cfg.geometry, &users) {
            break d;
        }
    };
    let n = cfg.num_elements();
    std::iter::once(vec![0.0; n])
        .chain(actions.iter().cloned())
        .map(|theta| {
            let ch = sample_channels_split(&cfg.propagation, &dist, &mut s.direct, &mut s.surface);
            let jam = jam_weights(cfg.jam_alpha, cfg.jam_beta, cfg.jam_equal_power, cfg.propagation.subchannels, cfg.jam_mean_power, &mut s.jamming)
                .unwrap();
            effective_gains(&ch, &RisConfig::new(theta).unwrap(), jam, cfg.propagation.noise_power()).unwrap()
        })
        .collect()
}

#[test]
fn identical_seed_and_actions_reproduce_every_step() {
    let cfg = config(3, 8, 4);
    let run = || {
        let mut env = Env::new(cfg.clone(), 17).unwrap();
        let first = env.reset().unwrap();
        let steps: Vec<StepOutcome> = (0..10).map(|t| env.step(&phases(8, t)).unwrap()).collect();
        (first, steps)
    };
    assert_eq!(run(), run());
}

#[test]
fn zero_budget_gives_a_zero_state() {
    let cfg = EnvConfig { p_max: 0.0, ..config(3, 8, 4) };
    let mut env = Env::new(cfg, 1).unwrap();
    assert_eq!(env.reset().unwrap(), vec![0.0; 3]);
    let o = env.step(&phases(8, 0)).unwrap();
    assert_eq!(o.next_state, vec![0.0; 3]);
    assert_eq!(o.reward, 0.0);
}

#[test]
fn without_a_surface_the_action_is_irrelevant() {
    let cfg = config(3, 8, 0);
    let mut a = Env::new(cfg.clone(), 5).unwrap();
    let mut b = Env::new(cfg, 5).unwrap();
    a.reset().unwrap();
    b.reset().unwrap();
    for t in 0..8 {
        let x = a.step(&[]).unwrap();
        let y = b.step(&phases(5, t)).unwrap();
        assert_eq!(x.reward, y.reward);
        assert_eq!(x.next_state, y.next_state);
    }
}

#[test]
fn state_matches_an_independent_pipeline() {
    let cfg = config(3, 8, 4);
    let actions: Vec<Vec<f64>> = (0..6).map(|t| phases(8, t)).collect();
    let tables = replay_tables(&cfg, 23, &actions);

    let mut env = Env::new(cfg.clone(), 23).unwrap();
    let mut states = vec![env.reset().unwrap()];
    states.extend(actions.iter().map(|a| env.step(a).unwrap().next_state));

    let mut warm: Option<DualState> = None;
    let ceiling = 8.0 * 6.0;
    for (table, state) in tables.iter().zip(&states) {
        let out = solve_allocation(table, &cfg.modulation, &cfg.qos, cfg.p_max, &cfg.allocator, warm.as_ref()).unwrap();
        let expect: Vec<f64> = out.summary.rate.iter().map(|r| r / ceiling).collect();
        assert_eq!(&expect, state);
        warm = Some(out.duals);
    }
}

#[test]
fn reward_is_the_sum_of_user_rates_and_power_stays_in_budget() {
    for normalize in [true, false] {
        let cfg = EnvConfig { normalize_state: normalize, ..config(4, 16, 5) };
        let scale = if normalize { 16.0 * 6.0 } else { 1.0 };
        let mut env = Env::new(cfg.clone(), 8).unwrap();
        env.reset().unwrap();
        for t in 0..30 {
            let o = env.step(&phases(10, t)).unwrap();
            assert_eq!(o.reward, o.rates.iter().sum::<f64>());
            let unscaled: f64 = o.next_state.iter().map(|s| s * scale).sum();
            assert!((unscaled - o.reward).abs() <= 1e-9 * o.reward.max(1.0));
            assert!(o.total_power <= cfg.p_max * (1.0 + 1e-12));
            assert!(o.next_state.iter().all(|&s| s >= 0.0));
        }
    }
}

#[test]
fn small_scenario_reaches_the_exhaustive_optimum() {
    let cfg = config(2, 2, 2);
    let actions: Vec<Vec<f64>> = (0..60).map(|t| phases(4, t)).collect();
    let tables = replay_tables(&cfg, 31, &actions);
    let mut env = Env::new(cfg.clone(), 31).unwrap();
    env.reset().unwrap();
    let mut exact = 0;
    for (a, table) in actions.iter().zip(&tables[1..]) {
        let reward = env.step(a).unwrap().reward;
        let opt = exhaustive_oracle(table, &cfg.modulation, &cfg.qos, cfg.p_max, cfg.allocator.ratio_tolerance).unwrap();
        let best = summarize(&opt, &cfg.modulation, 2, cfg.qos.chi).total_rate;
        assert!(reward <= best + 1e-9);
        assert!(reward >= best - 2.0 - 1e-9, "reward {reward} vs optimum {best}");
        if reward == best {
            exact += 1;
        }
    }
    assert!(exact >= 48, "{exact} of 60 steps exactly optimal");
}

#[test]
fn out_of_range_actions_are_clamped_and_flagged() {
    let mut env = Env::new(config(2, 4, 2), 2).unwrap();
    env.reset().unwrap();
    assert!(env.step(&[7.0, 0.5, 0.5, -0.1]).unwrap().action_clamped);
    assert!(!env.step(&[0.0, 1.0, 2.0, 3.0]).unwrap().action_clamped);
}

#[test]
fn misuse_is_reported() {
    let mut env = Env::new(config(2, 4, 2), 2).unwrap();
    assert!(matches!(env.step(&[0.0; 4]), Err(Error::Config(_))));
    env.reset().unwrap();
    assert!(matches!(env.step(&[0.0; 3]), Err(Error::Dimension { .. })));
    assert!(Env::new(EnvConfig { num_users: 0, ..config(2, 4, 2) }, 0).is_err());
}
