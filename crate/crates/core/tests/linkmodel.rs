use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_antijam::linkmodel::*;
use ris_antijam::propagation::*;

fn random_channel(rng: &mut ChaCha8Rng, m: usize, k: usize, n: usize) -> ChannelRealization {
    let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    ChannelRealization {
        h_d: (0..m).map(|_| (0..k).map(|_| c()).collect()).collect(),
        h_br: (0..n).map(|_| c()).collect(),
        h_ru: (0..n).map(|_| (0..m).map(|_| c()).collect()).collect(),
        h_jd: (0..m).map(|_| (0..k).map(|_| c()).collect()).collect(),
        h_jr: (0..n).map(|_| c()).collect(),
    }
}

#[test]
fn effective_gain_matches_per_entry_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let ch = random_channel(&mut rng, 3, 4, 6);
        let theta: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let ris = RisConfig::new(theta.clone()).unwrap();
        let t = effective_gains(&ch, &ris, vec![1.0; 4], 0.1).unwrap();
        for m in 0..3 {
            for k in 0..4 {
                let mut h = ch.h_d[m][k];
                let mut hj = ch.h_jd[m][k];
                for n in 0..6 {
                    let rot = Complex64::from_polar(1.0, -theta[n]);
                    h += ch.h_br[n].conj() * rot * ch.h_ru[n][m];
                    hj += ch.h_jr[n].conj() * rot * ch.h_ru[n][m];
                }
                assert!((t.gain[m][k] - h.norm_sqr()).abs() < 1e-12);
                assert!((t.jam_gain[m][k] - hj.norm_sqr()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn phase_count_mismatch_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ch = random_channel(&mut rng, 1, 2, 4);
    assert!(effective_gains(&ch, &RisConfig::zeros(3), vec![1.0; 2], 0.1).is_err());
    assert!(effective_gains(&ch, &RisConfig::zeros(4), vec![1.0; 3], 0.1).is_err());
}

/// Bisection on the BER curve, independent of the closed form.
fn bisect_power(g: f64, gj: f64, pj: f64, noise: f64, rate: f64, target: f64, mods: &ModulationTable) -> f64 {
    let mut hi = 1.0;
    while ber(sinr(hi, g, gj, pj, noise), rate, mods).unwrap() > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ber(sinr(mid, g, gj, pj, noise), rate, mods).unwrap() > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[test]
fn closed_form_power_matches_bisection() {
    let mods = ModulationTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let g = 10f64.powf(rng.random_range(-3.0..1.0));
        let gj = rng.random_range(0.0..2.0);
        let pj = rng.random_range(0.0..5.0);
        let rate = [2.0, 4.0, 6.0][rng.random_range(0..3)];
        let target = [1e-6, 1e-2][rng.random_range(0..2)];
        let closed = min_power(g, gj, pj, 0.1, rate, target, &mods).unwrap();
        let numeric = bisect_power(g, gj, pj, 0.1, rate, target, &mods);
        assert!((closed - numeric).abs() <= 1e-9 * closed, "{closed} vs {numeric}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]
    #[test]
    fn minimum_power_hits_the_target_exactly(
        g in 1e-6f64..10.0,
        gj in 0.0f64..10.0,
        pj in 0.0f64..10.0,
        noise in 1e-9f64..1.0,
        mode in 1usize..4,
        target in 1e-8f64..0.1,
    ) {
        let mods = ModulationTable::default();
        let rate = mods.rates[mode];
        let p = min_power(g, gj, pj, noise, rate, target, &mods).unwrap();
        let back = ber(sinr(p, g, gj, pj, noise), rate, &mods).unwrap();
        prop_assert!(((back - target) / target).abs() < 1e-10);
    }

    #[test]
    fn ber_falls_with_sinr(a in 0.0f64..50.0, b in 0.0f64..50.0, mode in 1usize..4) {
        let mods = ModulationTable::default();
        let r = mods.rates[mode];
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(ber(hi, r, &mods).unwrap() <= ber(lo, r, &mods).unwrap());
    }
}
