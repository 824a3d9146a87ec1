use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_antijam::propagation::*;

fn norm(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Element positions built directly from the surface layout (indices from 1).
fn element_positions(g: &GeometryConfig) -> Vec<[f64; 3]> {
    let delta = g.carrier_wavelength / 2.0;
    let mut out = Vec::new();
    for i in 1..=g.ris_cols {
        for k in 1..=g.ris_rows {
            out.push([0.0, g.ris_y_offset + i as f64 * delta, g.ris_height + k as f64 * delta]);
        }
    }
    out
}

#[test]
fn distances_match_vector_norms() {
    let g = GeometryConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let users = sample_user_positions(&g, 4, &mut rng);
    let t = compute_geometry(&g, &users).unwrap();
    let bs = [g.bs_offset, 0.0, g.bs_height];
    let jam = [g.jammer_pos[0], g.jammer_pos[1], 0.0];
    let elements = element_positions(&g);
    assert_eq!(t.num_elements(), 40);
    for (n, e) in elements.iter().enumerate() {
        assert!((t.d_bs_ris[n] - norm(bs, *e)).abs() < 1e-12);
        assert!((t.d_jam_ris[n] - norm(jam, *e)).abs() < 1e-12);
        for (m, u) in users.iter().enumerate() {
            assert!((t.d_ris_ue[n][m] - norm(*e, *u)).abs() < 1e-12);
            assert!((0.0..=std::f64::consts::PI).contains(&t.aod_ris_ue[n][m]));
        }
    }
    for (m, u) in users.iter().enumerate() {
        assert!((t.d_bs_ue[m] - norm(bs, *u)).abs() < 1e-12);
        assert!((t.d_jam_ue[m] - norm(jam, *u)).abs() < 1e-12);
    }
    assert!((t.los_phase_scale - std::f64::consts::PI).abs() < 1e-15);
}

fn check_power(samples: &[Complex64], expected: f64, label: &str) {
    let n = samples.len() as f64;
    let p: Vec<f64> = samples.iter().map(|c| c.norm_sqr()).collect();
    let mean = p.iter().sum::<f64>() / n;
    let var = p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!((mean - expected).abs() < 3.0 * se, "{label}: mean {mean} expected {expected} se {se}");
}

#[test]
fn every_link_family_has_the_path_loss_second_moment() {
    let g = GeometryConfig { ris_rows: 1, ris_cols: 1, ..Default::default() };
    let prop = PropagationConfig { subchannels: 1, ..Default::default() };
    let user = [120.0, 80.0, 0.0];
    let t = compute_geometry(&g, &[user]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let draws = 40_000;
    let mut fam: [Vec<Complex64>; 5] = Default::default();
    for _ in 0..draws {
        let ch = sample_channels(&prop, &t, &mut rng);
        fam[0].push(ch.h_d[0][0]);
        fam[1].push(ch.h_jd[0][0]);
        fam[2].push(ch.h_br[0]);
        fam[3].push(ch.h_jr[0]);
        fam[4].push(ch.h_ru[0][0]);
    }
    let eps = prop.ref_pathloss;
    let expected = [
        eps * t.d_bs_ue[0].powf(-prop.exp_direct),
        eps * t.d_jam_ue[0].powf(-prop.exp_jam_direct),
        eps * t.d_bs_ris[0].powf(-prop.exp_bs_ris),
        eps * t.d_jam_ris[0].powf(-prop.exp_jam_ris),
        eps * t.d_ris_ue[0][0].powf(-prop.exp_ris_ue),
    ];
    for (i, label) in ["bs-ue", "jam-ue", "bs-ris", "jam-ris", "ris-ue"].iter().enumerate() {
        check_power(&fam[i], expected[i], label);
    }
}

#[test]
fn rician_mean_is_the_scaled_line_of_sight_term() {
    let g = GeometryConfig { ris_rows: 1, ris_cols: 1, ..Default::default() };
    let prop = PropagationConfig { subchannels: 1, rician_bs_ris: 3.0, ..Default::default() };
    let t = compute_geometry(&g, &[[100.0, 100.0, 0.0]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let draws = 20_000;
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..draws {
        let (h_br, _, _) = sample_surface_links(&prop, &t, &mut rng);
        sum += h_br[0];
    }
    let amp = (prop.ref_pathloss * t.d_bs_ris[0].powf(-prop.exp_bs_ris)).sqrt();
    let expect = los_factor(prop.los_phase, t.los_phase_scale, t.aoa_bs_ris[0]) * (3.0f64 / 4.0).sqrt() * amp;
    let mean = sum / draws as f64;
    // Scatter std per component is amp * sqrt(1/8); three standard errors.
    let tol = 3.0 * amp * (1.0f64 / 8.0).sqrt() / (draws as f64).sqrt();
    assert!((mean.re - expect.re).abs() < tol && (mean.im - expect.im).abs() < tol, "{mean} vs {expect}");
}

#[test]
fn split_streams_keep_direct_links_independent_of_surface_size() {
    let prop = PropagationConfig::default();
    let users = [[90.0, 110.0, 0.0], [130.0, 60.0, 0.0]];
    let small = compute_geometry(&GeometryConfig { ris_cols: 0, ..Default::default() }, &users).unwrap();
    let big = compute_geometry(&GeometryConfig::default(), &users).unwrap();
    let a = sample_channels_split(&prop, &small, &mut ChaCha8Rng::seed_from_u64(1), &mut ChaCha8Rng::seed_from_u64(2));
    let b = sample_channels_split(&prop, &big, &mut ChaCha8Rng::seed_from_u64(1), &mut ChaCha8Rng::seed_from_u64(2));
    assert_eq!(a.h_d, b.h_d);
    assert_eq!(a.h_jd, b.h_jd);
    assert_eq!(a.num_elements(), 0);
    assert_eq!(b.num_elements(), 40);
    assert!(b.is_finite());
}
