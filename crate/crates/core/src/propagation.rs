//! Network geometry and per-block channel realizations.
//!
//! The base station sits at `(D0, 0, Hb)`, the jammer on the ground at
//! `(xJ, yJ, 0)`, and the surface is a `Ny x Nz` array on the `x = 0`
//! facade whose `(i, k)`-th element (1-based) sits at
//! `(0, y_R + i*delta, Hr + k*delta)`. Elements are flattened row-major:
//! `n = (i - 1) * Nz + (k - 1)`.
//!
//! Direct links (BS-UE, jammer-UE) are Rayleigh and redrawn for every
//! `(user, subchannel)` pair. Surface links (BS-RIS, RIS-UE, jammer-RIS) are
//! Rician with a deterministic line-of-sight term and are flat across
//! subchannels.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

pub type Position = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// `D0`, x-coordinate of the base station.
    pub bs_offset: f64,
    pub bs_height: f64,
    pub ris_height: f64,
    /// Shift of the whole surface along the y axis (0 in the reference layout).
    pub ris_y_offset: f64,
    /// `(xJ, yJ)`; the jammer is on the ground.
    pub jammer_pos: [f64; 2],
    pub carrier_wavelength: f64,
    /// `Nz`, elements per column.
    pub ris_rows: usize,
    /// `Ny`, elements per row.
    pub ris_cols: usize,
    pub user_area_center: Position,
    pub user_area_side: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            bs_offset: 2.0,
            bs_height: 10.0,
            ris_height: 10.0,
            ris_y_offset: 0.0,
            jammer_pos: [50.0, 150.0],
            carrier_wavelength: 0.1,
            ris_rows: 4,
            ris_cols: 10,
            user_area_center: [100.0, 100.0, 0.0],
            user_area_side: 100.0,
        }
    }
}

impl GeometryConfig {
    /// Half-wavelength element spacing.
    pub fn element_spacing(&self) -> f64 {
        self.carrier_wavelength / 2.0
    }

    pub fn num_elements(&self) -> usize {
        self.ris_rows * self.ris_cols
    }

    /// An element count of zero is accepted and means "no surface".
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("bs_offset", self.bs_offset),
            ("bs_height", self.bs_height),
            ("ris_height", self.ris_height),
            ("carrier_wavelength", self.carrier_wavelength),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("geometry.{name} must be > 0, got {value}")));
            }
        }
        if !(self.user_area_side.is_finite() && self.user_area_side >= 0.0) {
            return Err(Error::Config(format!(
                "geometry.user_area_side must be >= 0, got {}",
                self.user_area_side
            )));
        }
        let finite = self.jammer_pos.iter().chain(&self.user_area_center).all(|v| v.is_finite())
            && self.ris_y_offset.is_finite();
        if !finite {
            return Err(Error::Config("geometry coordinates must be finite".into()));
        }
        Ok(())
    }

    /// 1-based `(i, k)` indices in flattened element order.
    pub fn element_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.ris_cols).flat_map(move |i| (1..=self.ris_rows).map(move |k| (i, k)))
    }
}

/// How the line-of-sight phase uses the arrival/departure angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LosPhase {
    /// `exp(-j 2 pi delta / lambda * phi)` with `phi` the arccos angle itself.
    #[default]
    Angle,
    /// `exp(-j 2 pi delta / lambda * cos(phi))`, the usual steering-vector form.
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    /// Path loss at 1 m, linear.
    pub ref_pathloss: f64,
    pub exp_direct: f64,
    pub exp_bs_ris: f64,
    pub exp_ris_ue: f64,
    pub exp_jam_direct: f64,
    pub exp_jam_ris: f64,
    pub rician_bs_ris: f64,
    pub rician_ris_ue: f64,
    pub rician_jam_ris: f64,
    /// W/Hz.
    pub noise_density: f64,
    /// Hz.
    pub bandwidth: f64,
    pub subchannels: usize,
    pub los_phase: LosPhase,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            ref_pathloss: units::db_to_linear(-30.0),
            exp_direct: 3.0,
            exp_bs_ris: 2.5,
            exp_ris_ue: 2.2,
            exp_jam_direct: 3.0,
            exp_jam_ris: 2.5,
            rician_bs_ris: 1.0,
            rician_ris_ue: 3.0,
            rician_jam_ris: 1.0,
            noise_density: units::dbm_to_watts(-169.0),
            bandwidth: 100e6,
            subchannels: 16,
            los_phase: LosPhase::Angle,
        }
    }
}

impl PropagationConfig {
    /// Noise power in one subchannel, `sigma^2 * B / K`.
    pub fn noise_power(&self) -> f64 {
        self.noise_density * self.bandwidth / self.subchannels as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ref_pathloss > 0.0 && self.ref_pathloss <= 1.0) {
            return Err(Error::Config(format!(
                "propagation.ref_pathloss must be in (0, 1], got {}",
                self.ref_pathloss
            )));
        }
        let exponents = [
            ("exp_direct", self.exp_direct),
            ("exp_bs_ris", self.exp_bs_ris),
            ("exp_ris_ue", self.exp_ris_ue),
            ("exp_jam_direct", self.exp_jam_direct),
            ("exp_jam_ris", self.exp_jam_ris),
        ];
        for (name, value) in exponents {
            if !(value.is_finite() && value >= 2.0) {
                return Err(Error::Config(format!("propagation.{name} must be >= 2, got {value}")));
            }
        }
        for (name, value) in [
            ("rician_bs_ris", self.rician_bs_ris),
            ("rician_ris_ue", self.rician_ris_ue),
            ("rician_jam_ris", self.rician_jam_ris),
        ] {
            if value.is_nan() || value < 0.0 {
                return Err(Error::Config(format!("propagation.{name} must be >= 0, got {value}")));
            }
        }
        if self.subchannels == 0 {
            return Err(Error::Config("propagation.subchannels must be >= 1".into()));
        }
        let noise = self.noise_power();
        if !(noise.is_finite() && noise > 0.0) {
            return Err(Error::Config(format!("per-subchannel noise power must be > 0, got {noise}")));
        }
        Ok(())
    }
}

/// Distances (m) and angles (rad) for one set of user positions.
///
/// Per-element vectors follow the flattened element order; `d_ris_ue` and
/// `aod_ris_ue` are indexed `[element][user]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    pub d_bs_ue: Vec<f64>,
    pub d_bs_ris: Vec<f64>,
    pub d_ris_ue: Vec<Vec<f64>>,
    pub d_jam_ue: Vec<f64>,
    pub d_jam_ris: Vec<f64>,
    pub aoa_bs_ris: Vec<f64>,
    pub aod_ris_ue: Vec<Vec<f64>>,
    pub aoa_jam_ris: Vec<f64>,
    /// `2 pi delta / lambda`, which is `pi` under half-wavelength spacing.
    pub los_phase_scale: f64,
}

impl DistanceTable {
    pub fn num_users(&self) -> usize {
        self.d_bs_ue.len()
    }

    pub fn num_elements(&self) -> usize {
        self.d_bs_ris.len()
    }
}

/// Complex link gains of one fading block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// BS-UE, `[user][subchannel]`.
    pub h_d: Vec<Vec<Complex64>>,
    /// BS-RIS, `[element]`.
    pub h_br: Vec<Complex64>,
    /// RIS-UE, `[element][user]`.
    pub h_ru: Vec<Vec<Complex64>>,
    /// Jammer-UE, `[user][subchannel]`.
    pub h_jd: Vec<Vec<Complex64>>,
    /// Jammer-RIS, `[element]`.
    pub h_jr: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn num_users(&self) -> usize {
        self.h_d.len()
    }

    pub fn num_subchannels(&self) -> usize {
        self.h_d.first().map_or(0, Vec::len)
    }

    pub fn num_elements(&self) -> usize {
        self.h_br.len()
    }

    pub fn is_finite(&self) -> bool {
        let ok = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        self.h_d.iter().flatten().all(ok)
            && self.h_jd.iter().flatten().all(ok)
            && self.h_br.iter().all(ok)
            && self.h_jr.iter().all(ok)
            && self.h_ru.iter().flatten().all(ok)
    }
}

/// Uniform positions on the ground inside the user square.
pub fn sample_user_positions<R: Rng + ?Sized>(
    geometry: &GeometryConfig,
    num_users: usize,
    rng: &mut R,
) -> Vec<Position> {
    let [cx, cy, _] = geometry.user_area_center;
    let side = geometry.user_area_side;
    (0..num_users)
        .map(|_| {
            let x = cx + side * (rng.random::<f64>() - 0.5);
            let y = cy + side * (rng.random::<f64>() - 0.5);
            [x, y, 0.0]
        })
        .collect()
}

fn checked(name: &'static str, d: f64) -> Result<f64> {
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::CoincidentPoints(name))
    }
}

fn arccos_clamped(ratio: f64) -> f64 {
    ratio.clamp(-1.0, 1.0).acos()
}

/// Evaluates every link distance and angle for the given users.
pub fn compute_geometry(geometry: &GeometryConfig, users: &[Position]) -> Result<DistanceTable> {
    geometry.validate()?;
    let d0 = geometry.bs_offset;
    let hb = geometry.bs_height;
    let hr = geometry.ris_height;
    let delta = geometry.element_spacing();
    let [xj, yj] = geometry.jammer_pos;

    let mut table = DistanceTable {
        d_bs_ue: Vec::with_capacity(users.len()),
        d_bs_ris: Vec::new(),
        d_ris_ue: Vec::new(),
        d_jam_ue: Vec::with_capacity(users.len()),
        d_jam_ris: Vec::new(),
        aoa_bs_ris: Vec::new(),
        aod_ris_ue: Vec::new(),
        aoa_jam_ris: Vec::new(),
        los_phase_scale: 2.0 * PI * delta / geometry.carrier_wavelength,
    };

    for &[x, y, _] in users {
        let d = ((d0 - x).powi(2) + y.powi(2) + hb.powi(2)).sqrt();
        table.d_bs_ue.push(checked("BS-UE", d)?);
        let dj = ((xj - x).powi(2) + (yj - y).powi(2)).sqrt();
        table.d_jam_ue.push(checked("jammer-UE", dj)?);
    }

    for (i, k) in geometry.element_indices() {
        let y_el = geometry.ris_y_offset + i as f64 * delta;
        let z_el = hr + k as f64 * delta;

        let d_br = checked("BS-RIS", ((z_el - hb).powi(2) + y_el.powi(2) + d0.powi(2)).sqrt())?;
        table.d_bs_ris.push(d_br);
        table.aoa_bs_ris.push(arccos_clamped(y_el / d_br));

        let d_jr = checked("jammer-RIS", (z_el.powi(2) + (y_el - yj).powi(2) + xj.powi(2)).sqrt())?;
        table.d_jam_ris.push(d_jr);
        table.aoa_jam_ris.push(arccos_clamped((yj - y_el) / d_jr));

        let mut d_row = Vec::with_capacity(users.len());
        let mut a_row = Vec::with_capacity(users.len());
        for &[x, y, _] in users {
            let d_ru = checked("RIS-UE", (x.powi(2) + z_el.powi(2) + (y - y_el).powi(2)).sqrt())?;
            d_row.push(d_ru);
            a_row.push(arccos_clamped((y - y_el) / d_ru));
        }
        table.d_ris_ue.push(d_row);
        table.aod_ris_ue.push(a_row);
    }
    Ok(table)
}

/// Zero-mean, unit-variance circularly symmetric complex Gaussian.
pub fn cscg<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Line-of-sight and scatter weights `(sqrt(K/(1+K)), sqrt(1/(1+K)))`.
pub fn rician_weights(k_factor: f64) -> (f64, f64) {
    if k_factor.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k_factor / (1.0 + k_factor)).sqrt(), (1.0 / (1.0 + k_factor)).sqrt())
    }
}

fn amplitude(prop: &PropagationConfig, distance: f64, exponent: f64) -> f64 {
    (prop.ref_pathloss * distance.powf(-exponent)).sqrt()
}

/// Unit-modulus line-of-sight factor for the given angle.
pub fn los_factor(mode: LosPhase, scale: f64, angle: f64) -> Complex64 {
    let arg = match mode {
        LosPhase::Angle => angle,
        LosPhase::Cosine => angle.cos(),
    };
    Complex64::from_polar(1.0, -scale * arg)
}

fn rician<R: Rng + ?Sized>(
    prop: &PropagationConfig,
    scale: f64,
    amp: f64,
    k_factor: f64,
    angle: f64,
    rng: &mut R,
) -> Complex64 {
    let (w_los, w_nlos) = rician_weights(k_factor);
    let scatter = cscg(rng);
    (los_factor(prop.los_phase, scale, angle) * w_los + scatter * w_nlos) * amp
}

/// Rayleigh direct links `(h_d, h_jd)`, each `[user][subchannel]`.
pub fn sample_direct_links<R: Rng + ?Sized>(
    prop: &PropagationConfig,
    dist: &DistanceTable,
    rng: &mut R,
) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let k = prop.subchannels;
    let h_d = dist
        .d_bs_ue
        .iter()
        .map(|&d| {
            let a = amplitude(prop, d, prop.exp_direct);
            (0..k).map(|_| cscg(rng) * a).collect()
        })
        .collect();
    let h_jd = dist
        .d_jam_ue
        .iter()
        .map(|&d| {
            let a = amplitude(prop, d, prop.exp_jam_direct);
            (0..k).map(|_| cscg(rng) * a).collect()
        })
        .collect();
    (h_d, h_jd)
}

/// Rician surface links `(h_br, h_jr, h_ru)`.
pub fn sample_surface_links<R: Rng + ?Sized>(
    prop: &PropagationConfig,
    dist: &DistanceTable,
    rng: &mut R,
) -> (Vec<Complex64>, Vec<Complex64>, Vec<Vec<Complex64>>) {
    let s = dist.los_phase_scale;
    let h_br = dist
        .d_bs_ris
        .iter()
        .zip(&dist.aoa_bs_ris)
        .map(|(&d, &phi)| rician(prop, s, amplitude(prop, d, prop.exp_bs_ris), prop.rician_bs_ris, phi, rng))
        .collect();
    let h_jr = dist
        .d_jam_ris
        .iter()
        .zip(&dist.aoa_jam_ris)
        .map(|(&d, &phi)| {
            rician(prop, s, amplitude(prop, d, prop.exp_jam_ris), prop.rician_jam_ris, phi, rng)
        })
        .collect();
    let h_ru = dist
        .d_ris_ue
        .iter()
        .zip(&dist.aod_ris_ue)
        .map(|(ds, phis)| {
            ds.iter()
                .zip(phis)
                .map(|(&d, &phi)| {
                    rician(prop, s, amplitude(prop, d, prop.exp_ris_ue), prop.rician_ris_ue, phi, rng)
                })
                .collect()
        })
        .collect();
    (h_br, h_jr, h_ru)
}

/// Draws a full block with separate streams for the direct and surface links,
/// so runs that differ only in surface size see the same direct fading.
pub fn sample_channels_split<R1, R2>(
    prop: &PropagationConfig,
    dist: &DistanceTable,
    direct_rng: &mut R1,
    surface_rng: &mut R2,
) -> ChannelRealization
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    let (h_d, h_jd) = sample_direct_links(prop, dist, direct_rng);
    let (h_br, h_jr, h_ru) = sample_surface_links(prop, dist, surface_rng);
    ChannelRealization { h_d, h_br, h_ru, h_jd, h_jr }
}

/// Draws a full block from one stream.
pub fn sample_channels<R: Rng + ?Sized>(
    prop: &PropagationConfig,
    dist: &DistanceTable,
    rng: &mut R,
) -> ChannelRealization {
    let (h_d, h_jd) = sample_direct_links(prop, dist, rng);
    let (h_br, h_jr, h_ru) = sample_surface_links(prop, dist, rng);
    ChannelRealization { h_d, h_br, h_ru, h_jd, h_jr }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_user_table(user: Position) -> DistanceTable {
        compute_geometry(&GeometryConfig::default(), &[user]).unwrap()
    }

    #[test]
    fn degenerate_square_puts_everyone_at_center() {
        let geom = GeometryConfig { user_area_side: 0.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in sample_user_positions(&geom, 5, &mut rng) {
            assert_eq!(p, [100.0, 100.0, 0.0]);
        }
    }

    #[test]
    fn users_stay_inside_reference_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in sample_user_positions(&GeometryConfig::default(), 1000, &mut rng) {
            assert!((50.0..=150.0).contains(&p[0]) && (50.0..=150.0).contains(&p[1]));
            assert_eq!(p[2], 0.0);
        }
    }

    #[test]
    fn user_mean_within_three_standard_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let users = sample_user_positions(&GeometryConfig::default(), n, &mut rng);
        // Uniform on a side-100 interval: sd = 100 / sqrt(12).
        let se = 100.0 / 12f64.sqrt() / (n as f64).sqrt();
        for axis in 0..2 {
            let mean = users.iter().map(|p| p[axis]).sum::<f64>() / n as f64;
            assert!((mean - 100.0).abs() < 3.0 * se, "axis {axis}: mean {mean}");
        }
    }

    #[test]
    fn vertical_drop_distance() {
        let table = one_user_table([2.0, 0.0, 0.0]);
        assert_eq!(table.d_bs_ue[0], 10.0);
    }

    #[test]
    fn first_element_bs_distance() {
        let geom = GeometryConfig { carrier_wavelength: 0.1, ..Default::default() };
        let table = compute_geometry(&geom, &[[100.0, 100.0, 0.0]]).unwrap();
        // (Hr + delta - Hb)^2 + delta^2 + D0^2 = 0.0025 + 0.0025 + 4.
        assert!((table.d_bs_ris[0] - 2.001_249_609_618_95).abs() < 1e-12);
    }

    #[test]
    fn jammer_user_distance() {
        let table = one_user_table([100.0, 100.0, 0.0]);
        assert!((table.d_jam_ue[0] - 70.710_678_118_654_76).abs() < 1e-9);
    }

    #[test]
    fn angles_in_arccos_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let geom = GeometryConfig::default();
        let users = sample_user_positions(&geom, 8, &mut rng);
        let t = compute_geometry(&geom, &users).unwrap();
        let all = t.aoa_bs_ris.iter().chain(&t.aoa_jam_ris).chain(t.aod_ris_ue.iter().flatten());
        for &a in all {
            assert!((0.0..=PI).contains(&a));
        }
        assert_eq!(t.num_elements(), 40);
        assert!((t.los_phase_scale - PI).abs() < 1e-15);
    }

    #[test]
    fn user_on_jammer_is_rejected() {
        let err = compute_geometry(&GeometryConfig::default(), &[[50.0, 150.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::CoincidentPoints("jammer-UE")));
    }

    #[test]
    fn infinite_rician_factor_is_pure_los() {
        let prop = PropagationConfig {
            rician_bs_ris: f64::INFINITY,
            rician_ris_ue: f64::INFINITY,
            rician_jam_ris: f64::INFINITY,
            ..Default::default()
        };
        let table = one_user_table([100.0, 100.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = sample_channels(&prop, &table, &mut rng);
        for (n, h) in ch.h_br.iter().enumerate() {
            let expect = (prop.ref_pathloss * table.d_bs_ris[n].powf(-prop.exp_bs_ris)).sqrt();
            assert!((h.norm() - expect).abs() <= 1e-15 * expect);
        }
    }

    #[test]
    fn los_factor_is_unit_modulus() {
        for mode in [LosPhase::Angle, LosPhase::Cosine] {
            for i in 0..50 {
                let f = los_factor(mode, PI, i as f64 * 0.0628);
                assert!((f.norm() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn reference_distance_gives_reference_loss() {
        // With d = 1 m the exponent drops out: E|h|^2 = ref_pathloss.
        let prop = PropagationConfig::default();
        let table = DistanceTable {
            d_bs_ue: vec![1.0],
            d_bs_ris: vec![],
            d_ris_ue: vec![],
            d_jam_ue: vec![1.0],
            d_jam_ris: vec![],
            aoa_bs_ris: vec![],
            aod_ris_ue: vec![],
            aoa_jam_ris: vec![],
            los_phase_scale: PI,
        };
        let prop = PropagationConfig { subchannels: 1, exp_direct: 4.7, ..prop };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 100_000;
        let samples: Vec<f64> =
            (0..n).map(|_| sample_channels(&prop, &table, &mut rng).h_d[0][0].norm_sqr()).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        // |CN(0, s)|^2 is exponential with sd equal to its mean.
        let se = 1e-3 / (n as f64).sqrt();
        assert!((mean - 1e-3).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn same_seed_same_block() {
        let geom = GeometryConfig::default();
        let prop = PropagationConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let users = sample_user_positions(&geom, 4, &mut rng);
        let table = compute_geometry(&geom, &users).unwrap();
        let a = sample_channels(&prop, &table, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_channels(&prop, &table, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert!(a.is_finite());
        assert_eq!((a.num_users(), a.num_subchannels(), a.num_elements()), (4, 16, 40));
    }

    #[test]
    fn zero_element_surface_is_allowed() {
        let geom = GeometryConfig { ris_cols: 0, ..Default::default() };
        let table = compute_geometry(&geom, &[[100.0, 100.0, 0.0]]).unwrap();
        assert_eq!(table.num_elements(), 0);
    }

    #[test]
    fn invalid_configs_rejected() {
        let geom = GeometryConfig { bs_height: 0.0, ..Default::default() };
        assert!(geom.validate().is_err());
        let prop = PropagationConfig { exp_ris_ue: 1.5, ..Default::default() };
        assert!(prop.validate().is_err());
        let prop = PropagationConfig { ref_pathloss: 2.0, ..Default::default() };
        assert!(prop.validate().is_err());
        let prop = PropagationConfig { rician_ris_ue: -1.0, ..Default::default() };
        assert!(prop.validate().is_err());
        assert!(PropagationConfig::default().validate().is_ok());
    }
}
