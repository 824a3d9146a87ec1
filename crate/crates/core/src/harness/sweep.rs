//! Parameter sweeps: one CSV of per-replicate rows and one summary CSV per
//! figure.
//!
//! Row file `sweep_<figure>.csv`:
//!
//! | column | meaning |
//! |---|---|
//! | `figure`, `parameter` | sweep name and the varied field |
//! | `series` | baseline kind |
//! | `value` | grid value |
//! | `seed` | replicate master seed |
//! | `scenario_hash` | hash of the evaluated scenario (see [`ScenarioConfig::hash`]) |
//! | `trained_on` | hash of the training scenario, empty for fixed baselines |
//! | `episodes` | test episodes behind `mean` and `std` |
//! | `mean`, `std` | mean and sample std of the per-episode mean sum rate |
//! | `error` | empty, or the failure message (then `mean`/`std` are empty) |
//!
//! Summary file `sweep_<figure>_summary.csv` has
//! `figure,parameter,series,value,seeds,mean,std,failures`, where `mean` and
//! `std` are taken over the successful replicates' means.
//!
//! Every evaluated scenario is also written to `scenarios/<hash>.toml`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::{evaluate, run_training, sample_std, TrainOptions};
use super::{Baseline, ScenarioConfig};
use crate::agent::Td3Agent;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Figure {
    /// Number of surface elements.
    #[serde(rename = "N")]
    N,
    #[serde(rename = "pmax")]
    Pmax,
    #[serde(rename = "pj")]
    Pj,
    /// Jamming shape, `alpha = beta`.
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "users")]
    Users,
    #[serde(rename = "geometry")]
    Geometry,
    #[serde(rename = "chi")]
    Chi,
}

impl Figure {
    pub const ALL: [Figure; 7] =
        [Figure::N, Figure::Pmax, Figure::Pj, Figure::Alpha, Figure::Users, Figure::Geometry, Figure::Chi];

    pub fn name(self) -> &'static str {
        match self {
            Figure::N => "N",
            Figure::Pmax => "pmax",
            Figure::Pj => "pj",
            Figure::Alpha => "alpha",
            Figure::Users => "users",
            Figure::Geometry => "geometry",
            Figure::Chi => "chi",
        }
    }

    /// Whether a learned policy is retrained at every grid value. Sweeps
    /// over transmit power, jamming power and jamming shape reuse one
    /// agent trained on the base scenario.
    pub fn retrains(self) -> bool {
        !matches!(self, Figure::Pmax | Figure::Pj | Figure::Alpha)
    }
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown figure {s:?}")))
    }
}

/// Position being moved in a geometry sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryAxis {
    /// Base-station x coordinate.
    BsX,
    /// Surface y offset.
    RisY,
    JammerX,
    JammerY,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Must match the figure requested on the command line when present.
    #[serde(default)]
    pub figure: Option<Figure>,
    #[serde(default)]
    pub values: Vec<f64>,
    /// Replicate master seeds.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_series")]
    pub series: Vec<Baseline>,
    /// Required for geometry sweeps.
    #[serde(default)]
    pub axis: Option<GeometryAxis>,
    /// Overrides [`Figure::retrains`].
    #[serde(default)]
    pub retrain: Option<bool>,
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_series() -> Vec<Baseline> {
    vec![Baseline::PsdTd3, Baseline::RandomRis, Baseline::NoRis]
}

/// A sweep file: a `[grid]` table and a `[scenario]` table holding the base
/// scenario in the usual format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub grid: GridSpec,
    #[serde(default)]
    pub scenario: ScenarioConfig,
}

impl GridFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let g: Self = toml::from_str(text)?;
        g.scenario.validate()?;
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

fn parameter_name(figure: Figure, axis: Option<GeometryAxis>) -> &'static str {
    match (figure, axis) {
        (Figure::N, _) => "ris_elements",
        (Figure::Pmax, _) => "p_max_dbm",
        (Figure::Pj, _) => "jam_power_dbm",
        (Figure::Alpha, _) => "jam_shape",
        (Figure::Users, _) => "num_users",
        (Figure::Geometry, Some(GeometryAxis::BsX)) => "bs_x",
        (Figure::Geometry, Some(GeometryAxis::RisY)) => "ris_y",
        (Figure::Geometry, Some(GeometryAxis::JammerX)) => "jammer_x",
        (Figure::Geometry, Some(GeometryAxis::JammerY)) => "jammer_y",
        (Figure::Geometry, None) => "geometry",
        (Figure::Chi, _) => "chi",
    }
}

fn count(value: f64, what: &str) -> Result<usize> {
    if value >= 0.0 && value.fract() == 0.0 && value < u32::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(Error::Config(format!("{what} must be a non-negative integer, got {value}")))
    }
}

/// Base scenario with one grid value applied.
///
/// Element counts keep the row count and set the columns (0 removes the
/// surface). The shape sweep sets `alpha = beta = value` and keeps the
/// flat profile only at 5, where the base scenario's `equal_power` flag
/// still applies.
pub fn apply_point(base: &ScenarioConfig, figure: Figure, axis: Option<GeometryAxis>, value: f64) -> Result<ScenarioConfig> {
    let mut s = base.clone();
    match figure {
        Figure::N => {
            let n = count(value, "element count")?;
            let rows = s.geometry.ris_rows;
            if n > 0 && (rows == 0 || n % rows != 0) {
                return Err(Error::Config(format!("{n} elements do not fill whole columns of {rows} rows")));
            }
            s.geometry.ris_cols = if n == 0 { 0 } else { n / rows };
        }
        Figure::Pmax => s.p_max_dbm = value,
        Figure::Pj => s.jamming.power_dbm = value,
        Figure::Alpha => {
            s.jamming.alpha = value;
            s.jamming.beta = value;
            s.jamming.equal_power = base.jamming.equal_power && value == 5.0;
        }
        Figure::Users => s.num_users = count(value, "user count")?,
        Figure::Geometry => match axis {
            Some(GeometryAxis::BsX) => s.geometry.bs_offset = value,
            Some(GeometryAxis::RisY) => s.geometry.ris_y_offset = value,
            Some(GeometryAxis::JammerX) => s.geometry.jammer_pos[0] = value,
            Some(GeometryAxis::JammerY) => s.geometry.jammer_pos[1] = value,
            None => return Err(Error::Config("geometry sweeps need grid.axis".into())),
        },
        Figure::Chi => s.qos.chi = value,
    }
    s.validate()?;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub series: Baseline,
    pub value: f64,
    pub seed: u64,
    pub scenario_hash: String,
    pub trained_on: Option<String>,
    pub episodes: usize,
    /// Per-episode mean sum rates (bits/symbol), or the failure.
    pub outcome: std::result::Result<Vec<f64>, String>,
}

impl SweepRow {
    pub fn mean(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|m| m.iter().sum::<f64>() / m.len().max(1) as f64)
    }

    pub fn std(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|m| sample_std(m))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummaryRow {
    pub series: Baseline,
    pub value: f64,
    pub seeds: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub failures: usize,
}

/// Outcome of a sweep, in grid order (value, then series, then seed).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub figure: Figure,
    pub parameter: &'static str,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummaryRow>,
    pub rows_path: PathBuf,
    pub summary_path: PathBuf,
}

struct Job {
    series: Baseline,
    value: f64,
    seed: u64,
}

/// The scenario one job evaluates. Learned series at zero elements have
/// nothing to control and fall back to the surface-free baseline.
fn job_scenario(base: &ScenarioConfig, grid: &GridSpec, figure: Figure, job: &Job) -> Result<ScenarioConfig> {
    let mut s = apply_point(base, figure, grid.axis, job.value)?;
    s.seed = job.seed;
    s.baseline = job.series;
    if job.series.is_learned() && s.num_elements() == 0 {
        s.baseline = Baseline::NoRis;
    }
    Ok(s)
}

/// Runs a sweep on a pool of `workers` threads (all cores when `None`)
/// and writes both CSV files into `out_dir`. Results do not depend on the
/// worker count: every job derives its random streams from its own seed
/// and rows are written in grid order.
pub fn run_sweep(file: &GridFile, figure: Figure, out_dir: &Path, workers: Option<usize>) -> Result<SweepResult> {
    let grid = &file.grid;
    if let Some(f) = grid.figure {
        if f != figure {
            return Err(Error::Config(format!("grid file is for figure {}, not {}", f.name(), figure.name())));
        }
    }
    if figure == Figure::Geometry && grid.axis.is_none() {
        return Err(Error::Config("geometry sweeps need grid.axis".into()));
    }
    let retrain = grid.retrain.unwrap_or(figure.retrains());
    let base = &file.scenario;
    std::fs::create_dir_all(out_dir.join("scenarios"))?;

    let jobs: Vec<Job> = grid
        .values
        .iter()
        .flat_map(|&value| {
            grid.series
                .iter()
                .flat_map(move |&series| grid.seeds.iter().map(move |&seed| Job { series, value, seed }))
        })
        .collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        pool = pool.num_threads(w.max(1));
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let rows = pool.install(|| -> Result<Vec<SweepRow>> {
        // Agents trained once per (series, seed) on the base scenario.
        let mut shared: BTreeMap<(Baseline, u64), std::result::Result<(Td3Agent, String), String>> = BTreeMap::new();
        if !retrain && !grid.values.is_empty() {
            let keys: Vec<(Baseline, u64)> = grid
                .series
                .iter()
                .filter(|s| s.is_learned())
                .flat_map(|&s| grid.seeds.iter().map(move |&seed| (s, seed)))
                .collect();
            let trained: Vec<_> = keys
                .par_iter()
                .map(|&(series, seed)| {
                    let s = ScenarioConfig { seed, baseline: series, ..base.clone() };
                    run_training(&s, &TrainOptions::default())
                        .map(|t| (t.agent, s.hash()))
                        .map_err(|e| e.to_string())
                })
                .collect();
            shared = keys.into_iter().zip(trained).collect();
        }

        let rows: Vec<SweepRow> = jobs
            .par_iter()
            .map(|job| {
                let scenario = match job_scenario(base, grid, figure, job) {
                    Ok(s) => s,
                    Err(e) => {
                        return SweepRow {
                            series: job.series,
                            value: job.value,
                            seed: job.seed,
                            scenario_hash: String::new(),
                            trained_on: None,
                            episodes: 0,
                            outcome: Err(e.to_string()),
                        }
                    }
                };
                let hash = scenario.hash();
                let (outcome, trained_on) = if !scenario.baseline.is_learned() {
                    (evaluate(&scenario, None).map_err(|e| e.to_string()), None)
                } else if retrain {
                    let trained = run_training(&scenario, &TrainOptions::default());
                    let outcome = trained.map_err(|e| e.to_string()).and_then(|t| {
                        evaluate(&scenario, Some(&t.agent)).map_err(|e| e.to_string())
                    });
                    (outcome, Some(hash.clone()))
                } else {
                    match &shared[&(job.series, job.seed)] {
                        Ok((agent, trained_hash)) => (
                            evaluate(&scenario, Some(agent)).map_err(|e| e.to_string()),
                            Some(trained_hash.clone()),
                        ),
                        Err(e) => (Err(format!("training failed: {e}")), None),
                    }
                };
                SweepRow {
                    series: job.series,
                    value: job.value,
                    seed: job.seed,
                    scenario_hash: hash,
                    trained_on,
                    episodes: scenario.eval.episodes,
                    outcome: outcome.map(|r| r.episode_means),
                }
            })
            .collect();
        Ok(rows)
    })?;

    // Scenario files, written once each in grid order.
    for job in &jobs {
        if let Ok(s) = job_scenario(base, grid, figure, job) {
            let path = out_dir.join("scenarios").join(format!("{}.toml", s.hash()));
            if !path.exists() {
                std::fs::write(&path, ScenarioConfig { seed: 0, ..s }.to_toml())?;
            }
        }
    }
    if !retrain {
        for series in grid.series.iter().filter(|s| s.is_learned()) {
            let s = ScenarioConfig { baseline: *series, seed: 0, ..base.clone() };
            let path = out_dir.join("scenarios").join(format!("{}.toml", s.hash()));
            if !path.exists() {
                std::fs::write(&path, s.to_toml())?;
            }
        }
    }

    let parameter = parameter_name(figure, grid.axis);
    let scale = base.report.rate_scale;
    let stem = format!("sweep_{}", figure.name());
    let rows_path = out_dir.join(format!("{stem}.csv"));
    let summary_path = out_dir.join(format!("{stem}_summary.csv"));

    let mut w = csv::Writer::from_path(&rows_path)?;
    w.write_record([
        "figure",
        "parameter",
        "series",
        "value",
        "seed",
        "scenario_hash",
        "trained_on",
        "episodes",
        "mean",
        "std",
        "error",
    ])?;
    for r in &rows {
        let num = |x: Option<f64>| x.map(|v| (v * scale).to_string()).unwrap_or_default();
        w.write_record([
            figure.name().to_string(),
            parameter.to_string(),
            r.series.name().to_string(),
            r.value.to_string(),
            r.seed.to_string(),
            r.scenario_hash.clone(),
            r.trained_on.clone().unwrap_or_default(),
            r.episodes.to_string(),
            num(r.mean()),
            num(r.std()),
            r.outcome.as_ref().err().cloned().unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    let summary = summarize_rows(&rows);
    let mut w = csv::Writer::from_path(&summary_path)?;
    w.write_record(["figure", "parameter", "series", "value", "seeds", "mean", "std", "failures"])?;
    for s in &summary {
        let num = |x: Option<f64>| x.map(|v| (v * scale).to_string()).unwrap_or_default();
        w.write_record([
            figure.name().to_string(),
            parameter.to_string(),
            s.series.name().to_string(),
            s.value.to_string(),
            s.seeds.to_string(),
            num(s.mean),
            num(s.std),
            s.failures.to_string(),
        ])?;
    }
    w.flush()?;

    Ok(SweepResult { figure, parameter, rows, summary, rows_path, summary_path })
}

/// Groups rows by (value, series) in first-seen order.
fn summarize_rows(rows: &[SweepRow]) -> Vec<SweepSummaryRow> {
    let mut groups: Vec<(Baseline, f64, Vec<&SweepRow>)> = Vec::new();
    for r in rows {
        match groups.iter_mut().find(|(s, v, _)| *s == r.series && v.to_bits() == r.value.to_bits()) {
            Some(g) => g.2.push(r),
            None => groups.push((r.series, r.value, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(series, value, members)| {
            let means: Vec<f64> = members.iter().filter_map(|r| r.mean()).collect();
            let ok = !means.is_empty();
            SweepSummaryRow {
                series,
                value,
                seeds: means.len(),
                mean: ok.then(|| means.iter().sum::<f64>() / means.len() as f64),
                std: ok.then(|| sample_std(&means)),
                failures: members.len() - means.len(),
            }
        })
        .collect()
}
