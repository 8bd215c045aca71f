//! The `sample`, `simulate`, `analyze` and `palm` commands.
//!
//! Layout under the output directory:
//!
//! ```text
//! ensemble/manifest.json, ensemble/config_0000.{csv,json}, ...
//! trajectories/manifest.json, trajectories/traj_0000.{csv,json}, ...
//! analysis/summary.json plus one file per requested observable
//! palm/manifest.json, palm/curve_0000.csv, ...
//! ```
//!
//! Manifests hold no timestamps or absolute paths, so identical configs
//! give identical bytes. Wall-clock time is recorded only in the per-run
//! trajectory JSON.

use std::path::{Path, PathBuf};
use std::time::Instant;

use loggas::dynamics::{simulate, Trajectory, TrajectoryMeta, TAGGED};
use loggas::io;
use loggas::model::{Configuration, Point, Window};
use loggas::observables::{
    default_fit_window, msd_samples, number_variance_profile, scaling_exponent, variational_bound, ExponentFit,
    MsdSeries, NumberStatistics, TrialFunction, VariationalBound,
};
use loggas::palm::palm_stabilization;
use loggas::pointfield::{sample_gibbs_with, sample_ginibre, sample_poisson};
use loggas::rng::split_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AnalysisRequest, DynamicsConfig, ExperimentConfig, FieldConfig, Snapshot};
use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SEED_RULE: &str = "replica k: split_seed(base, k); dynamics noise: split_seed(replica seed, 1)";
/// Runs with a larger fraction of capped drift steps are left out of analysis.
pub const MAX_CAPPED_FRACTION: f64 = 1e-3;

pub fn replica_seed(base: u64, k: usize) -> u64 {
    split_seed(base, k as u64)
}

pub fn noise_seed(replica_seed: u64) -> u64 {
    split_seed(replica_seed, 1)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

struct Layout {
    root: PathBuf,
}

impl Layout {
    fn new(cfg: &ExperimentConfig) -> Self {
        Self { root: cfg.output_dir.clone() }
    }
    fn ensemble(&self) -> PathBuf {
        self.root.join("ensemble")
    }
    fn trajectories(&self) -> PathBuf {
        self.root.join("trajectories")
    }
    fn analysis(&self) -> PathBuf {
        self.root.join("analysis")
    }
    fn palm(&self) -> PathBuf {
        self.root.join("palm")
    }
}

pub fn sample_field(field: &FieldConfig, seed: u64) -> loggas::Result<Configuration<f64>> {
    match *field {
        FieldConfig::Ginibre { n } => sample_ginibre(n, seed),
        FieldConfig::Poisson { intensity, window } => sample_poisson(intensity, window.window(), seed),
        FieldConfig::Gibbs { window, sweeps, proposals, .. } => {
            let pot = field.gibbs_potential().expect("gibbs field");
            sample_gibbs_with(&pot, window.window(), sweeps, seed, &proposals.into()).map(|r| r.config)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub index: usize,
    pub seed: u64,
    pub file: String,
    pub n_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub tool_version: String,
    pub field: FieldConfig,
    pub base_seed: u64,
    pub ensemble_size: usize,
    pub seed_rule: String,
    pub samples: Vec<SampleEntry>,
}

impl EnsembleManifest {
    fn matches(&self, cfg: &ExperimentConfig) -> Result<(), CliError> {
        let mut diffs = Vec::new();
        if self.field != cfg.field {
            diffs.push("field");
        }
        if self.base_seed != cfg.seed {
            diffs.push("seed");
        }
        if self.ensemble_size != cfg.ensemble_size {
            diffs.push("ensemble_size");
        }
        if self.tool_version != TOOL_VERSION {
            diffs.push("tool_version");
        }
        mismatch("ensemble", &diffs)
    }
}

fn mismatch(what: &str, diffs: &[&str]) -> Result<(), CliError> {
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} manifest does not match the config: {}", diffs.join(", "))))
    }
}

fn config_file(k: usize) -> String {
    format!("config_{k:04}.csv")
}

/// Samples the ensemble and writes it with its manifest.
pub fn cmd_sample(cfg: &ExperimentConfig) -> Result<EnsembleManifest, CliError> {
    let dir = Layout::new(cfg).ensemble();
    create_dir(&dir)?;
    let configs: Vec<loggas::Result<Configuration<f64>>> = (0..cfg.ensemble_size)
        .into_par_iter()
        .map(|k| sample_field(&cfg.field, replica_seed(cfg.seed, k)))
        .collect();
    let mut samples = Vec::with_capacity(configs.len());
    for (k, c) in configs.into_iter().enumerate() {
        let c = c?;
        let file = config_file(k);
        io::write_configuration(&dir.join(&file), &c)?;
        samples.push(SampleEntry { index: k, seed: replica_seed(cfg.seed, k), file, n_points: c.len() });
    }
    let manifest = EnsembleManifest {
        tool_version: TOOL_VERSION.into(),
        field: cfg.field,
        base_seed: cfg.seed,
        ensemble_size: cfg.ensemble_size,
        seed_rule: SEED_RULE.into(),
        samples,
    };
    io::write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn read_ensemble_manifest(cfg: &ExperimentConfig) -> Result<Option<EnsembleManifest>, CliError> {
    let path = Layout::new(cfg).ensemble().join("manifest.json");
    if !path.exists() {
        return Ok(None);
    }
    let m: EnsembleManifest = io::read_json(&path)?;
    m.matches(cfg)?;
    Ok(Some(m))
}

/// The ensemble on disk, sampled first if absent.
fn load_or_sample(cfg: &ExperimentConfig) -> Result<(EnsembleManifest, Vec<Configuration<f64>>), CliError> {
    let manifest = match read_ensemble_manifest(cfg)? {
        Some(m) => m,
        None => cmd_sample(cfg)?,
    };
    let dir = Layout::new(cfg).ensemble();
    let configs = manifest
        .samples
        .iter()
        .map(|s| io::read_configuration(&dir.join(&s.file)).map_err(CliError::from))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((manifest, configs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub index: usize,
    pub replica_seed: u64,
    pub noise_seed: u64,
    pub file: String,
    pub meta_file: String,
    pub incomplete: bool,
    pub abort_reason: Option<String>,
    pub steps_taken: u64,
    pub capped_fraction: f64,
    pub min_pair_distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub tool_version: String,
    pub field: FieldConfig,
    pub base_seed: u64,
    pub ensemble_size: usize,
    pub dynamics: DynamicsConfig,
    pub seed_rule: String,
    pub runs: Vec<RunEntry>,
}

/// Per-run sidecar: run metadata plus wall-clock time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub meta: TrajectoryMeta,
    pub incomplete: bool,
    pub wall_clock_seconds: f64,
}

fn dynamics_of(cfg: &ExperimentConfig) -> Result<&DynamicsConfig, CliError> {
    cfg.dynamics.as_ref().ok_or_else(|| CliError::Config("dynamics: section missing".into()))
}

/// Integrates one replica from its initial configuration.
pub fn run_replica(
    cfg: &ExperimentConfig,
    k: usize,
    initial: &Configuration<f64>,
) -> Result<(Trajectory<f64>, Option<String>), CliError> {
    let d = dynamics_of(cfg)?;
    let params = d.params(noise_seed(replica_seed(cfg.seed, k)));
    match simulate(initial, &d.drift_spec(), &params) {
        Ok(t) => Ok((t, None)),
        Err(abort) if abort.partial.n_frames() > 0 => {
            let reason = abort.cause.to_string();
            Ok((abort.partial, Some(reason)))
        }
        Err(abort) => Err(CliError::from(abort.cause)),
    }
}

fn traj_file(k: usize) -> String {
    format!("traj_{k:04}.csv")
}

/// Integrates every replica, writing per-run CSVs and the manifest.
///
/// Aborted runs keep their partial frames and are flagged `incomplete`;
/// the command then fails with a runtime error after all outputs are written.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<TrajectoryManifest, CliError> {
    let d = *dynamics_of(cfg)?;
    let (_, initial) = load_or_sample(cfg)?;
    let dir = Layout::new(cfg).trajectories();
    create_dir(&dir)?;
    let runs: Vec<Result<RunEntry, CliError>> = initial
        .par_iter()
        .enumerate()
        .map(|(k, c0)| {
            let start = Instant::now();
            let (traj, abort) = run_replica(cfg, k, c0)?;
            let wall = start.elapsed().as_secs_f64();
            let file = traj_file(k);
            let meta_file = format!("traj_{k:04}.json");
            io::write_trajectory_csv(&dir.join(&file), &traj)?;
            let record = RunRecord { meta: traj.meta.clone(), incomplete: abort.is_some(), wall_clock_seconds: wall };
            io::write_json(&dir.join(&meta_file), &record)?;
            let sd = replica_seed(cfg.seed, k);
            Ok(RunEntry {
                index: k,
                replica_seed: sd,
                noise_seed: noise_seed(sd),
                file,
                meta_file,
                incomplete: abort.is_some(),
                abort_reason: abort,
                steps_taken: traj.meta.steps_taken,
                capped_fraction: traj.meta.capped_fraction(),
                min_pair_distance: traj.meta.min_pair_distance,
            })
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let manifest = TrajectoryManifest {
        tool_version: TOOL_VERSION.into(),
        field: cfg.field,
        base_seed: cfg.seed,
        ensemble_size: cfg.ensemble_size,
        dynamics: d,
        seed_rule: SEED_RULE.into(),
        runs,
    };
    io::write_json(&dir.join("manifest.json"), &manifest)?;
    let aborted = manifest.runs.iter().filter(|r| r.incomplete).count();
    if aborted > 0 {
        return Err(CliError::Runtime(format!(
            "{aborted} of {} runs aborted; partial trajectories are flagged incomplete",
            manifest.runs.len()
        )));
    }
    Ok(manifest)
}

fn read_trajectory_manifest(cfg: &ExperimentConfig) -> Result<Option<TrajectoryManifest>, CliError> {
    let path = Layout::new(cfg).trajectories().join("manifest.json");
    if !path.exists() {
        return Ok(None);
    }
    let m: TrajectoryManifest = io::read_json(&path)?;
    let mut diffs = Vec::new();
    if m.field != cfg.field {
        diffs.push("field");
    }
    if m.base_seed != cfg.seed {
        diffs.push("seed");
    }
    if m.ensemble_size != cfg.ensemble_size {
        diffs.push("ensemble_size");
    }
    if m.tool_version != TOOL_VERSION {
        diffs.push("tool_version");
    }
    match &cfg.dynamics {
        Some(d) => {
            if d.dt != m.dynamics.dt {
                diffs.push("dynamics.dt");
            }
            if d.t_max != m.dynamics.t_max {
                diffs.push("dynamics.t_max");
            }
            if d.thin != m.dynamics.thin {
                diffs.push("dynamics.thin");
            }
            if d.drift_spec() != m.dynamics.drift_spec() {
                diffs.push("dynamics.drift");
            }
            if d.noise != m.dynamics.noise {
                diffs.push("dynamics.noise");
            }
        }
        None => diffs.push("dynamics"),
    }
    mismatch("trajectory", &diffs)?;
    Ok(Some(m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryUsage {
    pub runs: usize,
    pub used: usize,
    pub incomplete: usize,
    pub rejected_capped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalysisResult {
    Msd {
        file: String,
        exponent_file: String,
        ensemble_size: usize,
        fit_window: [f64; 2],
        exponent: ExponentFit<f64>,
    },
    NumberVariance {
        file: String,
        snapshot: Snapshot,
        profile: Vec<NumberStatistics>,
    },
    VariationalBound {
        file: String,
        snapshot: Snapshot,
        trial: TrialFunction<f64>,
        coordinate: usize,
        eps: f64,
        bound: VariationalBound,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub tool_version: String,
    pub field: FieldConfig,
    pub base_seed: u64,
    pub ensemble_size: usize,
    pub seed_rule: String,
    pub dynamics: Option<DynamicsConfig>,
    pub ensemble_samples: Option<usize>,
    pub trajectories: Option<TrajectoryUsage>,
    /// Finite-N caveat carried with every report.
    pub note: String,
    pub analyses: Vec<AnalysisResult>,
}

const NOTE: &str = "finite-N statistics with Gaussian confinement; exponents are desk-scale estimates, not infinite-volume limits";

struct Loaded {
    trajectories: Vec<Trajectory<f64>>,
    usage: TrajectoryUsage,
}

fn load_trajectories(cfg: &ExperimentConfig, m: &TrajectoryManifest) -> Result<Loaded, CliError> {
    let dir = Layout::new(cfg).trajectories();
    let mut usage = TrajectoryUsage { runs: m.runs.len(), used: 0, incomplete: 0, rejected_capped: 0 };
    let mut trajectories = Vec::new();
    for r in &m.runs {
        if r.incomplete {
            usage.incomplete += 1;
            continue;
        }
        if r.capped_fraction > MAX_CAPPED_FRACTION {
            usage.rejected_capped += 1;
            continue;
        }
        let record: RunRecord = io::read_json(&dir.join(&r.meta_file))?;
        trajectories.push(io::read_trajectory_csv(&dir.join(&r.file), record.meta)?);
    }
    usage.used = trajectories.len();
    Ok(Loaded { trajectories, usage })
}

fn final_frames(trajs: &[Trajectory<f64>]) -> Result<Vec<Configuration<f64>>, CliError> {
    trajs
        .iter()
        .map(|t| {
            let pts: Vec<Point<f64>> = t.frames.last().cloned().unwrap_or_default();
            let r = pts.iter().fold(0.0f64, |a, p| a.max(p.norm()));
            Configuration::new(pts, Window::disk(r + 1.0)).map_err(CliError::from)
        })
        .collect()
}

fn output_name(kind: &str, count: usize, ext: &str) -> String {
    if count == 0 {
        format!("{kind}.{ext}")
    } else {
        format!("{kind}_{count}.{ext}")
    }
}

fn write_msd_csv(path: &Path, s: &MsdSeries<f64>) -> Result<(), CliError> {
    let mut text = String::from("lag,msd,stderr\n");
    for ((l, v), e) in s.lags.iter().zip(&s.values).zip(&s.stderr) {
        text.push_str(&format!("{l:.16e},{v:.16e},{e:.16e}\n"));
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_profile_csv(path: &Path, prof: &[NumberStatistics]) -> Result<(), CliError> {
    let mut text = String::from("radius,mean,mean_stderr,variance,variance_stderr,ratio,ratio_stderr,ensemble_size\n");
    for s in prof {
        text.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            s.radius, s.mean, s.mean_stderr, s.variance, s.variance_stderr, s.ratio, s.ratio_stderr, s.ensemble_size
        ));
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Evaluates every requested observable and writes the summary.
pub fn cmd_analyze(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    let layout = Layout::new(cfg);
    let ens_manifest = read_ensemble_manifest(cfg)?;
    let traj_manifest = read_trajectory_manifest(cfg)?;
    let needs_traj = cfg.analysis.iter().any(|a| {
        matches!(
            a,
            AnalysisRequest::Msd { .. }
                | AnalysisRequest::NumberVariance { snapshot: Snapshot::Final, .. }
                | AnalysisRequest::VariationalBound { snapshot: Snapshot::Final, .. }
        )
    });
    let needs_ens = cfg.analysis.iter().any(|a| {
        matches!(
            a,
            AnalysisRequest::NumberVariance { snapshot: Snapshot::Initial, .. }
                | AnalysisRequest::VariationalBound { snapshot: Snapshot::Initial, .. }
        )
    });
    let loaded = match (&traj_manifest, needs_traj) {
        (Some(m), true) => Some(load_trajectories(cfg, m)?),
        (None, true) => return Err(CliError::Io("trajectories/manifest.json not found; run simulate first".into())),
        _ => None,
    };
    let ensemble = match (&ens_manifest, needs_ens) {
        (Some(_), true) => Some(load_or_sample(cfg)?.1),
        (None, true) => return Err(CliError::Io("ensemble/manifest.json not found; run sample first".into())),
        _ => None,
    };
    let finals = match &loaded {
        Some(l) if needs_traj => Some(final_frames(&l.trajectories)?),
        _ => None,
    };
    let pick = |snap: Snapshot| -> &[Configuration<f64>] {
        match snap {
            Snapshot::Initial => ensemble.as_deref().unwrap_or(&[]),
            Snapshot::Final => finals.as_deref().unwrap_or(&[]),
        }
    };

    let dir = layout.analysis();
    create_dir(&dir)?;
    let mut counts = [0usize; 3];
    let mut analyses = Vec::new();
    for req in &cfg.analysis {
        match req {
            AnalysisRequest::Msd { fit_window, dt } => {
                let m = traj_manifest.as_ref().expect("manifest loaded");
                if let Some(dt) = dt {
                    if *dt != m.dynamics.dt {
                        return Err(CliError::Config(format!(
                            "msd request expects dt = {dt}, trajectories were run with dt = {}",
                            m.dynamics.dt
                        )));
                    }
                }
                let trajs = &loaded.as_ref().expect("trajectories loaded").trajectories;
                let Some(first) = trajs.first() else {
                    return Err(CliError::Runtime("no usable trajectories for msd".into()));
                };
                let paths = trajs.iter().map(|t| t.path(TAGGED)).collect::<loggas::Result<Vec<_>>>()?;
                if trajs.iter().any(|t| t.times != first.times) {
                    return Err(CliError::from(loggas::Error::InhomogeneousGrid));
                }
                let series = msd_samples(&first.times, &paths, &first.times)?.series();
                let window = match fit_window {
                    Some([a, b]) => (*a, *b),
                    None => default_fit_window(m.dynamics.t_max),
                };
                let exponent = scaling_exponent(&series, window)?;
                let file = output_name("msd", counts[0], "csv");
                let exponent_file = output_name("exponent", counts[0], "json");
                counts[0] += 1;
                write_msd_csv(&dir.join(&file), &series)?;
                io::write_json(&dir.join(&exponent_file), &exponent)?;
                analyses.push(AnalysisResult::Msd {
                    file,
                    exponent_file,
                    ensemble_size: series.ensemble_size,
                    fit_window: [window.0, window.1],
                    exponent,
                });
            }
            AnalysisRequest::NumberVariance { radii, snapshot } => {
                let profile = number_variance_profile(pick(*snapshot), radii);
                let file = output_name("variance_profile", counts[1], "csv");
                counts[1] += 1;
                write_profile_csv(&dir.join(&file), &profile)?;
                analyses.push(AnalysisResult::NumberVariance { file, snapshot: *snapshot, profile });
            }
            AnalysisRequest::VariationalBound { trial, coordinate, eps, snapshot } => {
                let bound = variational_bound(trial, *coordinate, pick(*snapshot), *eps)?;
                let file = output_name("variational_bound", counts[2], "json");
                counts[2] += 1;
                io::write_json(&dir.join(&file), &bound)?;
                analyses.push(AnalysisResult::VariationalBound {
                    file,
                    snapshot: *snapshot,
                    trial: *trial,
                    coordinate: *coordinate,
                    eps: *eps,
                    bound,
                });
            }
        }
    }
    let summary = Summary {
        tool_version: TOOL_VERSION.into(),
        field: cfg.field,
        base_seed: cfg.seed,
        ensemble_size: cfg.ensemble_size,
        seed_rule: SEED_RULE.into(),
        dynamics: cfg.dynamics,
        ensemble_samples: ens_manifest.map(|m| m.samples.len()),
        trajectories: loaded.map(|l| l.usage),
        note: NOTE.into(),
        analyses,
    };
    io::write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PalmCurveEntry {
    pub index: usize,
    pub file: String,
    pub final_log_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PalmManifest {
    pub tool_version: String,
    pub x: Vec<[f64; 2]>,
    pub y: Vec<[f64; 2]>,
    pub radii: Vec<f64>,
    pub curves: Vec<PalmCurveEntry>,
}

/// Truncated Palm log-density ratios over increasing radii, one CSV per sample.
pub fn cmd_palm(cfg: &ExperimentConfig) -> Result<PalmManifest, CliError> {
    let palm = cfg.palm.as_ref().ok_or_else(|| CliError::Config("palm: section missing".into()))?;
    let (_, configs) = load_or_sample(cfg)?;
    let to_pts = |v: &[[f64; 2]]| v.iter().map(|&[a, b]| Point::new(a, b)).collect::<Vec<_>>();
    let (x, y) = (to_pts(&palm.x), to_pts(&palm.y));
    let dir = Layout::new(cfg).palm();
    create_dir(&dir)?;
    let mut curves = Vec::new();
    for (k, c) in configs.iter().enumerate() {
        let curve = palm_stabilization(&x, &y, c.points(), &palm.radii)?;
        let file = format!("curve_{k:04}.csv");
        io::write_palm_curve(&dir.join(&file), &curve)?;
        curves.push(PalmCurveEntry { index: k, file, final_log_ratio: curve.last().map_or(0.0, |c| c.1) });
    }
    let manifest = PalmManifest {
        tool_version: TOOL_VERSION.into(),
        x: palm.x.clone(),
        y: palm.y.clone(),
        radii: palm.radii.clone(),
        curves,
    };
    io::write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Runs `f` on a dedicated pool of `threads` workers (all cores when `None`).
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        b = b.num_threads(t);
    }
    let pool = b.build().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(pool.install(f))
}
