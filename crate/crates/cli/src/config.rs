//! Experiment configuration, read from TOML. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use loggas::dynamics::{DriftKind, DriftSpec, SimulationParams};
use loggas::model::{Point, Truncation, Window};
use loggas::observables::TrialFunction;
use loggas::pointfield::{GibbsPotential, GibbsProposals, PairPotential};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base seed; replica `k` uses `split_seed(seed, k)`.
    pub seed: u64,
    #[serde(default)]
    pub ensemble_size: usize,
    pub output_dir: PathBuf,
    pub field: FieldConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsConfig>,
    #[serde(default)]
    pub analysis: Vec<AnalysisRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub palm: Option<PalmConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowConfig {
    Disk {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Rectangle {
        width: f64,
        height: f64,
        #[serde(default)]
        center: [f64; 2],
    },
}

impl WindowConfig {
    pub fn window(&self) -> Window<f64> {
        match *self {
            Self::Disk { radius, center } => Window::disk(radius).translate(Point::new(center[0], center[1])),
            Self::Rectangle { width, height, center } => {
                Window::rectangle(width, height, Point::new(center[0], center[1]))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    HardCore { radius: f64 },
    Gaussian { amplitude: f64, range: f64 },
}

impl From<PotentialConfig> for PairPotential {
    fn from(p: PotentialConfig) -> Self {
        match p {
            PotentialConfig::Zero => PairPotential::Zero,
            PotentialConfig::HardCore { radius } => PairPotential::HardCore { radius },
            PotentialConfig::Gaussian { amplitude, range } => PairPotential::Gaussian { amplitude, range },
        }
    }
}

fn default_sweeps() -> usize {
    200
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    Ginibre {
        n: usize,
    },
    Poisson {
        intensity: f64,
        window: WindowConfig,
    },
    Gibbs {
        potential: PotentialConfig,
        beta: f64,
        activity: f64,
        window: WindowConfig,
        #[serde(default = "default_sweeps")]
        sweeps: usize,
        #[serde(default)]
        proposals: ProposalConfig,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProposalConfig {
    pub move_prob: f64,
    pub birth_prob: f64,
    pub death_prob: f64,
    pub move_step: f64,
}

impl Default for ProposalConfig {
    fn default() -> Self {
        let d = GibbsProposals::default();
        Self { move_prob: d.move_prob, birth_prob: d.birth_prob, death_prob: d.death_prob, move_step: d.move_step }
    }
}

impl From<ProposalConfig> for GibbsProposals {
    fn from(p: ProposalConfig) -> Self {
        GibbsProposals { move_prob: p.move_prob, birth_prob: p.birth_prob, death_prob: p.death_prob, move_step: p.move_step }
    }
}

impl FieldConfig {
    pub fn gibbs_potential(&self) -> Option<GibbsPotential> {
        match *self {
            Self::Gibbs { potential, beta, activity, .. } => Some(GibbsPotential { pair: potential.into(), beta, activity }),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftConfig {
    CoulombConfined,
    Free,
    GibbsGradient { potential: PotentialConfig, beta: f64 },
}

fn default_truncation() -> Truncation<f64> {
    Truncation::All
}

fn default_noise() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub drift: DriftConfig,
    #[serde(default = "default_truncation")]
    pub truncation: Truncation<f64>,
    /// Defaults to 1 for Coulomb drift and 0 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confinement: Option<f64>,
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "one")]
    pub thin: usize,
    #[serde(default = "default_noise")]
    pub noise: f64,
    /// Parallelise the force loop inside each replica.
    #[serde(default)]
    pub parallel: bool,
}

fn one() -> usize {
    1
}

impl DynamicsConfig {
    pub fn drift_spec(&self) -> DriftSpec<f64> {
        let base = match self.drift {
            DriftConfig::CoulombConfined => DriftSpec::coulomb_confined(),
            DriftConfig::Free => DriftSpec::free(),
            DriftConfig::GibbsGradient { potential, beta } => DriftSpec::gibbs_gradient(potential.into(), beta),
        };
        let base = base.with_truncation(self.truncation);
        match self.confinement {
            Some(c) => base.with_confinement(c),
            None => base,
        }
    }

    pub fn params(&self, seed: u64) -> SimulationParams<f64> {
        let mut p = SimulationParams::new(self.t_max, self.dt, self.thin, seed);
        p.noise = self.noise;
        p.parallel = self.parallel;
        p
    }

    pub fn drift_kind(&self) -> DriftKind {
        self.drift_spec().kind
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Snapshot {
    /// The sampled ensemble.
    #[default]
    Initial,
    /// The last frame of every complete trajectory.
    Final,
}

fn default_eps() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalysisRequest {
    /// MSD of the tagged particle at every stored frame, plus its exponent.
    Msd {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fit_window: Option<[f64; 2]>,
        /// Expected time step; must agree with the trajectory manifest.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dt: Option<f64>,
    },
    NumberVariance {
        radii: Vec<f64>,
        #[serde(default)]
        snapshot: Snapshot,
    },
    VariationalBound {
        trial: TrialFunction<f64>,
        coordinate: usize,
        #[serde(default = "default_eps")]
        eps: f64,
        #[serde(default)]
        snapshot: Snapshot,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PalmConfig {
    pub x: Vec<[f64; 2]>,
    pub y: Vec<[f64; 2]>,
    pub radii: Vec<f64>,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Field-level checks beyond the schema.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.field {
            FieldConfig::Ginibre { n } if n == 0 => return Err(invalid("field.n", "must be >= 1")),
            FieldConfig::Poisson { intensity, window } => {
                if !(intensity > 0.0) {
                    return Err(invalid("field.intensity", "must be > 0"));
                }
                window.window().validate().map_err(|e| invalid("field.window", e))?;
            }
            FieldConfig::Gibbs { window, sweeps, proposals, .. } => {
                self.field.gibbs_potential().expect("gibbs").validate().map_err(|e| invalid("field", e))?;
                window.window().validate().map_err(|e| invalid("field.window", e))?;
                if sweeps == 0 {
                    return Err(invalid("field.sweeps", "must be >= 1"));
                }
                let s = proposals.move_prob + proposals.birth_prob + proposals.death_prob;
                if (s - 1.0).abs() > 1e-12 || proposals.move_step <= 0.0 {
                    return Err(invalid("field.proposals", "probabilities must sum to 1 and move_step be > 0"));
                }
            }
            _ => {}
        }
        if let Some(d) = &self.dynamics {
            if !(d.dt > 0.0) || !(d.t_max >= d.dt) {
                return Err(invalid("dynamics", "need t_max >= dt > 0"));
            }
            if d.thin == 0 {
                return Err(invalid("dynamics.thin", "must be >= 1"));
            }
            if !(d.noise >= 0.0) {
                return Err(invalid("dynamics.noise", "must be >= 0"));
            }
            d.drift_spec().validate().map_err(|e| invalid("dynamics", e))?;
        }
        for (i, a) in self.analysis.iter().enumerate() {
            let field = format!("analysis[{i}]");
            match a {
                AnalysisRequest::Msd { fit_window, .. } => {
                    if self.dynamics.is_none() {
                        return Err(invalid(&field, "msd needs a [dynamics] section"));
                    }
                    if let Some([lo, hi]) = fit_window {
                        if !(lo < hi) {
                            return Err(invalid(&field, "fit_window must be increasing"));
                        }
                    }
                }
                AnalysisRequest::NumberVariance { radii, snapshot } => {
                    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
                        return Err(invalid(&field, "radii must be positive"));
                    }
                    if *snapshot == Snapshot::Final && self.dynamics.is_none() {
                        return Err(invalid(&field, "final snapshot needs a [dynamics] section"));
                    }
                }
                AnalysisRequest::VariationalBound { trial, coordinate, eps, snapshot } => {
                    trial.validate().map_err(|e| invalid(&field, e))?;
                    if *coordinate > 1 || !(*eps > 0.0) {
                        return Err(invalid(&field, "coordinate must be 0 or 1 and eps > 0"));
                    }
                    if *snapshot == Snapshot::Final && self.dynamics.is_none() {
                        return Err(invalid(&field, "final snapshot needs a [dynamics] section"));
                    }
                }
            }
        }
        if let Some(p) = &self.palm {
            if p.x.is_empty() || p.x.len() != p.y.len() {
                return Err(invalid("palm", "x and y need the same positive length"));
            }
            if p.radii.is_empty() || p.radii.iter().any(|r| !(*r > 0.0)) {
                return Err(invalid("palm.radii", "must be positive"));
            }
        }
        Ok(())
    }
}
