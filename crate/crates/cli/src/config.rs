//! Run configuration: a TOML document mirroring the solver inputs.
//!
//! Unknown keys are rejected everywhere so a misspelt parameter cannot
//! silently fall back to a default.

use std::path::{Path, PathBuf};

use cournot_mfg::spi::constant_policy;
use cournot_mfg::{
    build_grid, initial_density, BumpSpec, DiffusionProfile, GridSpec, LearningSchedule, ModelParams,
    PriceModel, SpaceTimeField, SpiConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::RunError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub initial: BumpConfig,
    #[serde(default)]
    pub terminal: TerminalConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Recorded in the manifest; the solver itself is deterministic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub horizon: f64,
    pub space_cells: usize,
    pub time_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub discount: f64,
    pub linear_cost: f64,
    pub quadratic_cost: f64,
    pub diffusion: DiffusionConfig,
    pub price: PriceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiffusionConfig {
    Constant { sigma: f64 },
    Geometric { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PriceConfig {
    Linear { wealth: f64, growth: f64, substitute_price: f64 },
    Ces { wealth: f64, growth: f64, elasticity: f64, substitution: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub center: f64,
    pub rate: f64,
    pub floor: f64,
}

/// Terminal value `u_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TerminalConfig {
    #[default]
    Zero,
    /// `u_T(x) = slope · min(x, knee)`: zero at the origin, nondecreasing,
    /// flat past the knee.
    Ramp { slope: f64, knee: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPolicy {
    #[default]
    Zero,
    Cap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub max_iters: usize,
    pub exploitability_every: usize,
    pub beta: u32,
    #[serde(default)]
    pub initial_policy: InitialPolicy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SpiConfig::<f64>::default();
        Self {
            epsilon: d.epsilon,
            max_iters: d.max_iters,
            exploitability_every: d.exploitability_every,
            beta: d.schedule.beta,
            initial_policy: InitialPolicy::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub fields: bool,
    pub series: bool,
    pub convergence: bool,
    pub plots: bool,
    /// Time indices exported for U and M; empty means five evenly spaced.
    #[serde(default)]
    pub field_times: Vec<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            fields: true,
            series: true,
            convergence: true,
            plots: false,
            field_times: Vec::new(),
        }
    }
}

/// Domain objects built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: GridSpec<f64>,
    pub params: ModelParams<f64>,
    pub m0: Vec<f64>,
    pub terminal: Vec<f64>,
    pub q0: SpaceTimeField<f64>,
    pub spi: SpiConfig<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            RunError::Config(msg) => RunError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Validates the configuration and builds every solver input.
    pub fn build(&self) -> Result<Problem, RunError> {
        let g = &self.grid;
        let grid = build_grid(g.length, g.horizon, g.space_cells, g.time_steps)?;
        let m = &self.model;
        let diffusion = match m.diffusion {
            DiffusionConfig::Constant { sigma } => DiffusionProfile::Constant { sigma },
            DiffusionConfig::Geometric { sigma } => DiffusionProfile::Geometric { sigma },
        };
        let price = match m.price {
            PriceConfig::Linear { wealth, growth, substitute_price } => {
                PriceModel::Linear { wealth, growth, substitute_price }
            }
            PriceConfig::Ces { wealth, growth, elasticity, substitution } => {
                PriceModel::Ces { wealth, growth, elasticity, substitution }
            }
        };
        let params = ModelParams::new(m.discount, m.linear_cost, m.quadratic_cost, diffusion, price, g.horizon)?;
        let bump = BumpSpec { center: self.initial.center, rate: self.initial.rate, floor: self.initial.floor };
        let m0 = initial_density(&bump, &params, &grid)?;
        let terminal = match self.terminal {
            TerminalConfig::Zero => vec![0.0; grid.row_len()],
            TerminalConfig::Ramp { slope, knee } => {
                if !(slope >= 0.0 && knee > 0.0 && knee < g.length) {
                    return Err(RunError::Config(
                        "ramp terminal value needs slope >= 0 and 0 < knee < length".into(),
                    ));
                }
                (0..grid.row_len()).map(|i| slope * grid.x(i).min(knee)).collect()
            }
        };
        let q0 = match self.solver.initial_policy {
            InitialPolicy::Zero => constant_policy(&grid, 0.0),
            InitialPolicy::Cap => constant_policy(&grid, params.q_max()),
        };
        let s = &self.solver;
        let spi = SpiConfig {
            epsilon: s.epsilon,
            max_iters: s.max_iters,
            exploitability_every: s.exploitability_every,
            schedule: LearningSchedule::new(s.beta)?,
        };
        spi.validate()?;
        Ok(Problem { grid, params, m0, terminal, q0, spi })
    }
}
