//! Scenario files.

use std::fs;
use std::path::{Path, PathBuf};

use rse_core::dynamics::IntegratorConfig;
use rse_core::scenario::InitialCondition;
use rse_core::{GOperator, Grid, PhysicsParams, Policy, Potential};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    /// Points per axis.
    pub n_points: usize,
    /// One length per axis.
    pub lengths: Vec<f64>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        if self.lengths.len() != self.dim {
            return Err(CliError::Config(format!(
                "grid.lengths has {} entries for dim = {}",
                self.lengths.len(),
                self.dim
            )));
        }
        Ok(Grid::new(&vec![self.n_points; self.dim], &self.lengths)?)
    }

    pub fn of(grid: &Grid) -> Self {
        Self {
            dim: grid.dim(),
            n_points: grid.axis(0).n,
            lengths: grid.axes().iter().map(|a| a.length).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSpec {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "default_lambda")]
    pub lambda_c: f64,
    #[serde(default = "no_potential")]
    pub potential: Potential,
}

fn one() -> f64 {
    1.0
}

fn default_lambda() -> f64 {
    0.1
}

fn no_potential() -> Potential {
    Potential::None
}

impl Default for PhysicsSpec {
    fn default() -> Self {
        Self::from(PhysicsParams::default())
    }
}

impl From<PhysicsParams> for PhysicsSpec {
    fn from(p: PhysicsParams) -> Self {
        Self {
            hbar: p.hbar,
            mass: p.mass,
            lambda_c: p.lambda_c,
            potential: p.potential,
        }
    }
}

impl PhysicsSpec {
    pub fn params(&self) -> PhysicsParams {
        PhysicsParams {
            hbar: self.hbar,
            mass: self.mass,
            lambda_c: self.lambda_c,
            potential: self.potential.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    #[default]
    Modified,
    Linear,
    Splitstep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_save_every")]
    pub save_every: usize,
    #[serde(default = "default_rho_floor")]
    pub rho_floor: f64,
    #[serde(default = "default_cfl")]
    pub cfl_constant: f64,
}

fn default_save_every() -> usize {
    1
}

fn default_rho_floor() -> f64 {
    1e-12
}

fn default_cfl() -> f64 {
    0.1
}

impl IntegratorSpec {
    pub fn config(&self) -> IntegratorConfig {
        let mut c = IntegratorConfig::new(self.dt, self.t_final);
        c.save_every = self.save_every;
        c.rho_floor = self.rho_floor;
        c.cfl_constant = self.cfl_constant;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub snapshots: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("rse-out")
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            snapshots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub grid: GridSpec,
    #[serde(default)]
    pub physics: PhysicsSpec,
    #[serde(default)]
    pub mode: RunMode,
    pub initial: InitialCondition,
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub g_policy: Policy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("config field `{path}`: {}", e.inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every precondition that does not need the initial state.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.build()?;
        self.physics.params().validate()?;
        self.operator(&grid)?;
        let ic = self.integrator.config();
        ic.validate()?;
        ic.check_cfl(&grid, &self.physics.params())?;
        if let Potential::Tabulated { values } = &self.physics.potential {
            grid.check(values.len())?;
        }
        Ok(())
    }

    pub fn operator(&self, grid: &Grid) -> Result<GOperator> {
        Ok(GOperator::new(grid, self.physics.lambda_c, self.g_policy)?)
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ScenarioConfig::from_json(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
