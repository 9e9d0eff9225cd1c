//! TOML run configuration.
//!
//! ```toml
//! schema_version = 1
//! output_dir = "runs/single-loop"
//!
//! [params]
//! quality = 1e4          # required; omega_m, g_m, kappa, delta, omega_c default
//!
//! [drive]
//! kind = "gaussian_train"
//! e0 = 1e4
//! t_s = 5.0
//! sigma = 0.5
//!
//! [simulation]
//! cycles = 5
//!
//! [analysis]
//! output = "photon"
//!
//! [optimizer]
//! bounds = [
//!   { name = "e0", lower = 1e3, upper = 1e6 },
//!   { name = "t_s", lower = 1.0, upper = 50.0 },
//!   { name = "sigma", lower = 0.05, upper = 5.0 },
//! ]
//! [optimizer.ga]
//! seed = 1
//!
//! [sweep.grid]
//! e0 = [1e4, 1e6, 6e6]
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use optomem_core::analysis::{AnalysisOptions, Normalization, OutputSelector, DEFAULT_STORING_EPS};
use optomem_core::integrator::IntegratorSettings;
use optomem_core::optimizer::{GaConfig, ParamBound, SearchSpace};
use optomem_core::{DriveSpec, MeanFieldState, OmParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub params: OmParams,
    pub drive: DriveSpec,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub initial: MeanFieldState,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    /// Horizon in drive periods.
    pub cycles: usize,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self { cycles: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub output: OutputSelector,
    pub normalization: Normalization,
    pub skip_cycles: usize,
    pub eps_x: f64,
    pub eps_y: f64,
    pub exclude_open: bool,
    /// Median window of the phonon plateau detector, in drive periods.
    pub jump_window: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            output: OutputSelector::Photon,
            normalization: Normalization::PerCycle,
            skip_cycles: 0,
            eps_x: DEFAULT_STORING_EPS,
            eps_y: DEFAULT_STORING_EPS,
            exclude_open: false,
            jump_window: 0.5,
        }
    }
}

impl AnalysisSection {
    pub fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            output: self.output,
            normalization: self.normalization,
            skip_cycles: self.skip_cycles,
            eps_x: self.eps_x,
            eps_y: self.eps_y,
            exclude_open: self.exclude_open,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub bounds: Vec<ParamBound>,
    pub ga: GaConfig,
}

impl OptimizerSection {
    pub fn space(&self) -> SearchSpace {
        SearchSpace {
            bounds: self.bounds.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Axis name to values; points are the Cartesian product in name order.
    pub grid: BTreeMap<String, Vec<f64>>,
}

impl RunConfig {
    /// Parses and validates a config document.
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, parses and validates a config file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Serializes back to TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run config is always representable as TOML")
    }

    /// Checks cross-section invariants.
    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.params.validate()?;
        self.drive.validate()?;
        if self.simulation.cycles < 1 {
            return Err(CliError::Validation("simulation.cycles must be >= 1".into()));
        }
        let a = &self.analysis;
        if !(a.eps_x > 0.0 && a.eps_y > 0.0) {
            return Err(CliError::Validation("analysis.eps_x and eps_y must be > 0".into()));
        }
        if !(a.jump_window > 0.0 && a.jump_window.is_finite()) {
            return Err(CliError::Validation("analysis.jump_window must be > 0".into()));
        }
        if let Some(opt) = &self.optimizer {
            opt.space().validate_for(self.drive.kind())?;
            opt.ga.validate(opt.bounds.len())?;
        }
        if let Some(sweep) = &self.sweep {
            let names = self.drive.kind().parameter_names();
            for (name, values) in &sweep.grid {
                if !names.contains(&name.as_str()) {
                    return Err(CliError::Validation(format!(
                        "sweep axis `{name}` is not a parameter of {} drives ({names:?})",
                        self.drive.kind()
                    )));
                }
                if values.is_empty() {
                    return Err(CliError::Validation(format!("sweep axis `{name}` has no values")));
                }
            }
        }
        Ok(())
    }
}
