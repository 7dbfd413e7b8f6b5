//! Run configuration (TOML) shared by all command-line subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cycle::{PulseProtocol, DEFAULT_SEED};
use crate::device::{DeviceFile, DeviceSpec};
use crate::electrostatics::SolverOptions;
use crate::error::{Error, Result};
use crate::mesh::RefinementSpec;
use crate::qdot::SEARCH_TOLERANCE_MEV;
use crate::zeeman::ZeemanConfig;

/// Bias searches for alignment and onset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub bracket_v: [f64; 2],
    pub tolerance_mev: f64,
    /// Sweep points between alignment and onset used for the lever arm.
    pub lever_points: usize,
    pub max_shell: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            bracket_v: [1.5, 3.5],
            tolerance_mev: SEARCH_TOLERANCE_MEV,
            lever_points: 7,
            max_shell: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub from_v: f64,
    pub to_v: f64,
    pub steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            from_v: 2.0,
            to_v: 3.2,
            steps: 13,
        }
    }
}

impl SweepConfig {
    /// Biases of the sweep. A single step requires `from_v == to_v`.
    pub fn biases(&self) -> Result<Vec<f64>> {
        match self.steps {
            0 => Err(Error::Config("sweep steps must be at least 1".into())),
            1 if self.from_v == self.to_v => Ok(vec![self.from_v]),
            1 => Err(Error::Config("a single-step sweep needs from == to".into())),
            n if self.from_v < self.to_v => Ok((0..n)
                .map(|k| self.from_v + (self.to_v - self.from_v) * k as f64 / (n - 1) as f64)
                .collect()),
            _ => Err(Error::Config(format!(
                "sweep range must be increasing, got {} -> {}",
                self.from_v, self.to_v
            ))),
        }
    }
}

/// Raw file contents; see [`RunConfig`] for the resolved form.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunFile {
    device_file: Option<PathBuf>,
    device: Option<DeviceSpec>,
    mesh: Option<RefinementSpec>,
    solver: SolverOptions,
    search: SearchConfig,
    sweep: SweepConfig,
    protocol: PulseProtocol,
    zeeman: ZeemanConfig,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub device: DeviceSpec,
    pub mesh: RefinementSpec,
    pub solver: SolverOptions,
    pub search: SearchConfig,
    pub sweep: SweepConfig,
    pub protocol: PulseProtocol,
    pub zeeman: ZeemanConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let file = DeviceFile::bundled_default();
        Self {
            device: file.device,
            mesh: file.mesh.unwrap_or_default(),
            solver: SolverOptions::default(),
            search: SearchConfig::default(),
            sweep: SweepConfig::default(),
            protocol: PulseProtocol::default(),
            zeeman: ZeemanConfig::default(),
            output_dir: PathBuf::from("out"),
            seed: DEFAULT_SEED,
        }
    }
}

impl RunConfig {
    /// Parses a run configuration. Relative paths resolve against `base`.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let raw: RunFile = toml::from_str(text)?;
        let (device, device_mesh) = match (raw.device_file, raw.device) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either device_file or [device], not both".into(),
                ))
            }
            (Some(path), None) => {
                let path = base.join(path);
                if !path.is_file() {
                    return Err(Error::Config(format!(
                        "device file {} does not exist",
                        path.display()
                    )));
                }
                let file = DeviceFile::load(&path)?;
                (file.device, file.mesh)
            }
            (None, Some(device)) => (device, None),
            (None, None) => {
                let file = DeviceFile::bundled_default();
                (file.device, file.mesh)
            }
        };
        let defaults = Self::default();
        let cfg = Self {
            device,
            mesh: raw.mesh.or(device_mesh).unwrap_or_default(),
            solver: raw.solver,
            search: raw.search,
            sweep: raw.sweep,
            protocol: raw.protocol,
            zeeman: raw.zeeman,
            output_dir: raw
                .output_dir
                .map(|p| base.join(p))
                .unwrap_or(defaults.output_dir),
            seed: raw.seed.unwrap_or(defaults.seed),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.mesh.validate()?;
        self.protocol.validate()?;
        self.zeeman.validate()?;
        let [lo, hi] = self.search.bracket_v;
        if !(lo < hi) {
            return Err(Error::Config("search.bracket_v must be increasing".into()));
        }
        if !(self.search.tolerance_mev > 0.0) {
            return Err(Error::Config(
                "search.tolerance_mev must be positive".into(),
            ));
        }
        if self.search.lever_points < 2 {
            return Err(Error::Config(
                "search.lever_points must be at least 2".into(),
            ));
        }
        if !(self.solver.tolerance > 0.0) || self.solver.max_iterations == 0 {
            return Err(Error::Config(
                "solver tolerance and max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}
