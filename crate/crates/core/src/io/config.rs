use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flows::FlowSpec;
use crate::grid::Grid;
use crate::operators::{MollifierParams, PhysicalParams};
use crate::timestepper::WindowConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Modes per axis; even, at least 4.
    pub n: usize,
    /// Box edge L.
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: 32, length: 2.0 * PI }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Write a checkpoint every this many windows; 0 disables checkpoints.
    pub checkpoint_every: usize,
    /// File name of the diagnostics CSV inside `directory`.
    pub diagnostics_file: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("output"),
            checkpoint_every: 1,
            diagnostics_file: "diagnostics.csv".to_string(),
        }
    }
}

impl OutputConfig {
    pub fn diagnostics_path(&self) -> PathBuf {
        self.directory.join(&self.diagnostics_file)
    }

    pub fn checkpoint_path(&self, window: usize) -> PathBuf {
        self.directory.join(checkpoint_file_name(window))
    }
}

/// `checkpoint_{window:06}.msns`
pub fn checkpoint_file_name(window: usize) -> String {
    format!("checkpoint_{window:06}.msns")
}

/// Settings of the `probe-operators` subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub seed: u64,
    pub count: usize,
    /// Operator time argument.
    pub t: f64,
    /// Band of |γ|² carrying random coefficients.
    pub k2_min: f64,
    pub k2_max: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            seed: 0,
            count: 100,
            t: 1e-2,
            k2_min: 1.0,
            k2_max: 100.0,
        }
    }
}

/// Settings of the `validate` subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    /// Largest accepted sup error against the exact solutions.
    pub tolerance: f64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { tolerance: 1e-3 }
    }
}

/// Everything a run needs. Every key has a default, so an empty file is a
/// valid configuration; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// March horizon T.
    pub horizon: f64,
    pub grid: GridConfig,
    pub physics: PhysicalParams,
    pub mollifier: MollifierParams,
    pub window: WindowConfig,
    pub flow: FlowSpec,
    pub output: OutputConfig,
    pub probe: ProbeConfig,
    pub validate: ValidateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            horizon: 1.0,
            grid: GridConfig::default(),
            physics: PhysicalParams::default(),
            mollifier: MollifierParams::default(),
            window: WindowConfig::default(),
            flow: FlowSpec::default(),
            output: OutputConfig::default(),
            probe: ProbeConfig::default(),
            validate: ValidateConfig::default(),
        }
    }
}

fn positive(out: &mut Vec<String>, path: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        out.push(format!("{path}: must be > 0 (got {v})"));
    }
}

impl RunConfig {
    /// Every violated invariant, each naming its field path.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.grid.n;
        if n < 4 || !n.is_multiple_of(2) {
            out.push(format!("grid.n: must be even and at least 4 (got {n})"));
        }
        positive(&mut out, "grid.length", self.grid.length);
        let nu = self.physics.nu;
        if !(nu.is_finite() && nu >= 0.0) {
            out.push(format!("physics.nu: must be finite and >= 0 (got {nu})"));
        }
        let e = self.mollifier.epsilon;
        if !(e.is_finite() && e > 0.0 && e < 1.0) {
            out.push(format!("mollifier.epsilon: must lie in (0, 1) (got {e})"));
        }
        out.extend(self.window.violations("window"));
        out.extend(self.flow.violations("flow"));
        positive(&mut out, "horizon", self.horizon);
        if self.horizon.is_finite() && self.window.delta_t > 0.0 && self.horizon < self.window.delta_t {
            out.push(format!(
                "horizon: must be at least window.delta_t = {} (got {})",
                self.window.delta_t, self.horizon
            ));
        }
        if self.output.diagnostics_file.trim().is_empty() {
            out.push("output.diagnostics_file: must not be empty".to_string());
        }
        if self.probe.count == 0 {
            out.push("probe.count: must be >= 1".to_string());
        }
        if !(self.probe.t.is_finite() && self.probe.t >= 0.0) {
            out.push(format!("probe.t: must be >= 0 (got {})", self.probe.t));
        }
        if !(self.probe.k2_min >= 0.0 && self.probe.k2_max >= self.probe.k2_min) {
            out.push(format!(
                "probe.k2_max: must be >= probe.k2_min >= 0 (got [{}, {}])",
                self.probe.k2_min, self.probe.k2_max
            ));
        }
        positive(&mut out, "validate.tolerance", self.validate.tolerance);
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.length)
    }

    /// Stable 64-bit fingerprint of everything that affects the computed
    /// trajectory: the first eight bytes (little-endian) of the SHA-256 of
    /// the canonical TOML rendering with the output section reset.
    pub fn hash(&self) -> u64 {
        let mut physics_only = self.clone();
        physics_only.output = OutputConfig::default();
        let canonical = toml::to_string(&physics_only).expect("configuration always serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }
}

/// Parses a configuration from TOML text and validates it.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

pub fn config_hash(config: &RunConfig) -> u64 {
    config.hash()
}
