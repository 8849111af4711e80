//! Layered run configuration.
//!
//! A `--config` file is a strict JSON document with one optional section per
//! subcommand; unknown keys are rejected by name. Values resolve as
//! defaults, then file, then flags, and each command writes what it actually
//! ran under to `<out>/resolved_config.json`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use shapespace::fit::FitConfig;
use shapespace::synth::{LatentFactor, SynthSpec};

use crate::{CliError, CliResult};

/// Top-level `--config` schema.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub synth: Option<SynthSection>,
    pub train: Option<TrainSection>,
    pub fit: Option<FitSection>,
    pub evaluate: Option<EvaluateSection>,
}

/// `synth` section: the corpus recipe with every field optional.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub base_rows: Option<usize>,
    pub base_cols: Option<usize>,
    pub levels: Option<usize>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub noise_stddev_mm: Option<f64>,
    /// Latent bump factors; only expressible here, not as flags.
    pub factors: Option<Vec<LatentFactor>>,
}

impl SynthSection {
    /// Overlay this section onto `spec`.
    pub fn apply(&self, spec: &mut SynthSpec) {
        if let Some(v) = self.base_rows {
            spec.base_rows = v;
        }
        if let Some(v) = self.base_cols {
            spec.base_cols = v;
        }
        if let Some(v) = self.levels {
            spec.levels = v;
        }
        if let Some(v) = self.count {
            spec.count = v;
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = self.noise_stddev_mm {
            spec.noise_stddev_mm = v;
        }
        if let Some(v) = &self.factors {
            spec.factors = v.clone();
        }
    }
}

/// `train` section.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    /// "global" or "local".
    pub model: Option<String>,
    /// Retained mode count for global models.
    pub modes: Option<usize>,
    pub gpa_iterations: Option<usize>,
    pub gpa_tolerance: Option<f64>,
}

/// `fit` section, mirroring the fitter hyperparameters.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    pub tau: Option<f64>,
    pub c: Option<f64>,
    pub max_iterations: Option<usize>,
    pub samples_per_parameter: Option<usize>,
    pub max_level: Option<usize>,
    pub tolerance: Option<f64>,
}

impl FitSection {
    pub fn apply(&self, config: &mut FitConfig) {
        if let Some(v) = self.tau {
            config.tau = v;
        }
        if let Some(v) = self.c {
            config.c = v;
        }
        if let Some(v) = self.max_iterations {
            config.max_iterations = v;
        }
        if let Some(v) = self.samples_per_parameter {
            config.samples_per_parameter = v;
        }
        if let Some(v) = self.max_level {
            config.max_level = Some(v);
        }
        if let Some(v) = self.tolerance {
            config.tolerance = v;
        }
    }

    /// The resolved values, for the config echo.
    pub fn resolved(config: &FitConfig) -> FitSection {
        FitSection {
            tau: Some(config.tau),
            c: Some(config.c),
            max_iterations: Some(config.max_iterations),
            samples_per_parameter: Some(config.samples_per_parameter),
            max_level: config.max_level,
            tolerance: Some(config.tolerance),
        }
    }
}

/// `evaluate` section.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateSection {
    /// "global", "local", or "both".
    pub models: Option<String>,
    pub modes: Option<usize>,
    pub specificity_samples: Option<usize>,
    pub seed: Option<u64>,
    pub cross_validate: Option<bool>,
}

pub fn load(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    // serde names the offending key in its unknown-field message.
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Write `resolved_config.json` into `out_dir`.
pub fn write_resolved<T: Serialize>(out_dir: &Path, resolved: &T) -> CliResult<()> {
    write_json(&out_dir.join("resolved_config.json"), resolved)
}

/// Pretty-printed JSON with a trailing newline; key order is fixed by the
/// struct (or `BTreeMap`), so identical values give identical bytes.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Default mode count (see the training defaults), clamped to what the
/// corpus can support: `min(30, 3n - 1, T - 1)`.
pub fn default_modes(vertex_count: usize, shape_count: usize) -> usize {
    30usize
        .min(3 * vertex_count - 1)
        .min(shape_count.saturating_sub(1))
        .max(1)
}
