//! Run configuration: the JSON schema consumed by `--config`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use weylscat::herglotz::BoundarySchedule;
use weylscat::models::{MatrixData, ModelSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Forward,
    Dissipative,
    Laxphillips,
    Inverse,
    Verify,
}

/// A Weyl-side model: a bundled spec or a measure model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Spec(ModelSpec),
    File { file: PathBuf },
}

/// Contraction-side model for `inverse`: a bundled spec (its Cayley image or
/// the constant itself for `constant_w`) or a tabulated sample file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ContractionRef {
    Spec(ModelSpec),
    File { file: PathBuf },
}

/// Dissipative parameter for the coupled subcommands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DissipativeSpec {
    /// Explicit matrix, validated on load.
    Matrix { data: MatrixData },
    /// `-i I` of the model dimension.
    MinusIIdentity,
    /// Seeded random strictly dissipative matrix.
    Random { dim: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.points < 2 {
            return Err(CliError::Config("grid needs at least 2 points".into()));
        }
        if !(self.lambda_min.is_finite()
            && self.lambda_max.is_finite()
            && self.lambda_min < self.lambda_max)
        {
            return Err(CliError::Config(format!(
                "bad grid range [{}, {}]",
                self.lambda_min, self.lambda_max
            )));
        }
        Ok(())
    }

    pub fn points_vec(&self) -> Vec<f64> {
        (0..self.points)
            .map(|k| {
                self.lambda_min
                    + (self.lambda_max - self.lambda_min) * k as f64 / (self.points - 1) as f64
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative rank/PSD tolerance.
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    /// Per-row defect threshold deciding pass/fail.
    #[serde(default = "default_defect")]
    pub defect_threshold: f64,
    /// Round-trip error budget of the inverse pipeline.
    #[serde(default = "default_roundtrip")]
    pub roundtrip_threshold: f64,
}

fn default_rtol() -> f64 {
    weylscat::DEFAULT_RTOL
}
fn default_defect() -> f64 {
    1e-6
}
fn default_roundtrip() -> f64 {
    1e-3
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: default_rtol(),
            defect_threshold: default_defect(),
            roundtrip_threshold: default_roundtrip(),
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.rtol > 0.0 && self.defect_threshold > 0.0 && self.roundtrip_threshold > 0.0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    #[serde(default)]
    pub model: Option<ModelRef>,
    #[serde(default)]
    pub w_model: Option<ContractionRef>,
    #[serde(default)]
    pub d_matrix: Option<DissipativeSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Support grid of the inverse pipeline; defaults to `grid`.
    #[serde(default)]
    pub support_grid: Option<GridSpec>,
    #[serde(default)]
    pub schedule: Option<BoundarySchedule>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Where `inverse` writes the recovered model (defaults to the output
    /// path with a `.model.json` suffix).
    #[serde(default)]
    pub model_output: Option<PathBuf>,
    /// Probe vectors for the admissibility report.
    #[serde(default = "default_probes")]
    pub probe_count: usize,
}

fn default_probes() -> usize {
    8
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.tolerances.validate()?;
        if let Some(g) = &cfg.grid {
            g.validate()?;
        }
        if let Some(g) = &cfg.support_grid {
            g.validate()?;
        }
        if let Some(s) = &cfg.schedule {
            s.validate()
                .map_err(|e| CliError::Config(format!("schedule: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn schedule(&self) -> BoundarySchedule {
        self.schedule.unwrap_or_default()
    }
}

/// Tabulated contraction sample file: `{ "dim": n, "samples": [{"eta": [re, im], "w": matrix}] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionTableFile {
    pub dim: usize,
    pub samples: Vec<ContractionSample>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionSample {
    pub eta: [f64; 2],
    pub w: MatrixData,
}
