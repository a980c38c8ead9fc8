//! Run configuration: one JSON document, dot-path overrides, validation.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use xtunnel::experiments::{
    Case1Options, Case3Options, DistanceOptions, GridRule, HfOptions, KernelRule, ModelConfig, Observable,
    OracleOptions, OscillatorOverlapParams, ScanParameter, ScanSpec,
};
use xtunnel::potentials::{PhysicsParams, PotentialSpec};

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Standard output when unset.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub parameter: ScanParameter,
    pub values: Vec<f64>,
    pub observable: Observable,
}

fn six() -> usize {
    6
}

/// Per-pipeline settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Number of eigenvalues reported by `spectrum`.
    #[serde(default = "six")]
    pub count: usize,
    /// Energy for `wkb`; the instanton action of a double well when unset.
    #[serde(default)]
    pub energy: Option<f64>,
    #[serde(default)]
    pub bracket: Option<(f64, f64)>,
    #[serde(default)]
    pub distance: DistanceOptions,
    #[serde(default)]
    pub case1: Case1Options,
    #[serde(default)]
    pub case2: Option<OscillatorOverlapParams>,
    #[serde(default)]
    pub case3: Case3Options,
    #[serde(default)]
    pub hf: HfOptions,
    #[serde(default)]
    pub oracle: OracleOptions,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            count: six(),
            energy: None,
            bracket: None,
            distance: DistanceOptions::default(),
            case1: Case1Options::default(),
            case2: None,
            case3: Case3Options::default(),
            hf: HfOptions::default(),
            oracle: OracleOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub physics: PhysicsParams,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub grid: GridRule,
    #[serde(default)]
    pub kernel: KernelRule,
    #[serde(default)]
    pub psi2_index: Option<usize>,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub options: Options,
}

impl RunConfig {
    /// Parses `text`, applies `key=value` overrides and validates the result.
    pub fn load(text: &str, overrides: &[String]) -> Result<RunConfig, CliError> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != CONFIG_VERSION {
            return Err(CliError::Config(format!("unsupported version {}, expected {CONFIG_VERSION}", self.version)));
        }
        self.model().validate()?;
        if self.options.count == 0 {
            return Err(CliError::Config("options.count must be at least 1".into()));
        }
        if let Some(c) = &self.options.case2 {
            c.validate()?;
        }
        Ok(())
    }

    pub fn model(&self) -> ModelConfig {
        ModelConfig {
            physics: self.physics,
            potential: self.potential,
            grid: self.grid,
            kernel: self.kernel,
            psi2_index: self.psi2_index,
        }
    }

    pub fn scan_spec(&self) -> Result<ScanSpec, CliError> {
        let s = self.scan.as_ref().ok_or_else(|| CliError::Config("missing field `scan`".into()))?;
        Ok(ScanSpec { parameter: s.parameter, values: s.values.clone(), observable: s.observable, base: self.model() })
    }
}

/// Sets the value at a dot path, creating objects on the way. The value is
/// read as JSON when it parses, as a string otherwise.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), CliError> {
    let bad = |why: &str| CliError::Override(spec.to_string(), why.to_string());
    let (path, raw) = spec.split_once('=').ok_or_else(|| bad("expected key=value"))?;
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(bad("empty key segment"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let segments: Vec<&str> = path.split('.').collect();
    for (k, seg) in segments.iter().enumerate() {
        let last = k + 1 == segments.len();
        node = match node {
            Value::Array(items) => {
                let i: usize = seg.parse().map_err(|_| bad("array index expected"))?;
                items.get_mut(i).ok_or_else(|| bad("array index out of range"))?
            }
            Value::Object(map) => map.entry(seg.to_string()).or_insert(Value::Null),
            other => {
                *other = Value::Object(Default::default());
                other.as_object_mut().map(|m| m.entry(seg.to_string()).or_insert(Value::Null)).ok_or_else(|| bad("not an object"))?
            }
        };
        if last {
            *node = value;
            return Ok(());
        }
    }
    Ok(())
}
