//! JSON run configuration shared by the command-line front end.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::SimConfig;
use crate::model::{standard_tranches, Contract, LossSpec, ModelParams, Tranche};

/// Tranche selection: the named standard set, or explicit
/// attachment/detachment pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrancheSet {
    Named(String),
    List(Vec<Tranche>),
}

impl Default for TrancheSet {
    fn default() -> Self {
        TrancheSet::Named("standard".into())
    }
}

impl TrancheSet {
    pub fn resolve(&self) -> Result<Vec<Tranche>> {
        match self {
            TrancheSet::Named(name) if name == "standard" => Ok(standard_tranches()),
            TrancheSet::Named(name) => {
                Err(Error::Config(format!("unknown tranche preset {name:?}; expected \"standard\"")))
            }
            TrancheSet::List(list) => Ok(list.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSettings {
    #[serde(default = "default_paths")]
    pub paths: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_chunk_size")]
    pub chunk_size: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { paths: default_paths(), seed: default_seed(), chunk_size: default_chunk_size() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    #[default]
    Csv,
    Tsv,
}

impl FileFormat {
    pub fn delimiter(&self) -> char {
        match self {
            FileFormat::Csv => ',',
            FileFormat::Tsv => '\t',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSettings {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: FileFormat,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { dir: default_out_dir(), format: FileFormat::default() }
    }
}

/// Full run configuration. Every field has a default, so `{}` is a valid
/// document describing the standard calm-market setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_model")]
    pub model: ModelParams,
    /// Number of names in the reference portfolio. Descriptive metadata
    /// only: the loss process is continuous, so nothing downstream
    /// consumes it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_components: Option<u32>,
    /// Altered simulation measure; defaults to the real one when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altered: Option<ModelParams>,
    #[serde(default = "default_contract")]
    pub contract: Contract,
    #[serde(default)]
    pub tranches: TrancheSet,
    #[serde(default)]
    pub loss_spec: LossSpec,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: default_model(),
            n_components: None,
            altered: None,
            contract: default_contract(),
            tranches: TrancheSet::default(),
            loss_spec: LossSpec::default(),
            mc: McSettings::default(),
            output: OutputSettings::default(),
        }
    }
}

fn default_model() -> ModelParams {
    ModelParams::new(0.05, 10.0).expect("default model")
}

fn default_contract() -> Contract {
    Contract::new(5.0, 0.0, 4).expect("default contract")
}

fn default_paths() -> u64 {
    1_000_000
}

fn default_seed() -> u64 {
    42
}

fn default_chunk_size() -> u64 {
    65_536
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// Parse a JSON document; parse errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization")
    }

    /// Altered measure, defaulting to the real one.
    pub fn altered_or_real(&self) -> ModelParams {
        self.altered.unwrap_or(self.model)
    }

    /// Assemble the simulation request described by this configuration.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let cfg = SimConfig {
            n_paths: self.mc.paths,
            seed: self.mc.seed,
            chunk_size: self.mc.chunk_size,
            real: self.model,
            altered: self.altered_or_real(),
            contract: self.contract,
            tranches: self.tranches.resolve()?,
            loss_spec: self.loss_spec,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
