//! Experiment configuration.
//!
//! ```json
//! {
//!   "command": "fernique",
//!   "seed": 7,
//!   "output": "out/fernique",
//!   "inputs": { "law": "two_atom_law.json", "measure": "half_half.json" },
//!   "parameters": { "norm": "euclidean" }
//! }
//! ```
//!
//! Input paths are relative to the config file. `--set a.b=v` overrides a
//! dotted key; `v` is read as JSON when it parses, else as a string.

use crate::{CliError, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Fernique,
    Tensorize,
    Chaining,
    Compare,
    Strassen,
    Identity,
    Sample,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fernique => "fernique",
            Command::Tensorize => "tensorize",
            Command::Chaining => "chaining",
            Command::Compare => "compare",
            Command::Strassen => "strassen",
            Command::Identity => "identity",
            Command::Sample => "sample",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub inputs: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    /// Directory that relative input paths refer to.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    /// Reads `path` (if given), applies `key=value` overrides and checks
    /// that the command matches.
    pub fn load(path: Option<&Path>, overrides: &[String], command: Command) -> Result<Self> {
        let (mut value, base_dir) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::InputMissing { path: p.to_path_buf(), reason: e.to_string() })?;
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| CliError::ConfigParse(format!("{}: {e}", p.display())))?;
                (v, p.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (Value::Object(Map::new()), PathBuf::from(".")),
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let mut cfg: ExperimentConfig =
            serde_json::from_value(value).map_err(|e| CliError::ConfigParse(e.to_string()))?;
        cfg.base_dir = base_dir;
        match cfg.command {
            Some(c) if c != command => {
                return Err(CliError::ConfigParse(format!(
                    "config is for `{}` but `{}` was requested",
                    c.name(),
                    command.name()
                )))
            }
            _ => cfg.command = Some(command),
        }
        if cfg.seed.is_none() {
            return Err(CliError::ConfigParse("a seed is required (set `seed` or pass --set seed=N)".into()));
        }
        if cfg.output.is_none() {
            return Err(CliError::ConfigParse("an output directory is required (`output`)".into()));
        }
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("checked on load")
    }

    pub fn output_dir(&self) -> &Path {
        self.output.as_deref().expect("checked on load")
    }

    pub fn input_path(&self, key: &str) -> Option<PathBuf> {
        self.inputs.get(key).map(|p| if p.is_absolute() { p.clone() } else { self.base_dir.join(p) })
    }

    /// Parses the named input file.
    pub fn read_input<T: DeserializeOwned>(&self, key: &str) -> Result<T> {
        let path = self
            .input_path(key)
            .ok_or_else(|| CliError::ConfigParse(format!("missing input `{key}`")))?;
        self.read_path(&path)
    }

    pub fn read_optional<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.input_path(key) {
            Some(p) => self.read_path(&p).map(Some),
            None => Ok(None),
        }
    }

    fn read_path<T: DeserializeOwned>(&self, path: &Path) -> Result<T> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::InputMissing { path: path.to_path_buf(), reason: e.to_string() })?;
        serde_json::from_str(&text).map_err(|e| CliError::InputMissing { path: path.to_path_buf(), reason: e.to_string() })
    }

    /// Typed command parameters; unknown keys are rejected.
    pub fn parameters<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(Value::Object(self.parameters.clone()))
            .map_err(|e| CliError::ConfigParse(format!("parameters: {e}")))
    }
}

fn apply_override(root: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::ConfigParse(format!("override `{spec}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::ConfigParse(format!("bad key `{key}`")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::ConfigParse(format!("`{key}` crosses a non-object")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    node.as_object_mut()
        .ok_or_else(|| CliError::ConfigParse(format!("`{key}` crosses a non-object")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
