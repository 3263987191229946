use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use tomokit::TomoError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or input file (exit 2).
    Config(String),
    /// A computed result broke its numerical contract (exit 3).
    Contract(String),
    /// A validation suite reported a failed invariant (exit 1).
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::Config(_) => 2,
            CliError::Contract(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Contract(m) | CliError::Invariant(m) => f.write_str(m),
        }
    }
}

impl From<TomoError> for CliError {
    fn from(e: TomoError) -> Self {
        match e {
            TomoError::Divergence { .. } | TomoError::SingularDenominator(_) | TomoError::NotDensity(_) => {
                CliError::Contract(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_config(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    if !v.is_object() {
        return Err(CliError::Config("config file must hold a JSON object".into()));
    }
    Ok(v)
}

/// Overlays the flags that were given on top of the config file values.
pub fn merge<T: Serialize + DeserializeOwned>(flags: T, file: Option<&Value>) -> CliResult<T> {
    let Some(file) = file else { return Ok(flags) };
    let mut merged: Map<String, Value> = file.as_object().cloned().unwrap_or_default();
    let given = serde_json::to_value(&flags).map_err(|e| CliError::Config(e.to_string()))?;
    for (k, v) in given.as_object().into_iter().flatten() {
        if !v.is_null() {
            merged.insert(k.clone(), v.clone());
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("config: {e}")))
}

/// Applies `TOMOKIT_THREADS` to the global thread pool.
pub fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("TOMOKIT_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("TOMOKIT_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}
