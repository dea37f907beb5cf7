//! Flag and `--config` file merging.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "AQEC_LAB_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every subcommand.
#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct Common {
    /// JSON file with any of this command's options; flags take precedence.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Master seed of every random stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default from AQEC_LAB_THREADS, else all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Common {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn workers(&self) -> Result<Option<usize>, CliError> {
        if let Some(w) = self.workers {
            return Ok(Some(w));
        }
        match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a count"))),
            _ => Ok(None),
        }
    }
}

fn read_config(path: &Path, command: &str) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let Value::Object(mut map) = value else {
        return Err(CliError::Usage(
            "config file must hold a JSON object".into(),
        ));
    };
    if let Some(cmd) = map.remove("command") {
        if cmd.as_str() != Some(command) {
            return Err(CliError::Usage(format!(
                "config is for command {cmd}, not {command:?}"
            )));
        }
    }
    Ok(map)
}

/// Overlays the options given on the command line onto the config file.
///
/// Unset options and `false` switches on the command line leave the file's
/// value in place; keys the command does not know are rejected.
pub fn merge<T>(flags: &T, config: Option<&Path>, command: &str) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned + Default,
{
    let Some(path) = config else {
        return reserialize(flags);
    };
    let known = match serde_json::to_value(T::default()) {
        Ok(Value::Object(m)) => m,
        _ => {
            return Err(CliError::Internal(
                "options do not serialize to an object".into(),
            ))
        }
    };
    let mut merged = read_config(path, command)?;
    if let Some(bad) = merged.keys().find(|k| !known.contains_key(*k)) {
        return Err(CliError::Usage(format!(
            "unknown config field {bad:?} for {command}"
        )));
    }
    let Ok(Value::Object(given)) = serde_json::to_value(flags) else {
        return Err(CliError::Internal(
            "options do not serialize to an object".into(),
        ));
    };
    for (key, value) in given {
        if !matches!(value, Value::Null | Value::Bool(false)) {
            merged.insert(key, value);
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Usage(format!("config: {e}")))
}

fn reserialize<T: Serialize + DeserializeOwned>(flags: &T) -> Result<T, CliError> {
    serde_json::to_value(flags)
        .and_then(serde_json::from_value)
        .map_err(|e| CliError::Internal(e.to_string()))
}

/// A literal error target or a rule `n^-alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsSpec {
    Literal(f64),
    Power(f64),
}

impl EpsSpec {
    pub fn from_options(eps: Option<f64>, rule: Option<&str>) -> Result<Option<Self>, CliError> {
        match (eps, rule) {
            (Some(_), Some(_)) => Err(CliError::Usage("give either --eps or --eps-rule".into())),
            (Some(e), None) => Ok(Some(EpsSpec::Literal(e))),
            (None, Some(r)) => EpsSpec::parse_rule(r).map(Some),
            (None, None) => Ok(None),
        }
    }

    pub fn parse_rule(rule: &str) -> Result<Self, CliError> {
        let exponent = rule
            .trim()
            .strip_prefix("n^")
            .and_then(|e| e.trim_matches(|c| c == '(' || c == ')').parse::<f64>().ok())
            .ok_or_else(|| CliError::Usage(format!("eps rule {rule:?} is not of the form n^-a")))?;
        Ok(EpsSpec::Power(exponent))
    }

    pub fn at(self, n: usize) -> f64 {
        match self {
            EpsSpec::Literal(e) => e,
            EpsSpec::Power(a) => (n as f64).powf(a),
        }
    }
}
