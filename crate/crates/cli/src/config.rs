//! Config-file support: a plain-text `key = value` file mirroring every
//! flag, with flags taking precedence. Keys use the flag spellings without
//! the leading dashes (`snr-db`, `report-dir`, ...). Unknown keys are
//! usage errors so typos cannot silently change a run.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::{CliError, CliResult};

/// Every key the config file may define (the union across subcommands).
pub const KNOWN_KEYS: &[&str] = &[
    "jobs",
    // synth
    "out",
    "subjects",
    "epochs",
    "seed",
    "snr-db",
    // features
    "data",
    "fold-frozen-rejection",
    // evaluate
    "features",
    "model",
    "k",
    "threshold",
    "report-dir",
    "feature-set",
    "positive-weight",
    "lambda",
    "max-iterations",
    "trees",
    "mtry",
    "min-leaf",
    "rounds",
    "max-depth",
    "learning-rate",
    "reg-lambda",
    "gamma",
    "min-child-weight",
];

/// Parsed config file contents (empty when no file was given).
#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::usage(format!("config file {}: {e}", path.display()))
        })?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "config file {}:{}: expected `key = value`, found `{raw}`",
                    path.display(),
                    idx + 1
                )));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!(
                    "config file {}:{}: unknown key `{key}`",
                    path.display(),
                    idx + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "unregistered config key {key}");
        self.values.get(key).map(String::as_str)
    }

    /// Flag value, else config value, else nothing.
    pub fn opt<T>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::usage(format!("config key `{key}`: invalid value `{raw}`: {e}"))
            }),
        }
    }

    /// Flag value, else config value, else the default.
    pub fn get<T>(&self, flag: Option<T>, key: &str, default: T) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    /// Path-valued key (paths need no FromStr error handling).
    pub fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.raw(key).map(PathBuf::from))
    }
}

/// Strict boolean used by `--fold-frozen-rejection` and its config key.
pub fn parse_bool(what: &str, raw: &str) -> CliResult<bool> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(CliError::usage(format!(
            "{what}: expected `true` or `false`, got `{other}`"
        ))),
    }
}

/// Directory given by `SLEEPWAKE_DATA_ROOT`, when set and non-empty.
pub fn data_root() -> Option<PathBuf> {
    std::env::var_os("SLEEPWAKE_DATA_ROOT")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}
