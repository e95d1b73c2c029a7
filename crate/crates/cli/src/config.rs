//! Flag resolution with an optional key=value file underneath.
//!
//! Precedence: explicit command-line flags, then the config file named by
//! --config, then the declared defaults. Keys in the file are the long flag
//! names. All clap arguments are declared as strings and parsed here, so
//! every source goes through the same validation.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::ArgMatches;

use crate::CliError;

#[derive(Default)]
pub struct FileConfig(HashMap<String, String>);

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut map = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {} is not key=value: {line:?}",
                    lineno + 1
                )));
            };
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(FileConfig(map))
    }
}

pub struct Args<'a> {
    matches: &'a ArgMatches,
    file: FileConfig,
}

impl<'a> Args<'a> {
    pub fn new(matches: &'a ArgMatches) -> Result<Self, CliError> {
        let file = match matches.try_get_one::<String>("config") {
            Ok(Some(path)) => FileConfig::load(Path::new(path))?,
            _ => FileConfig::default(),
        };
        Ok(Args { matches, file })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        if self.matches.value_source(key) != Some(ValueSource::CommandLine) {
            if let Some(v) = self.file.0.get(key) {
                return Some(v.as_str());
            }
        }
        self.matches.get_one::<String>(key).map(|s| s.as_str())
    }

    pub fn get<T>(&self, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self
            .raw(key)
            .ok_or_else(|| CliError::Usage(format!("missing --{key}")))?;
        raw.parse()
            .map_err(|e| CliError::Usage(format!("invalid --{key} {raw:?}: {e}")))
    }

    pub fn get_opt<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("invalid --{key} {raw:?}: {e}"))),
        }
    }

    /// Comma-separated list value.
    pub fn get_list<T>(&self, key: &str) -> Result<Vec<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self
            .raw(key)
            .ok_or_else(|| CliError::Usage(format!("missing --{key}")))?;
        raw.split(',')
            .map(|piece| {
                piece.trim().parse().map_err(|e| {
                    CliError::Usage(format!("invalid --{key} entry {piece:?}: {e}"))
                })
            })
            .collect()
    }
}

/// Evenly spaced grid with both endpoints, at least two points.
pub fn grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 2 {
        return Err(CliError::Usage(format!("need steps >= 2, got {steps}")));
    }
    if !(lo < hi) {
        return Err(CliError::Usage(format!(
            "need rho-min < rho-max, got {lo} and {hi}"
        )));
    }
    let h = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps).map(|k| lo + k as f64 * h).collect())
}
