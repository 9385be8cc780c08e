//! `key=value` config files layered under command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lexbias::translate::{parse_key_values, ConfigError};

use crate::CliError;

/// Parsed config file. Keys are normalized to the flag spelling
/// (`bin_width` and `bin-width` are the same key).
#[derive(Debug, Default)]
pub struct ConfigFile {
    path: Option<PathBuf>,
    values: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let pairs = parse_key_values(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (line, key, value) in pairs {
            let key = key.replace('_', "-");
            if !allowed.contains(&key.as_str()) {
                let err = ConfigError::UnknownKey { line, key };
                return Err(CliError::input(format!("{}: {err}", path.display())));
            }
            values.insert(key, (line, value));
        }
        Ok(ConfigFile {
            path: Some(path.to_owned()),
            values,
        })
    }

    /// Flag value if given, else the config value, else `None`.
    pub fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        let Some((line, raw)) = self.values.get(key) else {
            return Ok(None);
        };
        raw.parse().map(Some).map_err(|e| {
            CliError::input(format!(
                "{}:{line}: invalid value for {key}: {raw:?} ({e})",
                self.path.as_deref().unwrap_or(Path::new("<config>")).display()
            ))
        })
    }

    /// Like [`ConfigFile::get`] for paths; config paths are relative to the
    /// config file's directory.
    pub fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        if flag.is_some() {
            return flag;
        }
        let (_, raw) = self.values.get(key)?;
        let p = PathBuf::from(raw);
        match self.path.as_deref().and_then(Path::parent) {
            Some(dir) if p.is_relative() => Some(dir.join(p)),
            _ => Some(p),
        }
    }
}
