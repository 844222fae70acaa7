//! Run configuration: defaults, an optional flat `key = value` file, the
//! `RS_CACHE_DIR` variable and command-line flags, in increasing priority.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(CliError::Input(format!("unknown format `{other}` (text, json, csv)"))),
        }
    }
}

/// Tolerances that can be overridden, with their defaults.
pub const TOLERANCES: &[(&str, f64)] = &[
    // agreement of computed spectra with expected values
    ("spectrum", 1e-6),
    // ‖T_W* T_V − I‖ for constructed duals
    ("dual", 1e-8),
    // projectivity of loaded systems
    ("projective", 1e-10),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub certified: bool,
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            tolerances: TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            certified: true,
            format: Format::Text,
            cache_dir: None,
        }
    }
}

impl RunConfig {
    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Input(format!("config key `{key}`: {what} `{value}`"));
        match key {
            "seed" => self.seed = value.parse().map_err(|_| bad("not an unsigned integer"))?,
            "certified" => self.certified = value.parse().map_err(|_| bad("not a boolean"))?,
            "format" => self.format = value.parse()?,
            "cache_dir" => self.cache_dir = Some(PathBuf::from(value)),
            _ => {
                let name = key
                    .strip_prefix("tol.")
                    .filter(|n| self.tolerances.contains_key(*n))
                    .ok_or_else(|| CliError::Input(format!("unknown config key `{key}`")))?;
                let v: f64 = value.parse().map_err(|_| bad("not a number"))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(bad("tolerance must be positive"));
                }
                self.tolerances.insert(name.to_string(), v);
            }
        }
        Ok(())
    }

    /// Applies a flat `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("config line {}: expected key = value", n + 1)))?;
            let v = v.trim().trim_matches('"');
            self.set(k.trim(), v)
                .map_err(|e| CliError::Input(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn load(path: Option<&Path>, env_cache: Option<String>) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", p.display())))?;
            cfg.apply_text(&text)?;
        }
        if let Some(dir) = env_cache.filter(|s| !s.is_empty()) {
            cfg.cache_dir = Some(PathBuf::from(dir));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_and_env() {
        let mut c = RunConfig::default();
        c.apply_text("# run\nseed = 7\ntol.spectrum=1e-4\nformat = json\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.tol("spectrum"), 1e-4);
        assert_eq!(c.format, Format::Json);
        assert!(c.apply_text("tol.nothing = 1").is_err());
        assert!(c.apply_text("seed").is_err());
        let c = RunConfig::load(None, Some("/tmp/x".into())).unwrap();
        assert_eq!(c.cache_dir.as_deref(), Some(Path::new("/tmp/x")));
    }
}
