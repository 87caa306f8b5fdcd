//! Key=value config files and flag/file/default resolution.
//!
//! Every long flag has a config key of the same name (without the leading
//! dashes). Explicit flags win over file values, file values win over
//! defaults. Keys that match no flag of the running subcommand are rejected,
//! so typos fail loudly instead of silently using a default.

use spillover_core::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

/// Parsed config file with removal-based use tracking.
#[derive(Debug)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Loads a config file, or an empty map when no path is given.
    ///
    /// Lines are `key=value`; blank lines and `#` comments are ignored.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let Some(path) = path else {
            return Ok(Self { entries });
        };
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for (idx, raw) in text.lines().enumerate() {
            let line = (idx + 1) as u64;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    reason: format!("expected key=value, got `{trimmed}`"),
                });
            };
            let key = key.trim().to_owned();
            if entries.insert(key.clone(), value.trim().to_owned()).is_some() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub(crate) fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    /// Rejects any keys that no flag consumed. Called after a subcommand has
    /// resolved all its keys and before it writes any output.
    pub fn finish(&mut self) -> Result<()> {
        if self.entries.is_empty() {
            Ok(())
        } else {
            let keys: Vec<String> = std::mem::take(&mut self.entries).into_keys().collect();
            Err(Error::InvalidParam {
                name: "config",
                reason: format!("unknown config keys: {}", keys.join(", ")),
            })
        }
    }
}

fn parse_value<T>(key: &'static str, raw: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    raw.parse().map_err(|e| Error::InvalidParam {
        name: key,
        reason: format!("cannot parse `{raw}`: {e}"),
    })
}

/// Flag, then config value, then default.
pub fn resolve<T>(flag: Option<T>, cfg: &mut ConfigMap, key: &'static str, default: T) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    match (flag, cfg.take(key)) {
        (Some(v), _) => Ok(v),
        (None, Some(raw)) => parse_value(key, &raw),
        (None, None) => Ok(default),
    }
}

/// Flag, then config value, then absent.
pub fn resolve_opt<T>(flag: Option<T>, cfg: &mut ConfigMap, key: &'static str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: Display,
{
    match (flag, cfg.take(key)) {
        (Some(v), _) => Ok(Some(v)),
        (None, Some(raw)) => parse_value(key, &raw).map(Some),
        (None, None) => Ok(None),
    }
}

/// Flag, then config value; missing everywhere is a validation error.
pub fn resolve_required<T>(flag: Option<T>, cfg: &mut ConfigMap, key: &'static str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    resolve_opt(flag, cfg, key)?.ok_or(Error::InvalidParam {
        name: key,
        reason: "required (pass the flag or set the config key)".into(),
    })
}

/// Presence flag, then config boolean, then false.
pub fn resolve_switch(flag: bool, cfg: &mut ConfigMap, key: &'static str) -> Result<bool> {
    if flag {
        cfg.take(key);
        return Ok(true);
    }
    match cfg.take(key) {
        Some(raw) => parse_value(key, &raw),
        None => Ok(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use tempfile::TempDir;

    fn map(content: &str) -> ConfigMap {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("cfg.txt");
        fs::write(&path, content).unwrap();
        ConfigMap::load(Some(&path)).unwrap()
    }

    #[test]
    fn precedence_is_flag_file_default() {
        let mut cfg = map("window=30\n# comment\n\nstep = 2\n");
        assert_eq!(resolve(Some(99usize), &mut cfg, "window", 200).unwrap(), 99);
        assert_eq!(resolve(None::<usize>, &mut cfg, "step", 1).unwrap(), 2);
        assert_eq!(resolve(None::<usize>, &mut cfg, "horizon", 10).unwrap(), 10);
        cfg.finish().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut cfg = map("window=30\n");
        let err = cfg.finish().unwrap_err();
        assert!(err.to_string().contains("window"));
    }

    #[test]
    fn malformed_lines_and_duplicates_error_with_line_numbers() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("cfg.txt");
        fs::write(&path, "a=1\nbogus\n").unwrap();
        let err = ConfigMap::load(Some(&path)).unwrap_err();
        assert!(err.to_string().contains(":2:"));

        fs::write(&path, "a=1\na=2\n").unwrap();
        assert!(ConfigMap::load(Some(&path)).is_err());
    }

    #[test]
    fn switches_fall_back_to_config() {
        let mut cfg = map("log-transform=true\n");
        assert!(resolve_switch(false, &mut cfg, "log-transform").unwrap());
        let mut cfg = map("");
        assert!(!resolve_switch(false, &mut cfg, "log-transform").unwrap());
        assert!(resolve_switch(true, &mut cfg, "log-transform").unwrap());
    }

    #[test]
    fn required_values_report_their_key() {
        let mut cfg = map("");
        let err = resolve_required(None::<usize>, &mut cfg, "window").unwrap_err();
        assert!(err.to_string().contains("window"));
    }

    #[test]
    fn bad_values_name_the_key() {
        let mut cfg = map("window=soon\n");
        let err = resolve(None::<usize>, &mut cfg, "window", 1).unwrap_err();
        assert!(err.to_string().contains("window"));
        assert!(err.to_string().contains("soon"));
    }
}
