//! Sidecar metadata and summary files.
//!
//! Every data file `<name>` gets a `<name>.meta.json` sidecar recording the
//! tool version, the subcommand, and every parameter that shaped the bytes,
//! so a rerun from the sidecar alone reproduces the file exactly. Sidecars
//! deliberately carry no timestamps or host details: rerunning a command
//! must reproduce them byte for byte too.

use serde::{Deserialize, Serialize};
use spillover_core::{Error, Result};
use std::path::{Path, PathBuf};

pub const TOOL: &str = "spillover";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Sidecar<'a, P: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    output: String,
    /// Data rows in the file, excluding the header.
    rows: usize,
    params: &'a P,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable metadata");
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `<output>.meta.json` next to the output file.
pub fn write_sidecar<P: Serialize>(
    output: &Path,
    command: &'static str,
    rows: usize,
    params: &P,
) -> Result<()> {
    let sidecar = Sidecar {
        tool: TOOL,
        version: VERSION,
        command,
        output: output
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        rows,
        params,
    };
    let path = PathBuf::from(format!("{}.meta.json", output.display()));
    write_json(&path, &sidecar)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Quantiles {
    pub q025: f64,
    pub q500: f64,
    pub q975: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Clone, Copy)]
pub struct Band {
    pub low: f64,
    pub high: f64,
}

/// Bootstrap run summary: the quantile results plus every parameter needed
/// to rerun the distribution.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct BootstrapSummary {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub replications: usize,
    pub retained: usize,
    pub dropped: usize,
    pub days: usize,
    pub seed: u64,
    pub subsample: String,
    pub jump_intensity: f64,
    pub jump_sd: f64,
    pub lag_order: usize,
    pub intercept: bool,
    pub horizon: usize,
    pub sigma_convention: String,
    pub log_transform: bool,
    pub quantiles: Quantiles,
    /// 95% band; absent when fewer than 100 replications survived.
    pub ci: Option<Band>,
}

impl BootstrapSummary {
    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line() as u64,
            reason: e.to_string(),
        })
    }
}

#[derive(Debug, Serialize)]
pub struct DecisionCounts {
    pub reject: usize,
    pub fail_to_reject: usize,
    pub skipped: usize,
}

#[derive(Debug, Serialize)]
pub struct SeriesSummary {
    pub name: String,
    pub windows: usize,
    pub ok: usize,
    pub degenerate: usize,
    pub missing: usize,
    /// Present only when a confidence band was supplied.
    pub decisions: Option<DecisionCounts>,
}

/// Per-series outcome report for a SAM run.
#[derive(Debug, Serialize)]
pub struct SamRunSummary {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub band: Option<Band>,
    pub band_source: Option<String>,
    pub series: Vec<SeriesSummary>,
}

impl SamRunSummary {
    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    #[test]
    fn bootstrap_summary_round_trips() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("summary.json");
        let summary = BootstrapSummary {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: "bootstrap".into(),
            replications: 500,
            retained: 498,
            dropped: 2,
            days: 200,
            seed: 42,
            subsample: "5min".into(),
            jump_intensity: 0.0,
            jump_sd: 0.01,
            lag_order: 2,
            intercept: true,
            horizon: 10,
            sigma_convention: "variance".into(),
            log_transform: false,
            quantiles: Quantiles {
                q025: -6.5,
                q500: 0.125,
                q975: 6.25,
            },
            ci: Some(Band {
                low: -6.5,
                high: 6.25,
            }),
        };
        summary.write(&path).unwrap();
        assert_eq!(BootstrapSummary::read(&path).unwrap(), summary);
    }

    #[test]
    fn sidecars_land_next_to_the_output() {
        let dir = TempDir::new().unwrap();
        let out = dir.path().join("rv.csv");
        #[derive(Serialize)]
        struct P {
            seed: u64,
        }
        write_sidecar(&out, "measures", 3, &P { seed: 1 }).unwrap();
        let meta = std::fs::read_to_string(dir.path().join("rv.csv.meta.json")).unwrap();
        assert!(meta.contains("\"rows\": 3"));
        assert!(meta.contains("\"seed\": 1"));
        assert!(meta.ends_with('\n'));
        assert!(!meta.contains("time"));
    }
}
