//! Output plumbing: fixed-format CSV and the per-run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::lp_tau::TauCertificate;

/// `M,tau_num,tau_den` rows, `\n` line endings.
pub fn tau_table_csv(certs: &[TauCertificate]) -> String {
    let mut out = String::from("M,tau_num,tau_den\n");
    for c in certs {
        out.push_str(&format!("{},{},{}\n", c.m, c.tau.numer(), c.tau.denom()));
    }
    out
}

/// Record of one CLI invocation. Written even when the run fails, so every
/// output file has an entry.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Value,
    pub version: String,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch at start.
    pub started_unix: u64,
    pub wall_clock_secs: f64,
    pub outputs: Vec<PathBuf>,
    pub exit_code: i32,
    pub error: Option<String>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn start(subcommand: &str, parameters: Value, seed: Option<u64>) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            parameters,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            wall_clock_secs: 0.0,
            outputs: Vec::new(),
            exit_code: 0,
            error: None,
            started: Some(Instant::now()),
        }
    }

    /// Writes `contents` to `dir/name` and records the path.
    pub fn write_output(&mut self, dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        fs::write(&path, contents)?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    /// Stamps the elapsed time and writes `dir/<subcommand>.manifest.json`.
    pub fn finish(&mut self, dir: &Path, exit_code: i32, error: Option<String>) -> Result<PathBuf> {
        self.wall_clock_secs = self.started.map_or(0.0, |s| s.elapsed().as_secs_f64());
        self.exit_code = exit_code;
        self.error = error;
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.manifest.json", self.subcommand));
        fs::write(&path, serde_json::to_string_pretty(self).expect("manifest serializes") + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_tau::solve_tau;

    #[test]
    fn tau_csv_rows() {
        let certs: Vec<_> = (2..=4).map(|m| solve_tau(m).unwrap()).collect();
        assert_eq!(tau_table_csv(&certs), "M,tau_num,tau_den\n2,1,1\n3,1,2\n4,1,2\n");
    }

    #[test]
    fn manifest_lists_outputs() {
        let dir = std::env::temp_dir().join(format!("zchannel-report-{}", std::process::id()));
        let mut m = RunManifest::start("demo", serde_json::json!({"k": 1}), Some(3));
        m.write_output(&dir, "a.csv", "x\n").unwrap();
        let path = m.finish(&dir, 2, Some("boom".into())).unwrap();
        let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(v["exit_code"], 2);
        assert_eq!(v["seed"], 3);
        assert!(v["outputs"][0].as_str().unwrap().ends_with("a.csv"));
        fs::remove_dir_all(&dir).unwrap();
    }
}
