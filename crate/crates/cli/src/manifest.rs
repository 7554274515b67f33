//! `manifest.json`: enough provenance to reproduce a study run.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use hapsim_core::io::sidecar_path;

use crate::config::RunConfig;

pub const FIGURE2: &str = "figure2_sorted_savings.csv";
pub const FIGURE3: &str = "figure3_parametric.csv";
pub const FIGURE45: &str = "figure4_5_hourly.csv";
pub const HOURLY_SUMMARY: &str = "hourly_summary.csv";
pub const TRIALS: &str = "trials.csv";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub version: &'static str,
    pub master_seed: u64,
    pub n_trials: usize,
    /// SHA-256 of the resolved configuration serialised as JSON.
    pub config_hash: String,
    /// SHA-256 of the scenario CSV followed by its sidecar.
    pub scenario_hash: String,
    pub scenario_path: String,
    pub threads: Option<usize>,
    pub parallel_feature: bool,
    pub started_unix_s: u64,
    pub wall_clock_s: f64,
    pub outputs: &'a [&'a str],
    pub config: &'a RunConfig,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    let json = serde_json::to_vec(cfg)?;
    Ok(hex(&Sha256::digest(&json)))
}

fn scenario_hash(csv: &Path) -> Result<String> {
    let mut h = Sha256::new();
    for p in [csv.to_path_buf(), sidecar_path(csv)] {
        h.update(std::fs::read(&p).with_context(|| format!("reading {}", p.display()))?);
    }
    Ok(hex(&h.finalize()))
}

impl<'a> Manifest<'a> {
    pub fn new(
        cfg: &'a RunConfig,
        scenario: &Path,
        threads: Option<usize>,
        started_unix_s: u64,
        wall_clock_s: f64,
        outputs: &'a [&'a str],
    ) -> Result<Self> {
        Ok(Self {
            version: env!("CARGO_PKG_VERSION"),
            master_seed: cfg.study.master_seed,
            n_trials: cfg.study.n_trials,
            config_hash: config_hash(cfg)?,
            scenario_hash: scenario_hash(scenario)?,
            scenario_path: scenario.display().to_string(),
            threads,
            parallel_feature: cfg!(feature = "parallel"),
            started_unix_s,
            wall_clock_s,
            outputs,
            config: cfg,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}
