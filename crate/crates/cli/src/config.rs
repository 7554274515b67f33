//! The TOML run configuration. Every field is optional; omitted fields take
//! the reference simulation parameters.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use hapsim_core::capacity::CapacityOptions;
use hapsim_core::energy::EnergyParams;
use hapsim_core::linkbudget::{ChannelTables, LinkParams};
use hapsim_core::montecarlo::StudyConfig;
use hapsim_core::traffic::ScenarioConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    pub n_trials: usize,
    pub master_seed: u64,
    /// Environment label; only the dense-urban S-band tables ship.
    pub environment: String,
    pub elevation_set: Vec<f64>,
    pub indoor_range: (f64, f64),
    pub traditional_range: (f64, f64),
    pub ue_density_per_km2: f64,
    pub n_carriers: u32,
    /// Largest fraction of BSs that may sleep in any hour.
    pub max_offload_frac: f64,
    pub capacity_override_mbps: Option<f64>,
}

impl Default for StudySection {
    fn default() -> Self {
        let d = StudyConfig::default();
        Self {
            n_trials: d.n_trials,
            master_seed: d.master_seed,
            environment: "dense_urban".into(),
            elevation_set: d.elevation_set,
            indoor_range: d.indoor_range,
            traditional_range: d.traditional_range,
            ue_density_per_km2: d.ue_density_per_km2,
            n_carriers: d.n_carriers,
            max_offload_frac: 1.0 - d.min_active_frac,
            capacity_override_mbps: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub study: StudySection,
    pub link: LinkParams,
    pub energy: EnergyParams,
    pub capacity: CapacityOptions,
    /// Custom channel-table JSON replacing the shipped dataset.
    pub channel_tables: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn study_config(&self) -> StudyConfig {
        let s = &self.study;
        StudyConfig {
            n_trials: s.n_trials,
            master_seed: s.master_seed,
            elevation_set: s.elevation_set.clone(),
            indoor_range: s.indoor_range,
            traditional_range: s.traditional_range,
            ue_density_per_km2: s.ue_density_per_km2,
            n_carriers: s.n_carriers,
            min_active_frac: 1.0 - s.max_offload_frac,
            link: self.link.clone(),
            energy: self.energy,
            capacity: self.capacity,
            capacity_override_mbps: s.capacity_override_mbps,
        }
    }

    pub fn tables(&self) -> Result<ChannelTables> {
        if self.study.environment != "dense_urban" {
            anyhow::bail!("unsupported environment '{}'", self.study.environment);
        }
        match &self.channel_tables {
            None => Ok(ChannelTables::dense_urban_s_band()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading channel tables {}", p.display()))?;
                Ok(ChannelTables::from_json(&text)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_parameters() {
        let c = RunConfig::default();
        assert_eq!(c.link.p_tx_dbm, 43.0);
        assert_eq!(c.link.g_element_dbi, 8.0);
        assert_eq!(c.link.g_rx_dbi, 0.0);
        assert_eq!((c.link.n_rows, c.link.m_cols), (1, 4));
        assert_eq!(c.link.f_c_ghz, 2.0);
        assert_eq!(c.link.haps_height_km, 20.0);
        assert_eq!(c.link.noise_dbm, -100.96);
        assert_eq!(c.link.bandwidth_hz, 20e6);
        assert_eq!(c.study.environment, "dense_urban");
        assert!((c.study.max_offload_frac - 0.6).abs() < 1e-15);
        assert_eq!(c.study_config().min_active_frac, 0.4);
        assert_eq!(c.scenario.m_targets, 960);
    }

    #[test]
    fn partial_toml() {
        let c: RunConfig = toml::from_str(
            "[study]\nn_trials = 7\nelevation_set = [90.0]\n[link]\np_tx_dbm = 40.0\n[capacity]\naggregation = \"median\"\n",
        )
        .unwrap();
        assert_eq!(c.study.n_trials, 7);
        assert_eq!(c.link.p_tx_dbm, 40.0);
        assert_eq!(c.link.f_c_ghz, 2.0);
        assert_eq!(c.study_config().elevation_set, vec![90.0]);
        assert!(toml::from_str::<RunConfig>("[study]\nbogus = 1\n").is_err());
    }

    #[test]
    fn default_serialises() {
        let text = toml::to_string(&RunConfig::default()).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, RunConfig::default());
    }
}
