//! The parametric Monte Carlo study: per-trial configuration sampling, HAPS
//! capacity evaluation and weekly offloading.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use crate::capacity::{aggregate_capacity_with, CapacityOptions, PopulationDraws, TrialConfig};
use crate::energy::EnergyParams;
use crate::error::{invalid, Result, SimError};
use crate::linkbudget::{ChannelTables, LinkParams};
use crate::offload::{baseline_energy_per_hour, offload_week_with, OffloadConstraints, OffloadSchedule};
use crate::par::{self, Execution};
use crate::rng::{derive_seed, stream_rng, Stream};
use crate::traffic::{TrafficScenario, HOURS_PER_WEEK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub n_trials: usize,
    pub master_seed: u64,
    pub elevation_set: Vec<f64>,
    pub indoor_range: (f64, f64),
    pub traditional_range: (f64, f64),
    pub ue_density_per_km2: f64,
    pub n_carriers: u32,
    pub min_active_frac: f64,
    pub link: LinkParams,
    pub energy: EnergyParams,
    pub capacity: CapacityOptions,
    /// Replaces the computed HAPS capacity in every trial.
    pub capacity_override_mbps: Option<f64>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            n_trials: 1000,
            master_seed: 1,
            elevation_set: vec![60.0, 70.0, 80.0, 90.0],
            indoor_range: (0.6, 0.9),
            traditional_range: (0.3, 0.7),
            ue_density_per_km2: 3000.0,
            n_carriers: 6,
            min_active_frac: 0.4,
            link: LinkParams::default(),
            energy: EnergyParams::default(),
            capacity: CapacityOptions::default(),
            capacity_override_mbps: None,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(invalid("n_trials must be >= 1"));
        }
        if self.elevation_set.is_empty()
            || self.elevation_set.iter().any(|e| !(10.0..=90.0).contains(e))
        {
            return Err(invalid("elevation_set must be non-empty with angles in [10, 90]"));
        }
        for (name, (lo, hi)) in
            [("indoor_range", self.indoor_range), ("traditional_range", self.traditional_range)]
        {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(invalid(format!("{name} ({lo}, {hi}) must be ordered within [0, 1]")));
            }
        }
        if self.n_carriers == 0 {
            return Err(invalid("n_carriers must be >= 1"));
        }
        if !(self.ue_density_per_km2 > 0.0) {
            return Err(invalid("UE density must be positive"));
        }
        if let Some(c) = self.capacity_override_mbps {
            if !(c >= 0.0) {
                return Err(invalid("capacity override must be >= 0"));
            }
        }
        self.link.validate()?;
        self.energy.validate()?;
        OffloadConstraints { min_active_frac: self.min_active_frac, c_haps: 0.0 }.validate()
    }
}

/// Everything one trial reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub elevation_deg: f64,
    pub indoor_frac: f64,
    pub traditional_frac: f64,
    pub c_haps: f64,
    pub total_energy: f64,
    pub baseline_energy: f64,
    pub energy_per_hour: Vec<f64>,
    pub offloaded_rate: Vec<f64>,
    pub offloaded_count: Vec<usize>,
    pub active_count: Vec<usize>,
    /// Sum of capacities of active BSs per hour.
    pub active_capacity: Vec<f64>,
    pub never_active_bs_count: usize,
}

impl TrialResult {
    pub fn week_saving(&self) -> f64 {
        1.0 - self.total_energy / self.baseline_energy
    }
}

/// A configured study over a fixed scenario and channel dataset.
#[derive(Debug, Clone)]
pub struct Study {
    pub config: StudyConfig,
    pub scenario: TrafficScenario,
    pub tables: ChannelTables,
    baseline_per_hour: Vec<f64>,
}

impl Study {
    pub fn new(config: StudyConfig, scenario: TrafficScenario, tables: ChannelTables) -> Result<Self> {
        config.validate()?;
        scenario.validate()?;
        tables.validate()?;
        let baseline_per_hour = baseline_energy_per_hour(&scenario, &config.energy)?;
        Ok(Self { config, scenario, tables, baseline_per_hour })
    }

    pub fn baseline_per_hour(&self) -> &[f64] {
        &self.baseline_per_hour
    }

    pub fn baseline_energy(&self) -> f64 {
        self.baseline_per_hour.iter().sum()
    }

    pub fn constraints(&self, c_haps: f64) -> OffloadConstraints {
        OffloadConstraints { min_active_frac: self.config.min_active_frac, c_haps }
    }

    /// Trial parameters for `trial_idx`, a pure function of the master seed
    /// and the index.
    pub fn sample_trial_config(&self, trial_idx: usize) -> TrialConfig {
        let c = &self.config;
        let seed = derive_seed(c.master_seed, trial_idx as u64);
        let mut rng = stream_rng(seed, Stream::TrialConfig);
        let elevation_deg = c.elevation_set[rng.random_range(0..c.elevation_set.len())];
        let mut within = |(lo, hi): (f64, f64)| lo + (hi - lo) * rng.sample::<f64, _>(Open01);
        let indoor_frac = within(c.indoor_range);
        let traditional_frac = within(c.traditional_range);
        TrialConfig {
            elevation_deg,
            indoor_frac,
            traditional_frac,
            ue_density_per_km2: c.ue_density_per_km2,
            area_km2: self.scenario.area_km2,
            n_carriers: c.n_carriers,
            rng_stream: seed,
        }
    }

    /// HAPS capacity for a trial configuration.
    pub fn trial_capacity(&self, cfg: &TrialConfig, exec: Execution) -> Result<f64> {
        if let Some(c) = self.config.capacity_override_mbps {
            return Ok(c);
        }
        cfg.validate()?;
        let ues = PopulationDraws::sample(cfg.population_size(), cfg.rng_stream)
            .resolve(cfg, &self.tables)?;
        let opts = CapacityOptions { execution: exec, ..self.config.capacity };
        aggregate_capacity_with(cfg, &self.config.link, &self.tables, &ues, &opts)
    }

    /// Runs one trial and also returns the full weekly schedule.
    pub fn run_trial_detailed(
        &self,
        trial: usize,
        cfg: &TrialConfig,
        exec: Execution,
    ) -> Result<(TrialResult, OffloadSchedule)> {
        let c_haps = self.trial_capacity(cfg, exec)?;
        let schedule =
            offload_week_with(&self.scenario, &self.config.energy, &self.constraints(c_haps), exec)?;
        let capacities = self.scenario.capacities();
        let result = TrialResult {
            trial,
            elevation_deg: cfg.elevation_deg,
            indoor_frac: cfg.indoor_frac,
            traditional_frac: cfg.traditional_frac,
            c_haps,
            total_energy: schedule.total_energy,
            baseline_energy: self.baseline_energy(),
            energy_per_hour: schedule.energy_per_hour.clone(),
            offloaded_rate: schedule.offloaded_rate.clone(),
            offloaded_count: schedule.offloaded_count.clone(),
            active_count: (0..HOURS_PER_WEEK).map(|h| schedule.active_count(h)).collect(),
            active_capacity: (0..HOURS_PER_WEEK)
                .map(|h| schedule.active_capacity(h, &capacities))
                .collect(),
            never_active_bs_count: schedule.never_active_count(),
        };
        Ok((result, schedule))
    }

    pub fn run_trial(&self, trial: usize, cfg: &TrialConfig) -> Result<TrialResult> {
        self.run_trial_detailed(trial, cfg, Execution::Sequential).map(|(r, _)| r)
    }

    /// Runs every trial. Results are positional and independent of the
    /// execution strategy or thread count.
    pub fn run_study(&self, exec: Execution) -> Result<Vec<TrialResult>> {
        self.run_trials(0..self.config.n_trials, exec)
    }

    /// Runs a subset of trial indices.
    pub fn run_trials(
        &self,
        indices: impl IntoIterator<Item = usize>,
        exec: Execution,
    ) -> Result<Vec<TrialResult>> {
        let indices: Vec<usize> = indices.into_iter().collect();
        par::map_slice(exec, &indices, |&i| {
            catch_unwind(AssertUnwindSafe(|| self.run_trial(i, &self.sample_trial_config(i))))
                .unwrap_or_else(|payload| {
                    let message = payload
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| payload.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "unknown panic".into());
                    Err(SimError::TrialPanicked { index: i, message })
                })
        })
        .into_iter()
        .collect()
    }
}
