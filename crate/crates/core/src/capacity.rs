//! UE population sampling and aggregation of per-UE Shannon rates into the
//! single HAPS capacity figure used by the offloading solver.

use rand::Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linkbudget::{
    los_probability, path_loss_db_with, snr_db, ue_rate_bps, ChannelTables, LinkParams,
    LossSwitches, UESample,
};
use crate::par::{self, Execution};
use crate::rng::{stream_rng, Stream};
use crate::traffic::percentile_nearest_rank;

/// Parameters of one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub elevation_deg: f64,
    pub indoor_frac: f64,
    pub traditional_frac: f64,
    pub ue_density_per_km2: f64,
    pub area_km2: f64,
    pub n_carriers: u32,
    pub rng_stream: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            elevation_deg: 90.0,
            indoor_frac: 0.75,
            traditional_frac: 0.5,
            ue_density_per_km2: 3000.0,
            area_km2: 30.0,
            n_carriers: 6,
            rng_stream: 0,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("indoor_frac", self.indoor_frac), ("traditional_frac", self.traditional_frac)] {
            if !(0.0..=1.0).contains(&f) {
                return Err(invalid(format!("{name} = {f} outside [0, 1]")));
            }
        }
        if !(10.0..=90.0).contains(&self.elevation_deg) {
            return Err(invalid(format!("elevation {} outside [10, 90] deg", self.elevation_deg)));
        }
        if self.n_carriers == 0 {
            return Err(invalid("at least one carrier is required"));
        }
        if !(self.ue_density_per_km2 > 0.0) || !(self.area_km2 > 0.0) {
            return Err(invalid("UE density and area must be positive"));
        }
        Ok(())
    }

    /// Number of UEs deployed, `ceil(density * area)`.
    pub fn population_size(&self) -> usize {
        (self.ue_density_per_km2 * self.area_km2).ceil() as usize
    }
}

/// The raw per-UE random numbers of a trial. Flags are derived from them by
/// thresholding, so paired runs that only change a fraction or the elevation
/// reuse identical draws.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationDraws {
    pub u_los: Vec<f64>,
    pub u_indoor: Vec<f64>,
    pub u_traditional: Vec<f64>,
    pub sf: Vec<f64>,
    pub bel_p: Vec<f64>,
}

impl PopulationDraws {
    pub fn sample(n: usize, rng_stream: u64) -> Self {
        let uniforms = |s: Stream| {
            let mut rng = stream_rng(rng_stream, s);
            (0..n).map(|_| rng.random::<f64>()).collect::<Vec<_>>()
        };
        let mut sf_rng = stream_rng(rng_stream, Stream::ShadowFading);
        let mut bel_rng = stream_rng(rng_stream, Stream::EntryLoss);
        Self {
            u_los: uniforms(Stream::Los),
            u_indoor: uniforms(Stream::Indoor),
            u_traditional: uniforms(Stream::Building),
            sf: (0..n).map(|_| sf_rng.sample(StandardNormal)).collect(),
            bel_p: (0..n).map(|_| bel_rng.sample(Open01)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.u_los.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_los.is_empty()
    }

    /// Turns the draws into UE samples for a given configuration.
    pub fn resolve(&self, cfg: &TrialConfig, tables: &ChannelTables) -> Result<Vec<UESample>> {
        let p_los = los_probability(tables, cfg.elevation_deg)?;
        Ok((0..self.len())
            .map(|i| {
                let indoor = self.u_indoor[i] < cfg.indoor_frac;
                UESample {
                    los: self.u_los[i] < p_los,
                    indoor,
                    traditional: indoor && self.u_traditional[i] < cfg.traditional_frac,
                    sf_draw: self.sf[i],
                    bel_p: self.bel_p[i],
                    elevation_deg: cfg.elevation_deg,
                }
            })
            .collect())
    }
}

pub fn sample_ue_population(cfg: &TrialConfig, tables: &ChannelTables) -> Result<Vec<UESample>> {
    cfg.validate()?;
    PopulationDraws::sample(cfg.population_size(), cfg.rng_stream).resolve(cfg, tables)
}

/// How per-UE rates are reduced to one per-carrier figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Round-robin sharing: mean per-UE rate.
    #[default]
    Mean,
    Median,
    /// Cell-edge figure: 5th percentile of per-UE rate.
    Percentile5,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CapacityOptions {
    pub aggregation: Aggregation,
    pub switches: LossSwitches,
    #[serde(skip)]
    pub execution: Execution,
}

/// Per-UE single-carrier rates in bit/s, in population order.
pub fn ue_rates_bps(
    params: &LinkParams,
    tables: &ChannelTables,
    ues: &[UESample],
    opts: &CapacityOptions,
) -> Result<Vec<f64>> {
    par::map_slice(opts.execution, ues, |ue| {
        path_loss_db_with(tables, params, ue, opts.switches).map(|pl| ue_rate_bps(params, snr_db(params, pl)))
    })
    .into_iter()
    .collect()
}

/// Aggregate HAPS capacity in Mbps with default options.
pub fn aggregate_capacity(
    cfg: &TrialConfig,
    params: &LinkParams,
    tables: &ChannelTables,
    ues: &[UESample],
) -> Result<f64> {
    aggregate_capacity_with(cfg, params, tables, ues, &CapacityOptions::default())
}

pub fn aggregate_capacity_with(
    cfg: &TrialConfig,
    params: &LinkParams,
    tables: &ChannelTables,
    ues: &[UESample],
    opts: &CapacityOptions,
) -> Result<f64> {
    if ues.is_empty() {
        return Err(invalid("cannot aggregate capacity over an empty population"));
    }
    if cfg.n_carriers == 0 {
        return Err(invalid("at least one carrier is required"));
    }
    let rates = ue_rates_bps(params, tables, ues, opts)?;
    let per_carrier = match opts.aggregation {
        // sequential sum so the result does not depend on the thread count
        Aggregation::Mean => rates.iter().sum::<f64>() / rates.len() as f64,
        Aggregation::Median => percentile_nearest_rank(&rates, 50.0),
        Aggregation::Percentile5 => percentile_nearest_rank(&rates, 5.0),
    };
    Ok(cfg.n_carriers as f64 * per_carrier / 1e6)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> TrialConfig {
        TrialConfig { ue_density_per_km2: 100.0, area_km2: 10.0, ..Default::default() }
    }

    #[test]
    fn default_population_size() {
        let cfg = TrialConfig::default();
        assert_eq!(cfg.population_size(), 90_000);
        let ues = sample_ue_population(&cfg, &ChannelTables::default()).unwrap();
        assert_eq!(ues.len(), 90_000);
        let indoor = ues.iter().filter(|u| u.indoor).count() as f64 / 90_000.0;
        assert!((indoor - 0.75).abs() < 0.01);
    }

    #[test]
    fn no_indoor_means_no_entry_loss() {
        let cfg = TrialConfig { indoor_frac: 0.0, ..small_cfg() };
        let ues = sample_ue_population(&cfg, &ChannelTables::default()).unwrap();
        assert!(ues.iter().all(|u| !u.indoor && !u.traditional));
    }

    #[test]
    fn deterministic_per_stream() {
        let t = ChannelTables::default();
        let a = sample_ue_population(&small_cfg(), &t).unwrap();
        assert_eq!(a, sample_ue_population(&small_cfg(), &t).unwrap());
        let other = TrialConfig { rng_stream: 1, ..small_cfg() };
        assert_ne!(a, sample_ue_population(&other, &t).unwrap());
    }

    #[test]
    fn ideal_population_capacity() {
        let t = ChannelTables::default();
        let p = LinkParams::default();
        let ue = UESample {
            los: true,
            indoor: false,
            traditional: false,
            sf_draw: 0.0,
            bel_p: 0.5,
            elevation_deg: 90.0,
        };
        let c = aggregate_capacity(&TrialConfig::default(), &p, &t, &vec![ue; 50]).unwrap();
        assert!((c - 6.0 * 222.55).abs() < 1.0, "{c}");
    }

    #[test]
    fn duplication_and_permutation_invariant() {
        let t = ChannelTables::default();
        let p = LinkParams::default();
        let cfg = small_cfg();
        let ues = sample_ue_population(&cfg, &t).unwrap();
        let c = aggregate_capacity(&cfg, &p, &t, &ues).unwrap();
        let doubled: Vec<_> = ues.iter().chain(&ues).copied().collect();
        let c2 = aggregate_capacity(&cfg, &p, &t, &doubled).unwrap();
        assert!((c - c2).abs() <= 1e-9 * c);
        let mut rev = ues.clone();
        rev.reverse();
        let c3 = aggregate_capacity(&cfg, &p, &t, &rev).unwrap();
        assert!((c - c3).abs() <= 1e-9 * c);
    }

    #[test]
    fn higher_snr_more_capacity() {
        let t = ChannelTables::default();
        let p = LinkParams::default();
        let cfg = small_cfg();
        let ues = sample_ue_population(&cfg, &t).unwrap();
        let louder = LinkParams { p_tx_dbm: p.p_tx_dbm + 1.0, ..p.clone() };
        assert!(
            aggregate_capacity(&cfg, &louder, &t, &ues).unwrap()
                > aggregate_capacity(&cfg, &p, &t, &ues).unwrap()
        );
    }

    #[test]
    fn aggregation_variants_are_ordered() {
        let t = ChannelTables::default();
        let p = LinkParams::default();
        let cfg = small_cfg();
        let ues = sample_ue_population(&cfg, &t).unwrap();
        let run = |aggregation| {
            let opts = CapacityOptions { aggregation, ..Default::default() };
            aggregate_capacity_with(&cfg, &p, &t, &ues, &opts).unwrap()
        };
        assert!(run(Aggregation::Percentile5) < run(Aggregation::Median));
        assert!(run(Aggregation::Percentile5) < run(Aggregation::Mean));
    }

    #[test]
    fn errors() {
        let t = ChannelTables::default();
        let p = LinkParams::default();
        assert!(aggregate_capacity(&small_cfg(), &p, &t, &[]).is_err());
        let bad = TrialConfig { indoor_frac: 1.5, ..small_cfg() };
        assert!(sample_ue_population(&bad, &t).is_err());
        let bad = TrialConfig { n_carriers: 0, ..small_cfg() };
        assert!(sample_ue_population(&bad, &t).is_err());
    }
}
