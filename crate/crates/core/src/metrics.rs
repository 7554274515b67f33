//! Post-processing of trial results: savings per period, offloaded traffic
//! share, capacity utilisation and sorted saving curves.

use serde::{Deserialize, Serialize};

use crate::energy::EnergyParams;
use crate::error::{invalid, Result, SimError};
use crate::montecarlo::TrialResult;
use crate::offload::baseline_energy_per_hour;
use crate::traffic::{TrafficScenario, HOURS_PER_DAY, HOURS_PER_WEEK, WEEKEND_START};

/// A named subset of the week's hours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodMask {
    pub name: String,
    pub hours: Vec<usize>,
}

impl PeriodMask {
    pub fn new(name: impl Into<String>, hours: Vec<usize>) -> Result<Self> {
        let mask = Self { name: name.into(), hours };
        mask.validate()?;
        Ok(mask)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hours.is_empty() {
            return Err(invalid(format!("period '{}' has no hours", self.name)));
        }
        if let Some(h) = self.hours.iter().find(|&&h| h >= HOURS_PER_WEEK) {
            return Err(invalid(format!("period '{}': hour {h} out of range", self.name)));
        }
        Ok(())
    }

    pub fn week() -> Self {
        Self { name: "week".into(), hours: (0..HOURS_PER_WEEK).collect() }
    }

    /// 00:00 to 05:59 of every day.
    pub fn night() -> Self {
        let hours = (0..HOURS_PER_WEEK).filter(|h| h % HOURS_PER_DAY <= 5).collect();
        Self { name: "night".into(), hours }
    }

    /// Monday to Friday.
    pub fn weekday() -> Self {
        Self { name: "weekday".into(), hours: (0..WEEKEND_START).collect() }
    }

    pub fn weekend() -> Self {
        Self { name: "weekend".into(), hours: (WEEKEND_START..HOURS_PER_WEEK).collect() }
    }

    /// week, night, weekday, weekend: the column order of the curve table.
    pub fn standard() -> Vec<Self> {
        vec![Self::week(), Self::night(), Self::weekday(), Self::weekend()]
    }
}

/// Saving over `mask` given the all-active hourly energy.
pub fn energy_saving_with_baseline(
    result: &TrialResult,
    baseline_per_hour: &[f64],
    mask: &PeriodMask,
) -> Result<f64> {
    mask.validate()?;
    let base: f64 = mask.hours.iter().map(|&h| baseline_per_hour[h]).sum();
    if !(base > 0.0) {
        return Err(SimError::UndefinedMetric(format!(
            "zero baseline energy over period '{}'",
            mask.name
        )));
    }
    let used: f64 = mask.hours.iter().map(|&h| result.energy_per_hour[h]).sum();
    Ok(1.0 - used / base)
}

/// Relative energy reduction of the offloading schedule over `mask`.
pub fn energy_saving(
    result: &TrialResult,
    scenario: &TrafficScenario,
    params: &EnergyParams,
    mask: &PeriodMask,
) -> Result<f64> {
    energy_saving_with_baseline(result, &baseline_energy_per_hour(scenario, params)?, mask)
}

/// Share of the hour's demand carried by the HAPS.
pub fn offloaded_fraction(result: &TrialResult, scenario: &TrafficScenario, hour: usize) -> Result<f64> {
    check_hour(hour)?;
    let demand = scenario.total_rate(hour);
    if !(demand > 0.0) {
        return Err(SimError::UndefinedMetric(format!("zero demand at hour {hour}")));
    }
    Ok(result.offloaded_rate[hour] / demand)
}

/// Demand over the capacity of the HAPS plus all active BSs.
pub fn capacity_utilization(
    result: &TrialResult,
    scenario: &TrafficScenario,
    hour: usize,
) -> Result<f64> {
    check_hour(hour)?;
    let available = result.c_haps + result.active_capacity[hour];
    if !(available > 0.0) {
        return Err(SimError::UndefinedMetric(format!("zero available capacity at hour {hour}")));
    }
    Ok(scenario.total_rate(hour) / available)
}

/// Demand-weighted share of the week's traffic carried by the HAPS.
pub fn weekly_offloaded_fraction(result: &TrialResult, scenario: &TrafficScenario) -> Result<f64> {
    let demand: f64 = (0..HOURS_PER_WEEK).map(|h| scenario.total_rate(h)).sum();
    if !(demand > 0.0) {
        return Err(SimError::UndefinedMetric("zero weekly demand".into()));
    }
    Ok(result.offloaded_rate.iter().sum::<f64>() / demand)
}

fn check_hour(hour: usize) -> Result<()> {
    if hour >= HOURS_PER_WEEK {
        return Err(invalid(format!("hour {hour} out of range")));
    }
    Ok(())
}

/// Per-mask savings, each column sorted ascending on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingCurves {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl SavingCurves {
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    /// Row `rank` across all columns.
    pub fn row(&self, rank: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[rank]).collect()
    }
}

pub fn sorted_saving_curves(
    results: &[TrialResult],
    baseline_per_hour: &[f64],
    masks: &[PeriodMask],
) -> Result<SavingCurves> {
    if results.is_empty() {
        return Err(invalid("no trial results"));
    }
    let mut columns = Vec::with_capacity(masks.len());
    for mask in masks {
        let mut col = results
            .iter()
            .map(|r| energy_saving_with_baseline(r, baseline_per_hour, mask))
            .collect::<Result<Vec<_>>>()?;
        col.sort_by(f64::total_cmp);
        columns.push(col);
    }
    Ok(SavingCurves { names: masks.iter().map(|m| m.name.clone()).collect(), columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::{BSStats, WeeklyTrace};

    fn result_with(energy_per_hour: Vec<f64>, offloaded_rate: Vec<f64>) -> TrialResult {
        TrialResult {
            trial: 0,
            elevation_deg: 90.0,
            indoor_frac: 0.7,
            traditional_frac: 0.5,
            c_haps: 40.0,
            total_energy: energy_per_hour.iter().sum(),
            baseline_energy: 0.0,
            energy_per_hour,
            offloaded_rate,
            offloaded_count: vec![0; 168],
            active_count: vec![0; 168],
            active_capacity: vec![60.0; 168],
            never_active_bs_count: 0,
        }
    }

    fn flat_scenario(rates: &[f64]) -> TrafficScenario {
        let traces = rates.iter().map(|&r| WeeklyTrace::new(vec![r; 168]).unwrap()).collect();
        let stats = rates
            .iter()
            .map(|&r| BSStats { peak: r, p5: r, mean: r, capacity: 100.0, max_load: 1.0 })
            .collect();
        TrafficScenario::new(traces, stats, 1.0).unwrap()
    }

    #[test]
    fn masks_partition_week() {
        let night = PeriodMask::night();
        assert_eq!(night.hours.len(), 42);
        assert_eq!(&night.hours[..7], &[0, 1, 2, 3, 4, 5, 24]);
        let mut all = PeriodMask::weekday().hours;
        all.extend(PeriodMask::weekend().hours);
        assert_eq!(all, PeriodMask::week().hours);
        assert!(PeriodMask::new("x", vec![]).is_err());
        assert!(PeriodMask::new("x", vec![168]).is_err());
    }

    #[test]
    fn saving_edges() {
        let base = vec![2.0; 168];
        let r = result_with(base.clone(), vec![0.0; 168]);
        assert_eq!(energy_saving_with_baseline(&r, &base, &PeriodMask::week()).unwrap(), 0.0);
        let r = result_with(vec![0.0; 168], vec![0.0; 168]);
        assert_eq!(energy_saving_with_baseline(&r, &base, &PeriodMask::night()).unwrap(), 1.0);
        assert!(matches!(
            energy_saving_with_baseline(&r, &[0.0; 168], &PeriodMask::week()),
            Err(SimError::UndefinedMetric(_))
        ));
    }

    #[test]
    fn saving_toy_table() {
        // 2 BSs x 2 hours: baseline hours 1.5 and 1.9; schedule hours 0.9, 1.9
        let mut base = vec![1.0; 168];
        base[0] = 1.5;
        base[1] = 1.9;
        let mut used = vec![1.0; 168];
        used[0] = 0.9;
        used[1] = 1.9;
        let r = result_with(used, vec![0.0; 168]);
        let mask = PeriodMask::new("toy", vec![0, 1]).unwrap();
        let s = energy_saving_with_baseline(&r, &base, &mask).unwrap();
        assert!((s - (1.0 - 2.8 / 3.4)).abs() < 1e-12);
    }

    #[test]
    fn saving_matches_scenario_path() {
        let s = flat_scenario(&[10.0, 20.0]);
        let p = EnergyParams::default();
        let base = baseline_energy_per_hour(&s, &p).unwrap();
        let r = result_with(vec![base[0] * 0.5; 168], vec![0.0; 168]);
        let direct = energy_saving(&r, &s, &p, &PeriodMask::week()).unwrap();
        assert!((direct - 0.5).abs() < 1e-12);
    }

    #[test]
    fn offloaded_fraction_cases() {
        let s = flat_scenario(&[1.0, 2.0, 3.0]);
        let r = result_with(vec![0.0; 168], vec![0.0; 168]);
        assert_eq!(offloaded_fraction(&r, &s, 0).unwrap(), 0.0);
        let r = result_with(vec![0.0; 168], vec![6.0; 168]);
        assert_eq!(offloaded_fraction(&r, &s, 5).unwrap(), 1.0);
        let r = result_with(vec![0.0; 168], vec![3.0; 168]);
        assert_eq!(offloaded_fraction(&r, &s, 7).unwrap(), 0.5);
        assert_eq!(weekly_offloaded_fraction(&r, &s).unwrap(), 0.5);
        let zero = flat_scenario(&[0.0, 0.0]);
        assert!(offloaded_fraction(&r, &zero, 0).is_err());
        assert!(offloaded_fraction(&r, &s, 168).is_err());
    }

    #[test]
    fn utilization_cases() {
        let s = flat_scenario(&[20.0, 30.0]);
        let r = result_with(vec![0.0; 168], vec![0.0; 168]);
        assert_eq!(capacity_utilization(&r, &s, 3).unwrap(), 0.5);
        let idle = flat_scenario(&[0.0, 0.0]);
        assert_eq!(capacity_utilization(&r, &idle, 3).unwrap(), 0.0);
        let mut dead = r.clone();
        dead.c_haps = 0.0;
        dead.active_capacity = vec![0.0; 168];
        assert!(capacity_utilization(&dead, &s, 0).is_err());
    }

    #[test]
    fn curves_sorted_per_column() {
        let base = vec![1.0; 168];
        let mk = |week: f64, night: f64| {
            let e = (0..168)
                .map(|h| if h % 24 <= 5 { 1.0 - night } else { 1.0 - week })
                .collect();
            result_with(e, vec![0.0; 168])
        };
        let results = vec![mk(0.3, 0.1), mk(0.1, 0.5), mk(0.2, 0.3)];
        let curves = sorted_saving_curves(&results, &base, &[PeriodMask::night()]).unwrap();
        assert_eq!(curves.len(), 3);
        let night = curves.column("night").unwrap();
        assert!(night.windows(2).all(|w| w[0] <= w[1]));
        assert!((night[0] - 0.1).abs() < 1e-12 && (night[2] - 0.5).abs() < 1e-12);
        let single = sorted_saving_curves(&results[..1], &base, &PeriodMask::standard()).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single.row(0).len(), 4);
        assert!(sorted_saving_curves(&[], &base, &PeriodMask::standard()).is_err());
    }
}
