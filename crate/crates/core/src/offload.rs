//! Per-hour BS deactivation: the least-traffic-first greedy and an
//! exhaustive oracle for small instances.
//!
//! Each hour is an independent problem: keep at least `ceil(N * min_active_frac)`
//! BSs active and move the traffic of every sleeping BS onto the HAPS without
//! exceeding its capacity. A sleeping BS still draws its baseline `E0`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::energy::{bs_energy, sleep_energy, EnergyParams};
use crate::error::{invalid, Result, SimError};
use crate::par::{self, Execution};
use crate::traffic::{TrafficScenario, HOURS_PER_WEEK};

/// Largest instance the exhaustive oracle accepts.
pub const ORACLE_MAX_BS: usize = 20;

/// Relative energy difference below which two oracle candidates tie.
pub const ORACLE_TIE_TOLERANCE: f64 = 1e-12;

/// Energy parameters per BS.
pub trait EnergyModel: Sync {
    fn params_for(&self, bs: usize) -> &EnergyParams;
}

impl EnergyModel for EnergyParams {
    fn params_for(&self, _bs: usize) -> &EnergyParams {
        self
    }
}

/// A homogeneous fleet with optional per-BS overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Fleet {
    pub default: EnergyParams,
    pub overrides: BTreeMap<usize, EnergyParams>,
}

impl EnergyModel for Fleet {
    fn params_for(&self, bs: usize) -> &EnergyParams {
        self.overrides.get(&bs).unwrap_or(&self.default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffloadConstraints {
    /// Minimum fraction of BSs kept active every hour.
    pub min_active_frac: f64,
    /// HAPS capacity available for offloaded traffic, Mbps.
    pub c_haps: f64,
}

impl Default for OffloadConstraints {
    fn default() -> Self {
        Self { min_active_frac: 0.4, c_haps: 0.0 }
    }
}

impl OffloadConstraints {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_active_frac) {
            return Err(invalid(format!("min_active_frac {} outside [0, 1]", self.min_active_frac)));
        }
        if !(self.c_haps >= 0.0) {
            return Err(invalid(format!("HAPS capacity {} must be >= 0", self.c_haps)));
        }
        Ok(())
    }

    /// `ceil(N * min_active_frac)`, robust to representation error in the fraction.
    pub fn min_active(&self, n: usize) -> usize {
        let exact = n as f64 * self.min_active_frac;
        let nearest = exact.round();
        let k = if (exact - nearest).abs() <= 1e-9 * exact.max(1.0) { nearest } else { exact.ceil() };
        (k as usize).min(n)
    }

    /// `floor(N * (1 - min_active_frac))`, the most BSs that may sleep.
    pub fn max_offloaded(&self, n: usize) -> usize {
        n - self.min_active(n)
    }

    /// Whether a sleeping set with this size and total rate is admissible.
    pub fn admits(&self, n: usize, count: usize, rate: f64) -> bool {
        count == 0 || (self.c_haps > 0.0 && count <= self.max_offloaded(n) && rate <= self.c_haps)
    }
}

/// Decision and bookkeeping for one hour.
#[derive(Debug, Clone, PartialEq)]
pub struct HourOutcome {
    pub active: Vec<bool>,
    pub energy: f64,
    pub offloaded_rate: f64,
    pub offloaded_count: usize,
}

fn check_inputs(rates: &[f64], capacities: &[f64], cons: &OffloadConstraints) -> Result<()> {
    if rates.is_empty() {
        return Err(invalid("hour has no BSs"));
    }
    if rates.len() != capacities.len() {
        return Err(invalid(format!(
            "{} rates but {} capacities",
            rates.len(),
            capacities.len()
        )));
    }
    cons.validate()
}

/// Energy of one hour for a given activity vector, summed in BS order.
pub fn hour_energy<M: EnergyModel>(
    rates: &[f64],
    capacities: &[f64],
    params: &M,
    active: &[bool],
) -> Result<f64> {
    let mut total = 0.0;
    for (i, &on) in active.iter().enumerate() {
        let p = params.params_for(i);
        total += if on { bs_energy(p, rates[i], capacities[i])? } else { sleep_energy(p) };
    }
    Ok(total)
}

/// Least-traffic-first offloading for one hour.
///
/// BSs are visited in ascending rate order (ties by index). A BS sleeps
/// while both the post-update count and post-update offloaded rate stay
/// within their limits; the scan stops at the first BS that does not fit.
pub fn offload_hour<M: EnergyModel>(
    rates: &[f64],
    capacities: &[f64],
    params: &M,
    cons: &OffloadConstraints,
) -> Result<HourOutcome> {
    check_inputs(rates, capacities, cons)?;
    let n = rates.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| rates[a].total_cmp(&rates[b]).then(a.cmp(&b)));

    let mut active = vec![true; n];
    let (mut count, mut offloaded) = (0usize, 0.0f64);
    for &i in &order {
        if !cons.admits(n, count + 1, offloaded + rates[i]) {
            break;
        }
        active[i] = false;
        count += 1;
        offloaded += rates[i];
    }
    let energy = hour_energy(rates, capacities, params, &active)?;
    Ok(HourOutcome { active, energy, offloaded_rate: offloaded, offloaded_count: count })
}

/// Optimal activity vector and energy for one hour by enumerating every
/// sleeping set. Ties (within [`ORACLE_TIE_TOLERANCE`]) go to the
/// lexicographically smallest active index list.
pub fn exact_oracle_hour<M: EnergyModel>(
    rates: &[f64],
    capacities: &[f64],
    params: &M,
    cons: &OffloadConstraints,
) -> Result<(Vec<bool>, f64)> {
    check_inputs(rates, capacities, cons)?;
    let n = rates.len();
    if n > ORACLE_MAX_BS {
        return Err(SimError::InstanceTooLarge { n, max: ORACLE_MAX_BS });
    }
    let mut on_energy = Vec::with_capacity(n);
    for i in 0..n {
        on_energy.push(bs_energy(params.params_for(i), rates[i], capacities[i])?);
    }
    let off_energy: Vec<f64> = (0..n).map(|i| sleep_energy(params.params_for(i))).collect();
    let active_list = |mask: u32| -> Vec<usize> { (0..n).filter(|i| mask & (1 << i) == 0).collect() };

    let mut best: Option<(u32, f64)> = None;
    for mask in 0u32..(1u32 << n) {
        let count = mask.count_ones() as usize;
        let rate: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| rates[i]).sum();
        if !cons.admits(n, count, rate) {
            continue;
        }
        let energy: f64 = (0..n)
            .map(|i| if mask & (1 << i) != 0 { off_energy[i] } else { on_energy[i] })
            .sum();
        let better = match best {
            None => true,
            Some((bm, be)) => {
                let tol = ORACLE_TIE_TOLERANCE * be.abs().max(1.0);
                energy < be - tol || ((energy - be).abs() <= tol && active_list(mask) < active_list(bm))
            }
        };
        if better {
            best = Some((mask, energy));
        }
    }
    // the empty sleeping set is always admissible
    let (mask, energy) = best.expect("at least one feasible set");
    Ok(((0..n).map(|i| mask & (1 << i) == 0).collect(), energy))
}

/// A week of hourly decisions, hour-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OffloadSchedule {
    pub active: Vec<Vec<bool>>,
    pub offloaded_rate: Vec<f64>,
    pub offloaded_count: Vec<usize>,
    pub energy_per_hour: Vec<f64>,
    pub total_energy: f64,
}

impl OffloadSchedule {
    pub fn hours(&self) -> usize {
        self.active.len()
    }

    pub fn active_count(&self, hour: usize) -> usize {
        self.active[hour].iter().filter(|a| **a).count()
    }

    /// Sum of the capacities of the BSs active at `hour`.
    pub fn active_capacity(&self, hour: usize, capacities: &[f64]) -> f64 {
        self.active[hour]
            .iter()
            .zip(capacities)
            .filter(|(a, _)| **a)
            .map(|(_, c)| c)
            .sum()
    }

    /// BSs asleep in every hour of the schedule.
    pub fn never_active_count(&self) -> usize {
        let n = self.active.first().map_or(0, Vec::len);
        (0..n).filter(|&i| self.active.iter().all(|hour| !hour[i])).count()
    }
}

pub fn offload_week<M: EnergyModel>(
    scenario: &TrafficScenario,
    params: &M,
    cons: &OffloadConstraints,
) -> Result<OffloadSchedule> {
    offload_week_with(scenario, params, cons, Execution::Sequential)
}

/// Weekly schedule; hours may be solved in parallel with identical results.
pub fn offload_week_with<M: EnergyModel>(
    scenario: &TrafficScenario,
    params: &M,
    cons: &OffloadConstraints,
    exec: Execution,
) -> Result<OffloadSchedule> {
    let capacities = scenario.capacities();
    let outcomes = par::map_indexed(exec, HOURS_PER_WEEK, |h| {
        offload_hour(&scenario.hour_rates(h), &capacities, params, cons)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut schedule = OffloadSchedule {
        active: Vec::with_capacity(HOURS_PER_WEEK),
        offloaded_rate: Vec::with_capacity(HOURS_PER_WEEK),
        offloaded_count: Vec::with_capacity(HOURS_PER_WEEK),
        energy_per_hour: Vec::with_capacity(HOURS_PER_WEEK),
        total_energy: 0.0,
    };
    for o in outcomes {
        schedule.total_energy += o.energy;
        schedule.energy_per_hour.push(o.energy);
        schedule.offloaded_rate.push(o.offloaded_rate);
        schedule.offloaded_count.push(o.offloaded_count);
        schedule.active.push(o.active);
    }
    Ok(schedule)
}

/// Hourly energy with every BS active.
pub fn baseline_energy_per_hour<M: EnergyModel>(
    scenario: &TrafficScenario,
    params: &M,
) -> Result<Vec<f64>> {
    let capacities = scenario.capacities();
    let all_on = vec![true; scenario.n_bs()];
    (0..HOURS_PER_WEEK)
        .map(|h| hour_energy(&scenario.hour_rates(h), &capacities, params, &all_on))
        .collect()
}

/// Weekly energy with every BS active.
pub fn baseline_energy<M: EnergyModel>(scenario: &TrafficScenario, params: &M) -> Result<f64> {
    Ok(baseline_energy_per_hour(scenario, params)?.iter().sum())
}
