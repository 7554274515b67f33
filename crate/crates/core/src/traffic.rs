//! Synthetic weekly traffic traces and the peak/p5/mean matching procedure
//! that turns a pool of base shapes into per-BS weekly profiles.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SimError};
use crate::par::{self, Execution};
use crate::rng::{indexed_rng, Stream};

pub const HOURS_PER_DAY: usize = 24;
pub const HOURS_PER_WEEK: usize = 168;
/// First weekend hour (Saturday 00:00) with hour 0 = Monday 00:00.
pub const WEEKEND_START: usize = 120;

/// Relative slack allowed when checking `rate <= max_load * capacity`.
pub const LOAD_TOLERANCE: f64 = 1e-9;

/// Hourly traffic rates in Mbps for one typical week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeeklyTrace(Vec<f64>);

impl WeeklyTrace {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != HOURS_PER_WEEK {
            return Err(invalid(format!(
                "weekly trace needs {HOURS_PER_WEEK} values, got {}",
                values.len()
            )));
        }
        if let Some((h, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(invalid(format!("hour {h}: rate {v} is negative or not finite")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn peak(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn p5(&self) -> f64 {
        percentile_nearest_rank(&self.0, 5.0)
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

impl TryFrom<Vec<f64>> for WeeklyTrace {
    type Error = SimError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeeklyTrace> for Vec<f64> {
    fn from(t: WeeklyTrace) -> Self {
        t.0
    }
}

/// Nearest-rank percentile: the `ceil(p/100 * n)`-th smallest value.
pub fn percentile_nearest_rank(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Per-BS target statistics the scaled trace must reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BSStats {
    pub peak: f64,
    pub p5: f64,
    pub mean: f64,
    pub capacity: f64,
    pub max_load: f64,
}

impl BSStats {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.peak, self.p5, self.mean, self.capacity, self.max_load]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("BS stats contain non-finite values"));
        }
        if !(0.0 <= self.p5 && self.p5 <= self.mean && self.mean <= self.peak) {
            return Err(invalid(format!(
                "BS stats must satisfy 0 <= p5 <= mean <= peak (p5={}, mean={}, peak={})",
                self.p5, self.mean, self.peak
            )));
        }
        if self.capacity <= 0.0 || !(self.max_load > 0.0 && self.max_load <= 1.0) {
            return Err(invalid("capacity must be > 0 and max_load in (0, 1]"));
        }
        if self.peak > self.load_limit() * (1.0 + LOAD_TOLERANCE) {
            return Err(invalid(format!(
                "peak {} exceeds max_load x capacity {}",
                self.peak,
                self.load_limit()
            )));
        }
        Ok(())
    }

    /// Highest admissible hourly rate, `max_load * capacity`.
    pub fn load_limit(&self) -> f64 {
        self.max_load * self.capacity
    }
}

/// Shape knobs for the synthetic base traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaseTraceConfig {
    /// Hour-of-day of the morning maximum.
    pub morning_peak_hour: f64,
    /// Hour-of-day of the evening maximum.
    pub evening_peak_hour: f64,
    /// Floor level relative to the evening peak.
    pub night_floor: f64,
    /// Weekend amplitude factor range.
    pub weekend_factor: (f64, f64),
    /// Maximum absolute phase shift in hours.
    pub max_phase_jitter_h: f64,
    /// Log-scale standard deviation of the multiplicative noise.
    pub noise_sigma: f64,
}

impl Default for BaseTraceConfig {
    fn default() -> Self {
        Self {
            morning_peak_hour: 11.0,
            evening_peak_hour: 20.0,
            night_floor: 0.06,
            weekend_factor: (0.7, 0.9),
            max_phase_jitter_h: 2.0,
            noise_sigma: 0.1,
        }
    }
}

impl BaseTraceConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.weekend_factor;
        if !(0.0 < lo && lo <= hi) {
            return Err(invalid("weekend_factor must be an ordered positive range"));
        }
        if self.night_floor < 0.0 || self.noise_sigma < 0.0 || self.max_phase_jitter_h < 0.0 {
            return Err(invalid("base trace knobs must be non-negative"));
        }
        Ok(())
    }
}

/// Distribution knobs for the synthetic per-BS target statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TargetStatsConfig {
    /// Median BS capacity (Mbps) of the log-normal capacity law.
    pub capacity_median_mbps: f64,
    /// Log-scale standard deviation of the capacity law.
    pub capacity_sigma: f64,
    /// Maximum cell load, drawn log-uniformly in this range.
    pub max_load_range: (f64, f64),
    /// Ratio p5 / peak, drawn uniformly in this range.
    pub p5_ratio_range: (f64, f64),
    /// Position of the mean between p5 (0) and peak (1).
    pub mean_position_range: (f64, f64),
}

impl Default for TargetStatsConfig {
    fn default() -> Self {
        Self {
            capacity_median_mbps: 90.0,
            capacity_sigma: 0.35,
            max_load_range: (0.02, 0.6),
            p5_ratio_range: (0.05, 0.4),
            mean_position_range: (0.3, 0.55),
        }
    }
}

impl TargetStatsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_median_mbps > 0.0) || !(self.capacity_sigma >= 0.0) {
            return Err(invalid("capacity law needs median > 0 and sigma >= 0"));
        }
        let ordered = |(lo, hi): (f64, f64), min: f64, max: f64| min <= lo && lo <= hi && hi <= max;
        if !ordered(self.max_load_range, f64::MIN_POSITIVE, 1.0) {
            return Err(invalid("max_load_range must lie in (0, 1]"));
        }
        if !ordered(self.p5_ratio_range, 0.0, 1.0) || self.p5_ratio_range.1 >= 1.0 {
            return Err(invalid("p5_ratio_range must lie in [0, 1)"));
        }
        if !ordered(self.mean_position_range, 0.0, 1.0) {
            return Err(invalid("mean_position_range must lie in [0, 1]"));
        }
        Ok(())
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(HOURS_PER_DAY as f64);
    d.min(HOURS_PER_DAY as f64 - d)
}

fn bump(t: f64, centre: f64, width: f64) -> f64 {
    let d = circular_distance(t, centre);
    (-(d * d) / (2.0 * width * width)).exp()
}

fn uniform_in<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn base_trace<R: Rng>(cfg: &BaseTraceConfig, rng: &mut R) -> WeeklyTrace {
    let phase = if cfg.max_phase_jitter_h > 0.0 {
        rng.random_range(-cfg.max_phase_jitter_h..=cfg.max_phase_jitter_h)
    } else {
        0.0
    };
    let weekend = uniform_in(rng, cfg.weekend_factor);
    let morning_w = rng.random_range(0.6..0.9);
    let plateau_w = rng.random_range(0.35..0.55);
    let sigma = cfg.noise_sigma;
    let values = (0..HOURS_PER_WEEK)
        .map(|h| {
            let t = (h % HOURS_PER_DAY) as f64 - phase;
            let shape = morning_w * bump(t, cfg.morning_peak_hour, 2.0)
                + bump(t, cfg.evening_peak_hour, 2.5)
                + plateau_w * bump(t, 0.5 * (cfg.morning_peak_hour + cfg.evening_peak_hour), 3.5);
            let amplitude = if h >= WEEKEND_START { weekend } else { 1.0 };
            let z: f64 = rng.sample(StandardNormal);
            let noise = (sigma * z - 0.5 * sigma * sigma).exp();
            ((cfg.night_floor + amplitude * shape) * noise).max(0.0)
        })
        .collect();
    WeeklyTrace(values)
}

/// Generates `n` diurnal base traces with the default shape.
pub fn generate_base_traces(n: usize, seed: u64) -> Result<Vec<WeeklyTrace>> {
    generate_base_traces_with(&BaseTraceConfig::default(), n, seed)
}

pub fn generate_base_traces_with(
    cfg: &BaseTraceConfig,
    n: usize,
    seed: u64,
) -> Result<Vec<WeeklyTrace>> {
    if n == 0 {
        return Err(invalid("number of base traces must be >= 1"));
    }
    cfg.validate()?;
    Ok(par::map_indexed(Execution::Parallel, n, |i| {
        base_trace(cfg, &mut indexed_rng(seed, Stream::BaseTraces, i as u64))
    }))
}

/// Generates `m` per-BS target statistics with the default distributions.
pub fn generate_target_stats(m: usize, seed: u64) -> Result<Vec<BSStats>> {
    generate_target_stats_with(&TargetStatsConfig::default(), m, seed)
}

pub fn generate_target_stats_with(
    cfg: &TargetStatsConfig,
    m: usize,
    seed: u64,
) -> Result<Vec<BSStats>> {
    if m == 0 {
        return Err(invalid("number of target BSs must be >= 1"));
    }
    cfg.validate()?;
    let capacity_law = LogNormal::new(cfg.capacity_median_mbps.ln(), cfg.capacity_sigma)
        .map_err(|e| invalid(e.to_string()))?;
    let (ml_lo, ml_hi) = cfg.max_load_range;
    let stats = (0..m)
        .map(|i| {
            let mut rng = indexed_rng(seed, Stream::TargetStats, i as u64);
            let capacity: f64 = capacity_law.sample(&mut rng);
            let max_load = uniform_in(&mut rng, (ml_lo.ln(), ml_hi.ln())).exp().min(1.0);
            let peak = max_load * capacity;
            let p5 = peak * uniform_in(&mut rng, cfg.p5_ratio_range);
            let mean = p5 + (peak - p5) * uniform_in(&mut rng, cfg.mean_position_range);
            BSStats { peak, p5, mean, capacity, max_load }
        })
        .collect::<Vec<_>>();
    for s in &stats {
        s.validate()?;
    }
    Ok(stats)
}

/// Affine map sending the base's p5 to `target.p5` and its peak to
/// `target.peak`; negative outputs are clipped to zero.
pub fn scale_trace(base: &WeeklyTrace, target: &BSStats) -> Result<WeeklyTrace> {
    let anchors = (base.peak(), base.p5());
    let values = scaled_values(base, anchors, target)?.collect();
    Ok(WeeklyTrace(values))
}

fn scaled_values<'a>(
    base: &'a WeeklyTrace,
    (peak, p5): (f64, f64),
    target: &'a BSStats,
) -> Result<impl Iterator<Item = f64> + 'a> {
    if !(peak > p5) {
        return Err(SimError::DegenerateTrace(peak));
    }
    let slope = (target.peak - target.p5) / (peak - p5);
    Ok(base.values().iter().map(move |&v| {
        if v == peak {
            target.peak
        } else {
            (target.p5 + slope * (v - p5)).max(0.0)
        }
    }))
}

/// Index of the base whose scaled version has the mean closest to
/// `target.mean` (lowest index wins ties), together with that scaled trace.
pub fn match_trace_indexed(bases: &[WeeklyTrace], target: &BSStats) -> Result<(usize, WeeklyTrace)> {
    let anchors: Vec<(f64, f64)> = bases.iter().map(|b| (b.peak(), b.p5())).collect();
    match_with_anchors(bases, &anchors, target)
}

fn match_with_anchors(
    bases: &[WeeklyTrace],
    anchors: &[(f64, f64)],
    target: &BSStats,
) -> Result<(usize, WeeklyTrace)> {
    if bases.is_empty() {
        return Err(invalid("match_trace needs at least one base trace"));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, (base, &a)) in bases.iter().zip(anchors).enumerate() {
        let Ok(values) = scaled_values(base, a, target) else { continue };
        let mean = values.sum::<f64>() / HOURS_PER_WEEK as f64;
        let dev = (mean - target.mean).abs();
        if best.is_none_or(|(_, d)| dev < d) {
            best = Some((i, dev));
        }
    }
    let (i, _) = best.ok_or(SimError::NoCandidate(bases.len()))?;
    let values = scaled_values(&bases[i], anchors[i], target)?.collect();
    Ok((i, WeeklyTrace(values)))
}

pub fn match_trace(bases: &[WeeklyTrace], target: &BSStats) -> Result<WeeklyTrace> {
    match_trace_indexed(bases, target).map(|(_, t)| t)
}

/// Weekly per-BS traffic for the study area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficScenario {
    pub traces: Vec<WeeklyTrace>,
    pub stats: Vec<BSStats>,
    pub area_km2: f64,
}

impl TrafficScenario {
    pub fn new(traces: Vec<WeeklyTrace>, stats: Vec<BSStats>, area_km2: f64) -> Result<Self> {
        let s = Self { traces, stats, area_km2 };
        s.validate()?;
        Ok(s)
    }

    pub fn n_bs(&self) -> usize {
        self.traces.len()
    }

    pub fn rate(&self, bs: usize, hour: usize) -> f64 {
        self.traces[bs].values()[hour]
    }

    /// Rates of every BS at one hour.
    pub fn hour_rates(&self, hour: usize) -> Vec<f64> {
        self.traces.iter().map(|t| t.values()[hour]).collect()
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.capacity).collect()
    }

    pub fn total_rate(&self, hour: usize) -> f64 {
        self.traces.iter().map(|t| t.values()[hour]).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.traces.is_empty() {
            return Err(invalid("scenario has no BSs"));
        }
        if self.traces.len() != self.stats.len() {
            return Err(invalid(format!(
                "{} traces but {} stats",
                self.traces.len(),
                self.stats.len()
            )));
        }
        if !(self.area_km2 > 0.0) {
            return Err(invalid("area must be positive"));
        }
        for (i, (trace, stats)) in self.traces.iter().zip(&self.stats).enumerate() {
            stats.validate()?;
            let limit = stats.load_limit() * (1.0 + LOAD_TOLERANCE);
            if let Some(h) = trace.values().iter().position(|&v| v > limit) {
                return Err(invalid(format!(
                    "BS {i} hour {h}: rate exceeds max_load x capacity"
                )));
            }
        }
        Ok(())
    }
}

/// Knobs for building a scenario end-to-end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub n_bases: usize,
    pub m_targets: usize,
    pub seed: u64,
    pub area_km2: f64,
    pub base: BaseTraceConfig,
    pub targets: TargetStatsConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_bases: 1419,
            m_targets: 960,
            seed: 2015,
            area_km2: 30.0,
            base: BaseTraceConfig::default(),
            targets: TargetStatsConfig::default(),
        }
    }
}

pub fn build_scenario(n_bases: usize, m_targets: usize, seed: u64) -> Result<TrafficScenario> {
    build_scenario_with(&ScenarioConfig { n_bases, m_targets, seed, ..Default::default() })
}

pub fn build_scenario_with(cfg: &ScenarioConfig) -> Result<TrafficScenario> {
    if cfg.n_bases == 0 || cfg.m_targets == 0 {
        return Err(invalid("n_bases and m_targets must both be >= 1"));
    }
    let bases = generate_base_traces_with(&cfg.base, cfg.n_bases, cfg.seed)?;
    let stats = generate_target_stats_with(&cfg.targets, cfg.m_targets, cfg.seed)?;
    let anchors: Vec<(f64, f64)> = bases.iter().map(|b| (b.peak(), b.p5())).collect();
    let traces = par::map_slice(Execution::Parallel, &stats, |s| {
        match_with_anchors(&bases, &anchors, s).map(|(_, t)| t)
    })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    TrafficScenario::new(traces, stats, cfg.area_km2)
}
