//! CSV/JSON persistence: scenario cache, schedule dump and metric tables.
//!
//! Floats are written with Rust's shortest round-trip formatting so that a
//! scenario read back from disk is bit-identical to the one written.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::energy::{bs_energy, sleep_energy};
use crate::error::{Result, SimError};
use crate::metrics::{
    capacity_utilization, energy_saving_with_baseline, offloaded_fraction, weekly_offloaded_fraction,
    PeriodMask, SavingCurves,
};
use crate::montecarlo::TrialResult;
use crate::offload::{EnergyModel, OffloadSchedule};
use crate::traffic::{BSStats, TrafficScenario, WeeklyTrace, HOURS_PER_WEEK};

/// IO or format failure while reading/writing project files.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

fn fmt_err(path: &Path, message: impl ToString) -> IoError {
    IoError::Format { path: path.to_path_buf(), message: message.to_string() }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> IoError + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::Io { path: path.to_path_buf(), source },
        other => fmt_err(path, format!("{other:?}")),
    }
}

/// Path of the JSON sidecar accompanying a scenario CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

#[derive(Serialize, Deserialize)]
struct ScenarioSidecar {
    n_bs: usize,
    area_km2: f64,
    stats: Vec<BSStats>,
}

/// Writes `bs_id,hour,rate_mbps` rows plus the per-BS stats sidecar.
pub fn write_scenario(scenario: &TrafficScenario, csv_path: &Path) -> std::result::Result<(), IoError> {
    let mut w = csv::Writer::from_path(csv_path).map_err(csv_err(csv_path))?;
    w.write_record(["bs_id", "hour", "rate_mbps"]).map_err(csv_err(csv_path))?;
    for (i, trace) in scenario.traces.iter().enumerate() {
        for (h, v) in trace.values().iter().enumerate() {
            w.write_record([i.to_string(), h.to_string(), v.to_string()])
                .map_err(csv_err(csv_path))?;
        }
    }
    w.flush().map_err(io_err(csv_path))?;

    let side = sidecar_path(csv_path);
    let sidecar = ScenarioSidecar {
        n_bs: scenario.n_bs(),
        area_km2: scenario.area_km2,
        stats: scenario.stats.clone(),
    };
    let mut f = BufWriter::new(File::create(&side).map_err(io_err(&side))?);
    serde_json::to_writer_pretty(&mut f, &sidecar).map_err(|e| fmt_err(&side, e))?;
    f.write_all(b"\n").map_err(io_err(&side))?;
    f.flush().map_err(io_err(&side))
}

pub fn read_scenario(csv_path: &Path) -> std::result::Result<TrafficScenario, IoError> {
    let side = sidecar_path(csv_path);
    let f = File::open(&side).map_err(io_err(&side))?;
    let sidecar: ScenarioSidecar =
        serde_json::from_reader(BufReader::new(f)).map_err(|e| fmt_err(&side, e))?;
    if sidecar.stats.len() != sidecar.n_bs {
        return Err(fmt_err(&side, "stats length does not match n_bs"));
    }

    let mut values = vec![vec![f64::NAN; HOURS_PER_WEEK]; sidecar.n_bs];
    let mut r = csv::Reader::from_path(csv_path).map_err(csv_err(csv_path))?;
    let headers = r.headers().map_err(csv_err(csv_path))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["bs_id", "hour", "rate_mbps"] {
        return Err(fmt_err(csv_path, "expected header bs_id,hour,rate_mbps"));
    }
    for (line, rec) in r.deserialize::<(usize, usize, f64)>().enumerate() {
        let (bs, hour, rate) = rec.map_err(csv_err(csv_path))?;
        if bs >= sidecar.n_bs || hour >= HOURS_PER_WEEK {
            return Err(fmt_err(csv_path, format!("row {}: bs {bs} hour {hour} out of range", line + 2)));
        }
        values[bs][hour] = rate;
    }
    let traces = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if v.iter().any(|x| x.is_nan()) {
                return Err(fmt_err(csv_path, format!("BS {i} is missing hours")));
            }
            WeeklyTrace::new(v).map_err(IoError::from)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(TrafficScenario::new(traces, sidecar.stats, sidecar.area_km2)?)
}

/// Per-BS `hour,bs_id,active,energy` rows for one schedule.
pub fn write_schedule_csv<W: Write, M: EnergyModel>(
    w: W,
    schedule: &OffloadSchedule,
    scenario: &TrafficScenario,
    params: &M,
) -> std::result::Result<(), IoError> {
    let path = Path::new("<schedule>");
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["hour", "bs_id", "active", "energy"]).map_err(csv_err(path))?;
    for (h, hour) in schedule.active.iter().enumerate() {
        for (i, &on) in hour.iter().enumerate() {
            let p = params.params_for(i);
            let e = if on {
                bs_energy(p, scenario.rate(i, h), scenario.stats[i].capacity)?
            } else {
                sleep_energy(p)
            };
            w.write_record([h.to_string(), i.to_string(), (on as u8).to_string(), e.to_string()])
                .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// `rank,<mask names...>` rows of independently sorted curves.
pub fn write_curves_csv<W: Write>(w: W, curves: &SavingCurves) -> std::result::Result<(), IoError> {
    let path = Path::new("<curves>");
    let mut w = csv::Writer::from_writer(w);
    let mut header = vec!["rank".to_string()];
    header.extend(curves.names.iter().cloned());
    w.write_record(&header).map_err(csv_err(path))?;
    for rank in 0..curves.len() {
        let mut row = vec![rank.to_string()];
        row.extend(curves.row(rank).iter().map(f64::to_string));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// `trial,elevation,indoor_frac,traditional_frac,saving` with the week saving.
pub fn write_parametric_csv<W: Write>(
    w: W,
    results: &[TrialResult],
    baseline_per_hour: &[f64],
) -> std::result::Result<(), IoError> {
    let path = Path::new("<parametric>");
    let week = PeriodMask::week();
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["trial", "elevation", "indoor_frac", "traditional_frac", "saving"])
        .map_err(csv_err(path))?;
    for r in results {
        let s = energy_saving_with_baseline(r, baseline_per_hour, &week)?;
        w.write_record([
            r.trial.to_string(),
            r.elevation_deg.to_string(),
            r.indoor_frac.to_string(),
            r.traditional_frac.to_string(),
            s.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// `trial,hour,offloaded_frac,utilization` for every trial and hour.
pub fn write_hourly_csv<W: Write>(
    w: W,
    results: &[TrialResult],
    scenario: &TrafficScenario,
) -> std::result::Result<(), IoError> {
    let path = Path::new("<hourly>");
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["trial", "hour", "offloaded_frac", "utilization"]).map_err(csv_err(path))?;
    for r in results {
        for h in 0..HOURS_PER_WEEK {
            w.write_record([
                r.trial.to_string(),
                h.to_string(),
                offloaded_fraction(r, scenario, h)?.to_string(),
                capacity_utilization(r, scenario, h)?.to_string(),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Across-trial summary per hour:
/// `hour,offloaded_frac_mean,offloaded_frac_min,offloaded_frac_max,utilization_mean,active_count_mean`.
pub fn write_hourly_summary_csv<W: Write>(
    w: W,
    results: &[TrialResult],
    scenario: &TrafficScenario,
) -> std::result::Result<(), IoError> {
    let path = Path::new("<hourly-summary>");
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "hour",
        "offloaded_frac_mean",
        "offloaded_frac_min",
        "offloaded_frac_max",
        "utilization_mean",
        "active_count_mean",
    ])
    .map_err(csv_err(path))?;
    let n = results.len() as f64;
    for h in 0..HOURS_PER_WEEK {
        let fracs = results
            .iter()
            .map(|r| offloaded_fraction(r, scenario, h))
            .collect::<Result<Vec<_>>>()?;
        let util = results
            .iter()
            .map(|r| capacity_utilization(r, scenario, h))
            .collect::<Result<Vec<_>>>()?;
        let active: f64 = results.iter().map(|r| r.active_count[h] as f64).sum();
        w.write_record([
            h.to_string(),
            (fracs.iter().sum::<f64>() / n).to_string(),
            fracs.iter().copied().fold(f64::INFINITY, f64::min).to_string(),
            fracs.iter().copied().fold(f64::NEG_INFINITY, f64::max).to_string(),
            (util.iter().sum::<f64>() / n).to_string(),
            (active / n).to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// One row per trial with its parameters, capacity and headline metrics.
pub fn write_trials_csv<W: Write>(
    w: W,
    results: &[TrialResult],
    scenario: &TrafficScenario,
    baseline_per_hour: &[f64],
) -> std::result::Result<(), IoError> {
    let path = Path::new("<trials>");
    let masks = PeriodMask::standard();
    let mut w = csv::Writer::from_writer(w);
    let mut header: Vec<String> = [
        "trial",
        "elevation",
        "indoor_frac",
        "traditional_frac",
        "c_haps_mbps",
        "total_energy",
        "baseline_energy",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(masks.iter().map(|m| format!("saving_{}", m.name)));
    header.push("offloaded_frac_week".into());
    header.push("never_active_bs".into());
    w.write_record(&header).map_err(csv_err(path))?;
    for r in results {
        let mut row = vec![
            r.trial.to_string(),
            r.elevation_deg.to_string(),
            r.indoor_frac.to_string(),
            r.traditional_frac.to_string(),
            r.c_haps.to_string(),
            r.total_energy.to_string(),
            r.baseline_energy.to_string(),
        ];
        for m in &masks {
            row.push(energy_saving_with_baseline(r, baseline_per_hour, m)?.to_string());
        }
        row.push(weekly_offloaded_fraction(r, scenario)?.to_string());
        row.push(r.never_active_bs_count.to_string());
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
