//! The `hapsim` command line: scenario generation, single-trial inspection
//! and full studies.
//!
//! Exit codes: 0 success, 2 configuration/validation, 3 IO, 4 runtime failure.

pub mod config;
pub mod manifest;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::ffi::OsString;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use hapsim_core::capacity::TrialConfig;
use hapsim_core::io::{self as simio, IoError};
use hapsim_core::metrics::{
    capacity_utilization, energy_saving_with_baseline, offloaded_fraction, sorted_saving_curves,
    weekly_offloaded_fraction, PeriodMask,
};
use hapsim_core::montecarlo::Study;
use hapsim_core::traffic::{build_scenario_with, percentile_nearest_rank, TrafficScenario};
use hapsim_core::{par, Execution, SimError};

use config::RunConfig;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_RUNTIME: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "hapsim", version, about = "HAPS offloading energy-saving simulator")]
struct Cli {
    /// TOML run configuration; omitted fields use the reference parameters.
    #[arg(long, global = true, env = "HAPSIM_CONFIG")]
    config: Option<PathBuf>,

    /// Disable shadow fading (debugging / paired experiments only).
    #[arg(long, global = true, env = "HAPSIM_NO_SHADOW_FADING")]
    no_shadow_fading: bool,

    /// Disable building entry loss (debugging / paired experiments only).
    #[arg(long, global = true, env = "HAPSIM_NO_BEL")]
    no_bel: bool,

    /// Channel-table JSON replacing the shipped dense-urban S-band data.
    #[arg(long, global = true, env = "HAPSIM_CHANNEL_TABLES")]
    channel_tables: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and cache a traffic scenario (CSV plus JSON sidecar).
    Scenario(ScenarioArgs),
    /// Run the Monte Carlo study and write metric tables.
    Run(RunArgs),
    /// Run one fully specified trial and print its results.
    Trial(TrialArgs),
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Output CSV path; the sidecar is written next to it with a .json extension.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = "HAPSIM_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    n_bases: Option<usize>,
    #[arg(long)]
    m_targets: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario CSV written by `hapsim scenario`.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = "HAPSIM_TRIALS")]
    trials: Option<usize>,
    #[arg(long, env = "HAPSIM_SEED")]
    seed: Option<u64>,
    /// Worker threads for the trial pool.
    #[arg(long, env = "HAPSIM_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct TrialArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    elevation: f64,
    #[arg(long)]
    indoor: f64,
    #[arg(long)]
    traditional: f64,
    /// Seed of the UE population streams.
    #[arg(long, env = "HAPSIM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "HAPSIM_THREADS")]
    threads: Option<usize>,
    /// Also write the per-BS schedule as `hour,bs_id,active,energy`.
    #[arg(long)]
    schedule_out: Option<PathBuf>,
    /// Print the trial result as JSON instead of tables.
    #[arg(long)]
    json: bool,
}

/// An error with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_CONFIG, error: error.into() }
    }

    fn io(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_IO, error: error.into() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Io { .. } => EXIT_IO,
            IoError::Format { .. } => EXIT_CONFIG,
            IoError::Sim(ref s) => sim_code(s),
        };
        Self { code, error: e.into() }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Self { code: sim_code(&e), error: e.into() }
    }
}

fn sim_code(e: &SimError) -> u8 {
    match e {
        SimError::InvalidArgument(_) | SimError::Malformed(_) | SimError::DegenerateTrace(_) => {
            EXIT_CONFIG
        }
        _ => EXIT_RUNTIME,
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    let outcome = RunConfig::load(cli.config.as_deref())
        .map_err(Failure::config)
        .and_then(|mut cfg| {
            if cli.no_shadow_fading {
                cfg.capacity.switches.shadow_fading = false;
            }
            if cli.no_bel {
                cfg.capacity.switches.entry_loss = false;
            }
            if let Some(p) = &cli.channel_tables {
                cfg.channel_tables = Some(p.clone());
            }
            match &cli.command {
                Command::Scenario(a) => cmd_scenario(cfg, a),
                Command::Run(a) => cmd_run(cfg, a),
                Command::Trial(a) => cmd_trial(cfg, a),
            }
        });
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}

fn quartiles(mut v: Vec<f64>) -> [f64; 3] {
    v.sort_by(f64::total_cmp);
    [25.0, 50.0, 75.0].map(|p| percentile_nearest_rank(&v, p))
}

fn cmd_scenario(mut cfg: RunConfig, args: &ScenarioArgs) -> CmdResult {
    if let Some(s) = args.seed {
        cfg.scenario.seed = s;
    }
    if let Some(n) = args.n_bases {
        cfg.scenario.n_bases = n;
    }
    if let Some(m) = args.m_targets {
        cfg.scenario.m_targets = m;
    }
    let scenario = build_scenario_with(&cfg.scenario)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(Failure::io)?;
    }
    simio::write_scenario(&scenario, &args.out)?;

    let weekly: f64 = scenario.traces.iter().map(|t| t.values().iter().sum::<f64>()).sum();
    let mean_load: Vec<f64> =
        scenario.traces.iter().zip(&scenario.stats).map(|(t, s)| t.mean() / s.capacity).collect();
    let peak_load: Vec<f64> = scenario.stats.iter().map(|s| s.peak / s.capacity).collect();
    let [m1, m2, m3] = quartiles(mean_load);
    let [p1, p2, p3] = quartiles(peak_load);
    println!("scenario: {}", args.out.display());
    println!("  base traces      {}", cfg.scenario.n_bases);
    println!("  BSs (N)          {}", scenario.n_bs());
    println!("  area             {} km2", scenario.area_km2);
    println!("  weekly volume    {:.1} Mbps-hours", weekly);
    println!("  mean load q1/q2/q3  {m1:.4} / {m2:.4} / {m3:.4}");
    println!("  peak load q1/q2/q3  {p1:.4} / {p2:.4} / {p3:.4}");
    Ok(())
}

fn load_study(cfg: &RunConfig, scenario_path: &Path) -> std::result::Result<Study, Failure> {
    if !scenario_path.exists() {
        return Err(Failure::config(anyhow::anyhow!(
            "scenario {} not found (create it with `hapsim scenario`)",
            scenario_path.display()
        )));
    }
    let scenario: TrafficScenario = simio::read_scenario(scenario_path)?;
    let tables = cfg.tables().map_err(Failure::config)?;
    Ok(Study::new(cfg.study_config(), scenario, tables)?)
}

fn create_file(path: &Path) -> std::result::Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(Failure::io)
}

fn cmd_run(mut cfg: RunConfig, args: &RunArgs) -> CmdResult {
    if let Some(n) = args.trials {
        cfg.study.n_trials = n;
    }
    if let Some(s) = args.seed {
        cfg.study.master_seed = s;
    }
    if args.threads == Some(0) {
        return Err(Failure::config(anyhow::anyhow!("--threads must be >= 1")));
    }
    let study = load_study(&cfg, &args.scenario)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .map_err(Failure::io)?;

    let started = manifest::unix_now();
    let clock = Instant::now();
    let results = par::with_threads(args.threads, || study.run_study(Execution::Parallel))?;
    let elapsed = clock.elapsed().as_secs_f64();

    let baseline = study.baseline_per_hour();
    let curves = sorted_saving_curves(&results, baseline, &PeriodMask::standard())?;
    let files = [
        manifest::FIGURE2,
        manifest::FIGURE3,
        manifest::FIGURE45,
        manifest::HOURLY_SUMMARY,
        manifest::TRIALS,
    ];
    let path = |name: &str| args.out.join(name);
    simio::write_curves_csv(create_file(&path(files[0]))?, &curves)?;
    simio::write_parametric_csv(create_file(&path(files[1]))?, &results, baseline)?;
    simio::write_hourly_csv(create_file(&path(files[2]))?, &results, &study.scenario)?;
    simio::write_hourly_summary_csv(create_file(&path(files[3]))?, &results, &study.scenario)?;
    simio::write_trials_csv(create_file(&path(files[4]))?, &results, &study.scenario, baseline)?;

    let m = manifest::Manifest::new(&cfg, &args.scenario, args.threads, started, elapsed, &files)
        .map_err(Failure::io)?;
    m.write(&path(manifest::MANIFEST)).map_err(Failure::io)?;

    let week = curves.column("week").unwrap_or_default();
    let night = curves.column("night").unwrap_or_default();
    let never: Vec<usize> = results.iter().map(|r| r.never_active_bs_count).collect();
    println!(
        "{} trials in {:.1} s -> {}",
        results.len(),
        elapsed,
        args.out.display()
    );
    if let (Some(wl), Some(wh), Some(nl), Some(nh)) =
        (week.first(), week.last(), night.first(), night.last())
    {
        println!("  week saving   {:.1}% .. {:.1}%", 100.0 * wl, 100.0 * wh);
        println!("  night saving  {:.1}% .. {:.1}%", 100.0 * nl, 100.0 * nh);
    }
    println!(
        "  never-active BSs {} .. {}",
        never.iter().min().unwrap_or(&0),
        never.iter().max().unwrap_or(&0)
    );
    Ok(())
}

fn cmd_trial(cfg: RunConfig, args: &TrialArgs) -> CmdResult {
    let sc = cfg.study_config();
    let in_range = |v: f64, (lo, hi): (f64, f64)| lo <= v && v <= hi;
    if !sc.elevation_set.contains(&args.elevation) {
        return Err(Failure::config(anyhow::anyhow!(
            "--elevation {} not in configured set {:?}",
            args.elevation,
            sc.elevation_set
        )));
    }
    if !in_range(args.indoor, sc.indoor_range) {
        return Err(Failure::config(anyhow::anyhow!(
            "--indoor {} outside {:?}",
            args.indoor,
            sc.indoor_range
        )));
    }
    if !in_range(args.traditional, sc.traditional_range) {
        return Err(Failure::config(anyhow::anyhow!(
            "--traditional {} outside {:?}",
            args.traditional,
            sc.traditional_range
        )));
    }
    if args.threads == Some(0) {
        return Err(Failure::config(anyhow::anyhow!("--threads must be >= 1")));
    }
    let study = load_study(&cfg, &args.scenario)?;
    let trial_cfg = TrialConfig {
        elevation_deg: args.elevation,
        indoor_frac: args.indoor,
        traditional_frac: args.traditional,
        ue_density_per_km2: sc.ue_density_per_km2,
        area_km2: study.scenario.area_km2,
        n_carriers: sc.n_carriers,
        rng_stream: args.seed,
    };
    let (result, schedule) = par::with_threads(args.threads, || {
        study.run_trial_detailed(0, &trial_cfg, Execution::Parallel)
    })?;

    if let Some(p) = &args.schedule_out {
        simio::write_schedule_csv(create_file(p)?, &schedule, &study.scenario, &study.config.energy)?;
    }
    if args.json {
        let text = serde_json::to_string_pretty(&result).map_err(Failure::io)?;
        println!("{text}");
        return Ok(());
    }

    let baseline = study.baseline_per_hour();
    println!(
        "elevation {} deg, indoor {}, traditional {}, seed {}",
        args.elevation, args.indoor, args.traditional, args.seed
    );
    println!("c_haps_mbps {}", result.c_haps);
    for mask in PeriodMask::standard() {
        println!(
            "saving_{} {}",
            mask.name,
            energy_saving_with_baseline(&result, baseline, &mask)?
        );
    }
    println!("offloaded_frac_week {}", weekly_offloaded_fraction(&result, &study.scenario)?);
    println!("never_active_bs {}", result.never_active_bs_count);
    println!("hour,offloaded_count,active_count,offloaded_mbps,offloaded_frac,utilization");
    for h in 0..result.offloaded_rate.len() {
        println!(
            "{},{},{},{},{},{}",
            h,
            result.offloaded_count[h],
            result.active_count[h],
            result.offloaded_rate[h],
            offloaded_fraction(&result, &study.scenario, h)?,
            capacity_utilization(&result, &study.scenario, h)?
        );
    }
    Ok(())
}
