//! Runs a small study on the default scenario and prints per-trial headlines.
//!
//! cargo run --release -p hapsim-core --example quick_study -- [trials]

use hapsim_core::linkbudget::ChannelTables;
use hapsim_core::metrics::{energy_saving_with_baseline, weekly_offloaded_fraction, PeriodMask};
use hapsim_core::montecarlo::{Study, StudyConfig};
use hapsim_core::traffic::{build_scenario_with, ScenarioConfig};
use hapsim_core::Execution;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20);
    let scenario = build_scenario_with(&ScenarioConfig::default())?;
    let config = StudyConfig { n_trials: trials, ..Default::default() };
    let study = Study::new(config, scenario, ChannelTables::default())?;
    let results = study.run_study(Execution::Parallel)?;
    let masks = PeriodMask::standard();
    println!("trial  elev  indoor  trad   c_haps   week  night  wkday  wkend  offl  never");
    for r in &results {
        let s: Vec<f64> = masks
            .iter()
            .map(|m| energy_saving_with_baseline(r, study.baseline_per_hour(), m))
            .collect::<Result<_, _>>()?;
        println!(
            "{:5} {:5.0} {:7.3} {:5.3} {:8.1} {:6.3} {:6.3} {:6.3} {:6.3} {:5.3} {:6}",
            r.trial,
            r.elevation_deg,
            r.indoor_frac,
            r.traditional_frac,
            r.c_haps,
            s[0],
            s[1],
            s[2],
            s[3],
            weekly_offloaded_fraction(r, &study.scenario)?,
            r.never_active_bs_count
        );
    }
    Ok(())
}
