//! Sequential vs rayon execution of the two hot loops: per-UE rates inside
//! one trial, and whole trials across a study.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hapsim_core::capacity::{sample_ue_population, ue_rates_bps, CapacityOptions, TrialConfig};
use hapsim_core::linkbudget::{ChannelTables, LinkParams};
use hapsim_core::montecarlo::{Study, StudyConfig};
use hapsim_core::traffic::build_scenario;
use hapsim_core::Execution;

const STRATEGIES: [(&str, Execution); 2] =
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ue_rates(c: &mut Criterion) {
    let tables = ChannelTables::dense_urban_s_band();
    let params = LinkParams::default();
    let ues = sample_ue_population(&TrialConfig::default(), &tables).unwrap();
    let mut g = c.benchmark_group("ue_rates_90k");
    for (name, exec) in STRATEGIES {
        let opts = CapacityOptions { execution: exec, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| ue_rates_bps(&params, &tables, black_box(&ues), &opts).unwrap())
        });
    }
    g.finish();
}

fn study(c: &mut Criterion) {
    let cfg = StudyConfig { n_trials: 8, ..Default::default() };
    let s = Study::new(cfg, build_scenario(300, 240, 1).unwrap(), ChannelTables::dense_urban_s_band()).unwrap();
    let mut g = c.benchmark_group("study_8_trials");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| s.run_study(black_box(exec)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, ue_rates, study);
criterion_main!(benches);
