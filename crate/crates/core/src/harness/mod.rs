//! Configuration, sampling and scenario runners.
//!
//! A run is fully determined by its [`ExperimentConfig`] and seed: every
//! random stream is derived from `(seed, task, chunk)`, so the report body is
//! identical for any worker count.

pub mod config;
pub mod model;
pub mod rate;
pub mod raw;
pub mod report;
pub mod sampler;
pub mod scenarios;

use std::time::Instant;

pub use config::{
    Calibration, EmitterConfig, ExperimentConfig, InterferenceConfig, ScenarioId, SweepConfig,
    TimingConfig, PRESETS, SCHEMA_VERSION,
};
pub use model::{conditional_success_estimate, HeraldModel};
pub use rate::{rate_arithmetic, RateReport};
pub use raw::{simulate_raw, RawTally};
pub use report::{emit_report, CountsTable, ReportBody, ReportMeta, RunReport, SweepTable};
pub use sampler::thread_pool;

use crate::error::{Error, Result};
use crate::witness::GhzSpec;

/// Which GHZ state a three-node run targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GhzKind {
    /// Three photons and three memories.
    Six,
    /// Three memories after measuring the photons.
    Three,
}

impl GhzKind {
    pub fn spec(self) -> Result<GhzSpec> {
        match self {
            GhzKind::Six => Ok(GhzSpec::six_qubit_hybrid()),
            GhzKind::Three => GhzSpec::three_memory(1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GhzKind::Six => "ghz6",
            GhzKind::Three => "ghz3",
        }
    }
}

/// Runs the configured scenario on `workers` threads (0 = all cores).
pub fn run_scenario(cfg: &ExperimentConfig, workers: usize) -> Result<RunReport> {
    cfg.validate()?;
    let scenario = cfg
        .scenario
        .ok_or_else(|| Error::Config("no scenario selected".into()))?;
    let pool = thread_pool(workers)?;
    let start = Instant::now();
    let (seed, samples) = (cfg.seed, cfg.samples);
    let out = match scenario {
        ScenarioId::PairTomography => scenarios::pair_tomography(cfg, &pool, seed, samples)?,
        ScenarioId::RamanDelaySweep => scenarios::raman_delay_sweep(cfg, &pool, seed, samples)?,
        ScenarioId::LifetimeSweep => scenarios::lifetime_sweep(cfg, &pool, seed, samples)?,
        ScenarioId::TwoNodeSwap => scenarios::two_node_swap(cfg)?,
        ScenarioId::Ghz6 => scenarios::ghz(cfg, GhzKind::Six, &pool, seed, samples)?,
        ScenarioId::Ghz3 => scenarios::ghz(cfg, GhzKind::Three, &pool, seed, samples)?,
    };
    let mut config = cfg.clone();
    config.output_dir = None;
    let body = ReportBody {
        scenario,
        seed,
        samples,
        config,
        rates: rate_arithmetic(cfg)?,
        coincidence_tables: out.coincidence_tables,
        setting_counts: out.setting_counts,
        derived: out.derived,
        sweeps: out.sweeps,
    };
    let meta = ReportMeta {
        wall_time_s: start.elapsed().as_secs_f64(),
        software_version: env!("CARGO_PKG_VERSION").into(),
        workers: pool.current_num_threads(),
    };
    Ok(RunReport::new(body, meta))
}
