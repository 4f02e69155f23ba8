//! Configuration-driven pipelines: resonance tuning, scenario runs, sweeps and their outputs.

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;
mod tune;

pub use config::ScenarioConfig;
pub use run::{
    execute_collective, execute_evolve, execute_steady, resolve, run_collective, run_evolve, run_rates, run_spectrum,
    run_steady, run_tune, EvolveReport, EvolveRun, Resolved, RunOverrides,
};
pub use sweep::{execute_sweep, run_sweep, SweepReport, SweepRow};
pub use tune::{
    delta_plus_small, transfer_objective, tune_resonance, ObjectiveSample, ResonanceSpec, ResonanceTuneResult,
    TuneOptions,
};
