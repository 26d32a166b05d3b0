//! Config-driven runs: build the graph, pick the start node, evolve, measure
//! and write artifacts.

pub mod config;
pub mod presets;
pub mod run;

pub use config::{sub_seed, ExperimentConfig, FitSpec, TopologySpec};
pub use run::{
    fit_metrics_file, run, simulate, sweep, ExperimentError, ExperimentResult, RunManifest,
    RunOptions, RunOutcome, Simulation, Stage, SweepReport,
};

/// Environment variable that, when set, replaces the seed of every config.
pub const SEED_ENV_VAR: &str = "CTQW_SEED";

/// Seed override from [`SEED_ENV_VAR`]. `Ok(None)` when unset, an error
/// message when set to something other than an unsigned integer.
pub fn seed_override() -> Result<Option<u64>, String> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{SEED_ENV_VAR}={v:?} is not an unsigned integer")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("{SEED_ENV_VAR}: {e}")),
    }
}
