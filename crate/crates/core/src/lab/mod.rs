//! Measure files, verification suites, simulation runs and their reports.
//! The `gwass` binary is a thin layer over this module.

pub mod io;
pub mod random;
pub mod report;
pub mod simulate;
pub mod suites;

pub use report::{Check, SuiteReport};
pub use simulate::{run_simulation, SimulateConfig, SimulationSummary};
pub use suites::{run_suite, Suite};

/// Seed used by the randomized suites unless overridden.
pub const DEFAULT_SEED: u64 = 0x5EED_2024;

/// Environment variable that overrides [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "GWASS_SEED";

/// `explicit`, else `$GWASS_SEED`, else [`DEFAULT_SEED`].
pub fn resolve_seed(explicit: Option<u64>) -> crate::Result<u64> {
    if let Some(seed) = explicit {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| crate::Error::InvalidParams(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
