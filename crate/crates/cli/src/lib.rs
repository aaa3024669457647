//! Command-line front end for `dirac-core`.

pub mod analysis;
pub mod commands;
pub mod csv;
pub mod error;
pub mod model;
pub mod report;
pub mod verify;

/// Seed for randomized checks, from `DIRAC_MECH_SEED` (default 0).
pub fn seed_from_env() -> Result<u64, error::CliError> {
    match std::env::var("DIRAC_MECH_SEED") {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| error::CliError::Input(format!("DIRAC_MECH_SEED must be an unsigned integer, got {v:?}"))),
    }
}
