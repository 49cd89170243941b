//! Seeded experiment runner and verification commands behind the
//! `tightmean` binary.

pub mod checks;
pub mod config;
pub mod coverage;
pub mod dist;
pub mod report;

pub use checks::{cmd_geometry_verify, cmd_psi_check, cmd_robust_verify, cmd_tester_eval};
pub use config::{ConfigError, EstimatorKind, ExperimentConfig, Format, Overrides};
pub use coverage::{cmd_coverage, determinism_hash, run_coverage, CoverageOutcome, CoverageSummary, TrialReport};

/// A verification check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Bad flags, config file or parameters.
pub const EXIT_CONFIG: i32 = 2;
/// Reading or writing a file failed.
pub const EXIT_IO: i32 = 3;

/// Exit code for an error returned by a command.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    let io = err
        .chain()
        .any(|e| e.is::<std::io::Error>() || e.downcast_ref::<csv::Error>().is_some_and(|c| c.is_io_error()));
    if io && err.downcast_ref::<ConfigError>().is_none() {
        EXIT_IO
    } else {
        EXIT_CONFIG
    }
}
