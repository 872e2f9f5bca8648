//! Configuration, study drivers and report formats behind the `tldg` binary.

pub mod config;
pub mod report;
pub mod studies;

pub use config::{ProblemKind, StudyConfig, TauRule};
pub use report::{eoc, ConvergenceReport, Refinement, ReportRow};
pub use studies::{
    run_profile, run_solve, run_spatial_study, run_stability_sweep, run_temporal_study, Profile,
    SolveSummary, StabilityOutcome, StabilityRun,
};

use crate::error::Error;

/// Process exit code for an outcome: 0 ok, 1 configuration, 2 solver, 3 stability violation.
pub fn exit_code(err: Option<&Error>, stability_violated: bool) -> i32 {
    match err {
        None if stability_violated => 3,
        None => 0,
        Some(Error::Config(_)) | Some(Error::Io(_)) => 1,
        Some(_) => 2,
    }
}
