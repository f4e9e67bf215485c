//! Command-line front end: configs, the acceptance criteria, reports.

pub mod checks;
pub mod commands;
pub mod config;
pub mod output;
pub mod report;

pub use config::{Command, RunConfig};
pub use report::{Outcome, Report};

use symlab_core::Error;

/// Errors caused by the input rather than by a computation.
pub fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Invalid(_) | Error::Dimension(_) | Error::OutsideDomain { .. } | Error::Characteristic(_) | Error::Parse { .. }
    )
}
