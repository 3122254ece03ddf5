//! Scenario-driven runners that turn the analytic model into CSV datasets,
//! plot scripts and validation reports.

mod csv;
mod plots;
mod runs;
pub mod scenario;

use std::path::PathBuf;

use thiserror::Error;

pub use csv::{format_value, Dataset};
pub use plots::plot_script;
pub use runs::{
    run_fields, run_levels, run_populations, run_truncation_scan, run_validate, time_grid, CheckOutcome, CheckRecord,
    ValidationReport,
};
pub use scenario::{Output, Scenario, ScenarioError, WindowSpec};

/// Version stamp written into every output file.
pub const ARTIFACT_VERSION: &str = concat!("tanpulse ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(#[from] ScenarioError),

    #[error("numerical failure ({context}): {source}")]
    Numerical {
        context: String,
        #[source]
        source: crate::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ExperimentError {
    pub(crate) fn numerical(context: impl Into<String>) -> impl FnOnce(crate::Error) -> Self {
        let context = context.into();
        move |source| ExperimentError::Numerical { context, source }
    }

    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures and I/O. Validation failures (1) are reported through
    /// [`ValidationReport::exit_code`].
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Numerical { .. } | ExperimentError::Io { .. } => 3,
        }
    }
}
