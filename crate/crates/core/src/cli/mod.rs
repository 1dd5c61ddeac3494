//! Command-line harness: single runs from a JSON config, benchmark suites
//! over budget grids with replicates, and zooming statistics.

mod bench;
mod config;
mod output;
mod run;
mod zoom;

pub use bench::{
    adversary_levels, cmd_bench, common_seed, AdversaryCheck, BenchOptions, BenchReport, BenchSummary, CellSummary,
    ScheduleLength, SlopeFit, Suite,
};
pub use config::{EvaluatorBlock, ExperimentConfig};
pub use output::{read_results, run_id, write_json, write_results, write_trace, ResultRow, RESULT_COLUMNS};
pub use run::cmd_run;
pub use zoom::{cmd_zoom, parse_r_list, ZoomReport};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "BLIE_WORKERS";

/// Exit status for configuration errors.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for run failures.
pub const EXIT_RUN: u8 = 1;

/// Exit status for an error: configuration problems map to 2, everything
/// else to 1.
pub fn exit_code(err: &crate::Error) -> u8 {
    match err {
        crate::Error::Config(_) | crate::Error::InvalidArgument(_) => EXIT_CONFIG,
        _ => EXIT_RUN,
    }
}
