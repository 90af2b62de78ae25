//! Named experiments: TOML configuration, pipelines and CSV/JSON reports.

mod config;
mod pipelines;
mod report;

pub use config::*;
pub use pipelines::{run_experiment, validate};
pub use report::{
    emit_report, format_num, format_q, to_json_string, Cell, Comparison, ExperimentReport, ReportFormat, Table,
    Verdict,
};
