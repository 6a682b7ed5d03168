//! Model files, reports and the command-line front end. Every integer that
//! leaves the process is written as a decimal string.

pub mod cli;
pub mod decimal;
mod model_file;

pub use model_file::{
    load_model, model_from_json, model_to_json, save_coo, save_model, write_coo, ModelFile, ModelMetadata, TermEntry,
    FORMAT_VERSION,
};

use crate::error::{Error, Result};
use crate::search::SolveReport;

/// Pretty JSON with a trailing newline.
pub fn report_to_json(report: &SolveReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn report_from_json(text: &str) -> Result<SolveReport> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}
