//! Scenario files, pipelines, reports and the verification suite.

mod pipelines;
mod report;
mod scenario;
mod verify;

pub use pipelines::execute;
pub use report::{emit_plotdata, format_num, write_report, Cell, PlotKind, Report, ReportFiles, Series, CONVENTIONS};
pub use scenario::{resolve_function_name, FunctionRef, OutputSpec, Pipeline, Scenario};
pub use verify::{run_check, verify_suite, verify_suite_with, CheckResult, CheckStatus, Level, VerifyOptions, VerifySummary, CHECKS};

use crate::error::Result;
use std::path::{Path, PathBuf};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "DISKLAB_OUT";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    /// Replaces the scenario tolerance.
    pub tol: Option<f64>,
}

/// Output directory: explicit option, then `DISKLAB_OUT`, then the
/// scenario's `output.dir` relative to its file, then `.`.
pub fn output_dir(sc: &Scenario, opts: &RunOptions) -> PathBuf {
    if let Some(d) = &opts.out_dir {
        return d.clone();
    }
    if let Some(d) = std::env::var_os(OUT_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(d);
    }
    match &sc.output.dir {
        Some(d) if d.is_absolute() => d.clone(),
        Some(d) => sc.base_dir.join(d),
        None => PathBuf::from("."),
    }
}

/// Load, run and write one scenario.
pub fn run_scenario(path: &Path, opts: &RunOptions) -> Result<(Report, ReportFiles)> {
    let mut sc = Scenario::load(path)?;
    if let Some(tol) = opts.tol {
        sc.tol = tol;
        sc.validate()?;
    }
    let report = execute(&sc)?;
    let files = write_report(&report, &output_dir(&sc, opts))?;
    Ok((report, files))
}
