mod barrier;
mod check_fn;
mod cross_validate;
mod run;
mod sphere_test;

pub use barrier::{cmd_barrier, BarrierArgs, BarrierOutput};
pub use check_fn::{cmd_check_fn, CheckFnArgs};
pub use cross_validate::{cmd_cross_validate, cross_validate, CrossRow, CrossValidateArgs, Profile};
pub use run::{
    build_grid, cmd_run, flow_config, initial_state, monitor_reports, outcome_error, Manifest, RunOutcome,
    SnapshotEntry,
};
pub use sphere_test::{cmd_sphere_test, sphere_convergence, ConvergenceRow, SphereTestArgs};

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

pub fn tool_info() -> ToolInfo {
    ToolInfo {
        name: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub(crate) fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
        writeln!(w)
    })
}
