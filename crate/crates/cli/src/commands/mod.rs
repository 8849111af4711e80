//! Subcommand implementations.

pub mod evaluate;
pub mod fit;
pub mod roundtrip;
pub mod synth;
pub mod train;

use std::path::Path;

use crate::{CliError, CliResult};

/// Create the run directory (and parents) if needed.
pub fn ensure_out_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))
}

/// Path rendered as given on the command line, for config echoes.
pub fn display_path(path: &Path) -> String {
    path.display().to_string()
}

/// Attach the file path to bare I/O errors so missing files are reported
/// with their location.
pub fn with_path<T>(result: shapespace::Result<T>, path: &Path) -> CliResult<T> {
    result.map_err(|e| match e {
        shapespace::Error::Io(io) => CliError::Runtime(format!("{}: {io}", path.display())),
        other => other.into(),
    })
}
