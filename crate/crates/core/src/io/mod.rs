//! Run configuration, diagnostics CSV and binary checkpoints.

mod checkpoint;
mod config;
mod diagnostics_csv;

use std::io::Write;
use std::path::Path;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{
    checkpoint_file_name, config_hash, load_config, parse_config, GridConfig, OutputConfig, ProbeConfig, RunConfig,
    ValidateConfig,
};
pub use diagnostics_csv::{diagnostics_to_csv, read_diagnostics, write_diagnostics, DIAGNOSTICS_HEADER};

use crate::error::{Error, Result};

/// Writes `bytes` to a temporary file beside `path`, then renames it into
/// place so readers never observe a partial file.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
