//! File formats, flat layouts, statistics and the command implementations
//! behind the `penner` binary. Formats are documented in `FORMATS.md`.

pub mod commands;
pub mod cones;
pub mod config;
pub mod lambda;
pub mod layout;
pub mod obj;
pub mod runlog;
pub mod stats;

use std::path::Path;

use crate::error::Result;

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
