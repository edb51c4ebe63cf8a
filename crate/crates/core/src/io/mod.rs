//! File formats and the dataset directory layout.

mod layout;
mod pgm;
mod report;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use layout::{
    load_sample_set, DatasetLayout, ANNOTATIONS_DIR, PREDICTIONS_DIR, PROBMAPS_DIR, TRUTH_DIR,
};
pub use pgm::{
    decode_mask, decode_probmap, encode_mask, encode_probmap, quantize_probability, read_mask,
    read_mask_with_threshold, read_probmap, write_mask, write_probmap, DEFAULT_THRESHOLD,
};
pub use report::{
    decode_report, encode_report, format_float, read_report, write_report, ReportRow, REPORT_HEADER,
};

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, creating parent directories as needed. Readers never observe a
/// partially written file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let mut tmp = tempfile::Builder::new()
        .prefix(".tmp-")
        .tempfile_in(parent)
        .map_err(|e| Error::io(parent, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
