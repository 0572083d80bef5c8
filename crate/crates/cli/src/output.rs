//! Table and report formatting plus atomic file writes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use qinfluence_core::DetectorPattern;
use serde::Serialize;

/// Scientific notation with 16 significant digits. Deterministic, and
/// enough to round-trip an `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn pattern_csv(pattern: &DetectorPattern) -> String {
    let mut out = String::from("x,probability,intensity\n");
    for ((x, p), i) in pattern
        .bin_centers()
        .iter()
        .zip(pattern.probabilities())
        .zip(pattern.intensity())
    {
        out.push_str(&format!("{},{},{}\n", num(*x), num(*p), num(*i)));
    }
    out
}

pub fn write_pattern_csv(pattern: &DetectorPattern, path: &Path) -> io::Result<()> {
    write_atomic(path, pattern_csv(pattern).as_bytes())
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::Builder::new()
        .prefix(".qinfluence-")
        .suffix(".tmp")
        .tempfile_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
