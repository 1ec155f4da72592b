//! Plain-text artifact I/O: CSV tables, eigenvalue spectra (one value per
//! line), and signed edge lists. All writers format numbers with Rust's
//! shortest-roundtrip `Display`, so identical data produces identical bytes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::weights::SparseWeights;

/// Write a CSV table with a header row.
pub fn save_csv(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read an eigenvalue spectrum: one float per line, no header.
pub fn load_spectrum(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(
            line.parse::<f64>()
                .map_err(|_| Error::parse(path, idx + 1, format!("invalid eigenvalue '{line}'")))?,
        );
    }
    if values.is_empty() {
        return Err(Error::parse(path, 1, "spectrum file has no values"));
    }
    Ok(values)
}

pub fn save_spectrum(path: impl AsRef<Path>, spectrum: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for v in spectrum {
        out.push_str(&format!("{v}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Export a topology as `pre,post,weight` rows.
pub fn save_edge_list(path: impl AsRef<Path>, weights: &SparseWeights) -> Result<()> {
    let rows: Vec<Vec<String>> = weights
        .signed_edges()
        .into_iter()
        .map(|(pre, post, w)| vec![pre.to_string(), post.to_string(), w.to_string()])
        .collect();
    save_csv(path, &["pre", "post", "weight"], &rows)
}

/// Append-style edge snapshot rows with a timestep column.
pub fn snapshot_rows(t_ms: u32, edges: &[(u32, u32, f64)]) -> Vec<Vec<String>> {
    edges
        .iter()
        .map(|(pre, post, w)| vec![t_ms.to_string(), pre.to_string(), post.to_string(), w.to_string()])
        .collect()
}
