//! Number formatting, atomic file writes and the run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use nalgebra::DMatrix;
use serde::Serialize;

/// `v` rounded to `digits` significant digits, fixed-point when that stays
/// readable and scientific otherwise.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..=6).contains(&mag) {
        return format!("{:.*e}", digits.saturating_sub(1), v);
    }
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can carry into a new leading digit, e.g. 9.9996 -> 10.000
    if s.trim_start_matches('-').split('.').next().map(str::len) > Some(mag.max(0) as usize + 1) && decimals > 0 {
        return format!("{:.*}", decimals - 1, v);
    }
    s
}

/// Bracketed matrix rows with right-aligned columns at 4 significant digits.
pub fn matrix_block(label: &str, m: &DMatrix<f64>) -> String {
    let cells: Vec<Vec<String>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| fmt_sig(m[(i, j)], 4)).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let pad = " ".repeat(label.len() + 3);
    let mut out = String::new();
    for (i, row) in cells.iter().enumerate() {
        let lead = if i == 0 { format!("{label} = ") } else { pad.clone() };
        let body: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        out.push_str(&format!("{lead}[ {} ]\n", body.join("  ")));
    }
    out
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Manifest<'a> {
    command: &'a str,
    inputs: &'a [String],
    parameters: &'a BTreeMap<String, String>,
    outputs: &'a [String],
    tool_version: &'static str,
    timestamp: String,
}

/// Tracks one command's inputs, parameters and written files, and writes
/// `manifest.json` next to them.
pub struct OutputSet {
    dir: PathBuf,
    command: &'static str,
    inputs: Vec<String>,
    params: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl OutputSet {
    pub fn new(dir: &Path, command: &'static str) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            inputs: Vec::new(),
            params: BTreeMap::new(),
            outputs: Vec::new(),
        })
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn param(&mut self, key: &str, value: &str) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn write(&mut self, path: &Path, body: &str) -> anyhow::Result<()> {
        write_atomic(path, body)?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn finish(self) -> anyhow::Result<()> {
        let manifest = Manifest {
            command: self.command,
            inputs: &self.inputs,
            parameters: &self.params,
            outputs: &self.outputs,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        };
        write_atomic(&self.dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, body: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(body.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(6.66667, 4), "6.667");
        assert_eq!(fmt_sig(0.15, 4), "0.1500");
        assert_eq!(fmt_sig(-15.7100, 4), "-15.71");
        assert_eq!(fmt_sig(0.695270, 4), "0.6953");
        assert_eq!(fmt_sig(0.0, 4), "0");
        assert_eq!(fmt_sig(9.99996, 4), "10.00");
        assert_eq!(fmt_sig(3.5038e7, 5), "3.5038e7");
    }
}
