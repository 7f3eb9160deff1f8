//! CSV/JSON writers and the run manifest.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a CSV
//! read back with `str::parse::<f64>` reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::KernelConfig;
use crate::error::{CliError, CliResult};

pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Undefined values (e.g. a quotient with a zero denominator).
pub const MISSING: &str = "NA";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub kernel_config: Option<KernelConfig>,
    pub kernel: Option<String>,
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, String>,
    /// Data files written by the run, relative to the output directory.
    pub output_paths: Vec<String>,
}

/// Output directory of one run. Collects the manifest as files are written.
pub struct Output {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Output {
    pub fn new(dir: &Path, subcommand: &str) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                kernel_config: None,
                kernel: None,
                seed: None,
                parameters: BTreeMap::new(),
                output_paths: Vec::new(),
            },
        })
    }

    pub fn kernel(&mut self, cfg: KernelConfig, description: String) -> &mut Self {
        self.manifest.kernel_config = Some(cfg);
        self.manifest.kernel = Some(description);
        self
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.manifest.seed = Some(seed);
        self
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.manifest.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv<H, R>(&mut self, name: &str, header: &[H], rows: impl IntoIterator<Item = R>) -> CliResult<()>
    where
        H: AsRef<str>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header.iter().map(|h| h.as_ref()))?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        self.manifest.output_paths.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path(name), text)?;
        self.manifest.output_paths.push(name.to_string());
        Ok(())
    }

    /// Writes `manifest.json`; call after the last data file.
    pub fn finish(self) -> CliResult<RunManifest> {
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(self.manifest)
    }
}

/// Header `prefix1, ..., prefixN` after the given leading columns.
pub fn numbered_header(leading: &[&str], prefix: &str, count: usize) -> Vec<String> {
    leading
        .iter()
        .map(|s| s.to_string())
        .chain((1..=count).map(|i| format!("{prefix}{i}")))
        .collect()
}

/// Reads a numeric series: one value per record, taken from the last field.
/// A first record that does not parse is treated as a header.
pub fn read_series(path: &Path) -> CliResult<Vec<f64>> {
    let input_err = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| input_err(e.to_string()))?;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| input_err(e.to_string()))?;
        let Some(field) = record.iter().next_back() else {
            continue;
        };
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => return Err(input_err(format!("line {}: non-finite value {v}", i + 1))),
            Err(_) if i == 0 => {}
            Err(_) => return Err(input_err(format!("line {}: '{field}' is not a number", i + 1))),
        }
    }
    Ok(values)
}
