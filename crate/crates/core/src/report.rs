//! Output plumbing: atomic writes, long-format CSV tables and run manifests.

use crate::error::Result;
use std::io::Write;
use std::path::Path;

/// Writes `bytes` to `path` via a temporary file in the same directory and a
/// rename, so readers never observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Current UTC time as an RFC 3339 string (seconds precision).
pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// One row of a long-format result table.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LongRow {
    /// Values of the table's parameter columns, in column order.
    pub params: Vec<String>,
    pub quantity: String,
    pub value: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

/// Long-format table: `experiment, <param columns…>, quantity, value, ci_lo, ci_hi`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LongTable {
    pub experiment: String,
    pub param_columns: Vec<String>,
    pub rows: Vec<LongRow>,
}

impl LongTable {
    pub fn new(experiment: &str, param_columns: &[&str]) -> Self {
        LongTable {
            experiment: experiment.to_string(),
            param_columns: param_columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; `params` must match the parameter columns.
    pub fn push(&mut self, params: &[String], quantity: &str, value: f64, ci: Option<(f64, f64)>) {
        debug_assert_eq!(params.len(), self.param_columns.len());
        self.rows.push(LongRow {
            params: params.to_vec(),
            quantity: quantity.to_string(),
            value,
            ci_lo: ci.map(|c| c.0),
            ci_hi: ci.map(|c| c.1),
        });
    }

    /// Rows whose quantity equals `q`.
    pub fn select<'a>(&'a self, q: &'a str) -> impl Iterator<Item = &'a LongRow> + 'a {
        self.rows.iter().filter(move |r| r.quantity == q)
    }

    /// CSV text; floats use the shortest round-trip representation, so equal
    /// tables serialise to identical bytes.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["experiment".to_string()];
        header.extend(self.param_columns.iter().cloned());
        header.extend(["quantity", "value", "ci_lo", "ci_hi"].map(String::from));
        w.write_record(&header)?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![self.experiment.clone()];
            rec.extend(r.params.iter().cloned());
            rec.extend([r.quantity.clone(), r.value.to_string(), opt(r.ci_lo), opt(r.ci_hi)]);
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| crate::Error::Format(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv()?.as_bytes())
    }
}

/// Metadata written next to every experiment output; together with `config`
/// it is sufficient to rerun the job.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: serde_json::Value,
    pub git_describe: String,
    pub created: String,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub crate_version: String,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seeds: serde_json::Value, wall_time_s: f64) -> Self {
        RunManifest {
            command: command.to_string(),
            config,
            seeds,
            git_describe: git_describe(),
            created: timestamp(),
            wall_time_s,
            outputs: Vec::new(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }
}

/// `git describe --always --dirty` of the working directory, or `"unknown"`.
pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}
