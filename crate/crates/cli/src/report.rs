//! CSV reports with a leading `#` manifest, and the side manifest holding wall time.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip form; non-finite values become `divergent`.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "divergent".to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub operation: &'static str,
    pub seed: Option<u64>,
    /// Deterministic values echoed in the manifest block.
    pub notes: Vec<(String, String)>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<String>,
    /// Set when an asserted inequality failed.
    pub violation: Option<String>,
}

impl Report {
    pub fn new(operation: &'static str, seed: Option<u64>, header: Vec<&'static str>) -> Self {
        Self {
            operation,
            seed,
            notes: Vec::new(),
            header,
            rows: Vec::new(),
            summary: Vec::new(),
            violation: None,
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn exit_code(&self) -> i32 {
        if self.violation.is_some() {
            1
        } else {
            0
        }
    }

    /// The CSV text. Depends only on the config, the seed and the computed values.
    pub fn to_csv(&self, config: Option<&ExperimentConfig>) -> Result<String, CliError> {
        let mut out = String::new();
        out.push_str(&format!("# matvar {VERSION}\n# operation = {}\n", self.operation));
        match self.seed {
            Some(s) => out.push_str(&format!("# seed = {s}\n")),
            None => out.push_str("# seed = none\n"),
        }
        for (k, v) in &self.notes {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        if let Some(cfg) = config {
            out.push_str("# config:\n");
            for line in cfg.to_toml().lines() {
                out.push_str(&format!("#   {line}\n"));
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))?);
        Ok(out)
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Output(e.to_string())
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    operation: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    threads: usize,
    wall_time_s: f64,
    exit_status: i32,
    summary: &'a [String],
    notes: BTreeMap<&'a str, &'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a ExperimentConfig>,
}

/// Writes `<op>.csv` and `<op>.manifest.toml` into `dir`; returns the CSV path.
pub fn write_outputs(
    dir: &Path,
    report: &Report,
    config: Option<&ExperimentConfig>,
    threads: usize,
    wall_time_s: f64,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let csv_path = dir.join(format!("{}.csv", report.operation));
    std::fs::write(&csv_path, report.to_csv(config)?)
        .map_err(|e| CliError::Output(format!("{}: {e}", csv_path.display())))?;
    let manifest = Manifest {
        tool: "matvar",
        version: VERSION,
        operation: report.operation,
        seed: report.seed,
        threads,
        wall_time_s,
        exit_status: report.exit_code(),
        summary: &report.summary,
        notes: report.notes.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
        config,
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Output(e.to_string()))?;
    let path = dir.join(format!("{}.manifest.toml", report.operation));
    std::fs::write(&path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = Report::new("norm", Some(3), vec!["quantity", "value"]);
        r.note("p_minus", 2);
        r.rows.push(vec!["norm".into(), fmt_num(0.5)]);
        r.rows.push(vec!["blowup".into(), fmt_num(f64::INFINITY)]);
        let text = r.to_csv(None).unwrap();
        let want = format!(
            "# matvar {VERSION}\n# operation = norm\n# seed = 3\n# p_minus = 2\nquantity,value\nnorm,0.5\nblowup,divergent\n"
        );
        assert_eq!(text, want);
    }
}
