//! CSV tables with a `#` metadata header and a resolved-config echo.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliResult;

/// Fixed 17-significant-digit formatting shared by every numeric cell.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub struct Run<'a> {
    pub command: &'a str,
    pub config: &'a ExperimentConfig,
    pub grid: Option<String>,
    pub dir: PathBuf,
    pub prefix: String,
}

impl Run<'_> {
    pub fn resolved_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self.config).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.resolved_json().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }

    fn render(&self, table: &Table) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# udwq {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# config_sha256: {}", self.config_hash());
        if let Some(g) = &self.grid {
            let _ = writeln!(out, "# grid: {g}");
        }
        let _ = writeln!(out, "{}", table.columns.join(","));
        for row in &table.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Writes `<prefix><name>.csv` and the config echo next to it.
    pub fn write(&self, name: &str, table: &Table) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(format!("{}{name}.csv", self.prefix));
        fs::write(&path, self.render(table))?;
        let echo = self.dir.join(format!("{}{}.config.json", self.prefix, self.command));
        fs::write(echo, self.resolved_json())?;
        Ok(path)
    }
}

pub fn output_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_is_fixed_width_scientific() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        assert_eq!(num(f64::INFINITY), "inf");
    }
}
