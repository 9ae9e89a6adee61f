//! Artifact writers: CSV tables and the run summary.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// One row of `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub criterion: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Criterion {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            criterion: name.to_string(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            criterion: name.to_string(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }

    /// A yes/no check reported as value 1 or 0 against threshold 1.
    pub fn holds(name: &str, ok: bool) -> Self {
        Self {
            criterion: name.to_string(),
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            pass: ok,
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    subcommand: &'a str,
    seed: Option<u64>,
    pass: bool,
    criteria: &'a [Criterion],
}

/// Formats a float with 17 significant digits.
pub fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub struct Artifacts {
    dir: PathBuf,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes a CSV table; every row must match the header length.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn summary(&self, subcommand: &str, seed: Option<u64>, criteria: &[Criterion]) -> Result<bool> {
        let pass = criteria.iter().all(|c| c.pass);
        self.json(
            "summary.json",
            &Summary {
                subcommand,
                seed,
                pass,
                criteria,
            },
        )?;
        Ok(pass)
    }
}
