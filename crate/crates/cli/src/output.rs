use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::args::Cli;

/// Formats a float with 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Accumulates CSV text with a fixed header.
#[derive(Debug, Clone)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Csv {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, with_header: bool) -> String {
        let mut out = String::new();
        if with_header {
            out.push_str(&self.header.join(","));
            out.push('\n');
        }
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes to `path` (or stdout). With `append`, rows go after the
    /// existing content and the header is only written to an empty file.
    pub fn emit(&self, path: Option<&Path>, append: bool) -> anyhow::Result<()> {
        match path {
            None => {
                print!("{}", self.render(true));
                Ok(())
            }
            Some(p) if append => {
                let fresh = fs::metadata(p).map(|m| m.len() == 0).unwrap_or(true);
                let mut f = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .with_context(|| format!("opening {}", p.display()))?;
                f.write_all(self.render(fresh).as_bytes())
                    .with_context(|| format!("writing {}", p.display()))
            }
            Some(p) => write_file(p, &self.render(true)),
        }
    }
}

pub fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// `dir/name.ext` → `dir/name.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Provenance written next to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: BTreeMap<String, serde_json::Value>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn for_cli(cli: &Cli, seed: Option<u64>) -> Self {
        let mut arguments: BTreeMap<String, serde_json::Value> = match serde_json::to_value(&cli.command) {
            Ok(serde_json::Value::Object(map)) => map.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        arguments.remove("command");
        RunManifest {
            command: cli.command.name().to_string(),
            arguments,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    /// Writes `<output stem>.manifest.json` beside `output`.
    pub fn write_beside(&self, output: &Path) -> anyhow::Result<PathBuf> {
        let path = sibling(output, "manifest.json");
        write_file(&path, &serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}
