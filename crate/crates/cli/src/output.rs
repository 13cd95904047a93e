//! Deterministic serialization. CSV numbers use `{:.16e}`, JSON numbers the
//! shortest round-trip form; lines end in `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut csv = Csv::default();
        csv.text.push_str(&header.join(","));
        csv.text.push('\n');
        csv
    }

    pub fn row(&mut self, cells: &[Cell]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => self.text.push_str(&num(*x)),
                Cell::I(n) => {
                    let _ = write!(self.text, "{n}");
                }
                Cell::B(b) => self.text.push_str(if *b { "1" } else { "0" }),
            }
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
}

/// Output directory that records the names of the files written to it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, csv: &Csv) -> Result<(), CliError> {
        self.write_text(name, csv.as_str())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let v = serde_json::to_value(value).map_err(|e| CliError::Usage(e.to_string()))?;
        self.write_text(name, &json_text(&v))
    }
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}
