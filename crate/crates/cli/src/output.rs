//! In-memory output files, written in one go once every computation has
//! succeeded. Nothing touches the output directory before that point.

use std::path::Path;

use guiltevo_core::Strategy;

use crate::error::{io_err, CliError};

/// Locale-independent and round-trip exact: the shortest digit string
/// that parses back to the same value. Very small or large magnitudes use
/// exponent notation.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `prefix_C, prefix_D, ...` in matrix order.
pub fn strategy_columns(prefix: &str) -> Vec<String> {
    Strategy::ALL
        .iter()
        .map(|s| format!("{prefix}{s}"))
        .collect()
}

pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer
            .write_record(header.iter().map(|h| h.as_ref()))
            .expect("writing to memory cannot fail");
        Self { writer }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        self.writer
            .write_record(fields.iter().map(|f| f.as_ref()))
            .expect("writing to memory cannot fail");
    }

    pub fn finish(self) -> String {
        let bytes = self
            .writer
            .into_inner()
            .expect("flushing memory cannot fail");
        String::from_utf8(bytes).expect("csv fields are utf-8")
    }
}

/// Files produced by one command.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn write_all(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
        }
        Ok(())
    }
}
