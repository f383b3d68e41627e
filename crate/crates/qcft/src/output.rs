//! CSV and JSON artifact writers shared by the CLI and the examples.
//!
//! CSV numeric format: 17 significant digits, '.' decimal separator, comma
//! field separator, one header row.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// 17-significant-digit scientific representation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvWriter {
    buf: String,
    n_cols: usize,
}

impl CsvWriter {
    pub fn new(header: &[&str]) -> Self {
        Self {
            buf: format!("{}\n", header.join(",")),
            n_cols: header.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.n_cols, "row width mismatch");
        let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    /// Row with arbitrary leading string cells followed by numeric cells.
    pub fn row_mixed(&mut self, labels: &[&str], values: &[f64]) {
        assert_eq!(labels.len() + values.len(), self.n_cols, "row width mismatch");
        let mut cells: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        cells.extend(values.iter().map(|&v| fmt_f64(v)));
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }

    pub fn write_to(self, path: &Path) -> Result<()> {
        write_text(path, &self.buf)
    }
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serialization");
    write_text(path, &format!("{text}\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = fmt_f64(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        assert!(s.contains('.'));
    }

    #[test]
    fn csv_layout() {
        let mut w = CsvWriter::new(&["a", "b"]);
        w.row(&[1.0, 2.5]);
        let text = w.finish();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "a,b");
        assert_eq!(lines.next().unwrap(), "1.0000000000000000e0,2.5000000000000000e0");
    }
}
