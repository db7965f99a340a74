//! Table output in CSV or JSON. Floats print with 17 significant digits
//! so they re-parse to the exact bit pattern.

use std::io::Write;
use std::path::Path;

use crate::config::OutFormat;

/// Columnar table; `None` cells render empty (undefined entries such as
/// the order column of a first refinement row).
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.columns.len(), "ragged table row");
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path, format: OutFormat) -> std::io::Result<()> {
        match format {
            OutFormat::Csv => self.write_csv(path),
            OutFormat::Json => self.write_json(path),
        }
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| render_cell(*c)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        write_atomic(path, out.as_bytes())
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        let mut out = String::from("{\n  \"columns\": [");
        out.push_str(
            &self
                .columns
                .iter()
                .map(|c| format!("\"{c}\""))
                .collect::<Vec<_>>()
                .join(", "),
        );
        out.push_str("],\n  \"rows\": [\n");
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Some(v) => format_float(*v),
                    None => "null".to_string(),
                })
                .collect();
            out.push_str(&format!("    [{}]", cells.join(", ")));
            out.push_str(if i + 1 < self.rows.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ]\n}\n");
        write_atomic(path, out.as_bytes())
    }
}

/// 17 significant digits: enough to reproduce any f64 exactly on re-parse.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn render_cell(cell: Option<f64>) -> String {
    match cell {
        Some(v) => format_float(v),
        None => String::new(),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
