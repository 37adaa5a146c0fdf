//! CSV emission and ingestion. Files start with a schema comment line
//! (`# schema: qlbm.<name>.v1`), then a header row; values are written
//! with Rust's shortest round-trip float formatting so identical runs
//! produce byte-identical files.

use anyhow::{bail, Context, Result};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

pub struct CsvWriter {
    out: BufWriter<fs::File>,
    columns: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, schema: &str, header: &[&str]) -> Result<Self> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let file =
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "# schema: {schema}")?;
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvWriter {
            out,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        debug_assert_eq!(fields.len(), self.columns, "column count mismatch");
        writeln!(self.out, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Format an f64 with full round-trip precision.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

/// A parsed CSV: schema id, column names, and rows of raw fields.
pub struct CsvTable {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut lines = text.lines();
        let schema_line = lines.next().unwrap_or_default();
        let schema = schema_line
            .strip_prefix("# schema: ")
            .ok_or_else(|| anyhow::anyhow!("{}: missing schema line", path.display()))?
            .to_string();
        let header = lines
            .next()
            .ok_or_else(|| anyhow::anyhow!("{}: missing header", path.display()))?;
        let columns: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
            if fields.len() != columns.len() {
                bail!("{}: ragged row: {line}", path.display());
            }
            rows.push(fields);
        }
        Ok(CsvTable {
            schema,
            columns,
            rows,
        })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| anyhow::anyhow!("missing column {name}"))
    }

    pub fn float(&self, row: &[String], name: &str) -> Result<f64> {
        let idx = self.column_index(name)?;
        row[idx]
            .parse()
            .with_context(|| format!("parsing {name} = {:?}", row[idx]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut w = CsvWriter::create(&path, "qlbm.test.v1", &["a", "b"]).unwrap();
        w.row(&[fmt(0.1), fmt(1.0 / 3.0)]).unwrap();
        w.finish().unwrap();
        let t = CsvTable::load(&path).unwrap();
        assert_eq!(t.schema, "qlbm.test.v1");
        assert_eq!(t.columns, vec!["a", "b"]);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.float(&t.rows[0], "b").unwrap(), 1.0 / 3.0);
    }
}
