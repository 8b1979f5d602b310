//! Deterministic CSV writing: comma separation, `.` decimals, mandatory
//! header row, shortest-round-trip float formatting.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

pub struct CsvTable {
    buf: String,
    columns: usize,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        CsvTable {
            buf,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[CsvCell]) {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            match cell {
                CsvCell::Float(v) => {
                    let _ = write!(self.buf, "{v}");
                }
                CsvCell::Int(v) => {
                    let _ = write!(self.buf, "{v}");
                }
                CsvCell::Str(s) => self.buf.push_str(s),
                CsvCell::Bool(b) => self.buf.push_str(if *b { "true" } else { "false" }),
                CsvCell::Empty => {}
            }
        }
        self.buf.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, &self.buf).with_context(|| format!("writing {}", path.display()))
    }

    #[cfg(test)]
    pub fn as_str(&self) -> &str {
        &self.buf
    }
}

pub enum CsvCell<'a> {
    Float(f64),
    Int(i64),
    Str(&'a str),
    Bool(bool),
    Empty,
}

pub fn f(v: f64) -> CsvCell<'static> {
    CsvCell::Float(v)
}

pub fn i(v: usize) -> CsvCell<'static> {
    CsvCell::Int(v as i64)
}

pub fn b(v: bool) -> CsvCell<'static> {
    CsvCell::Bool(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_rows_deterministically() {
        let mut t = CsvTable::new(&["a", "b", "c"]);
        t.row(&[f(0.1), i(3), CsvCell::Empty]);
        t.row(&[f(1.0 / 3.0), CsvCell::Str("x"), b(true)]);
        assert_eq!(t.as_str(), "a,b,c\n0.1,3,\n0.3333333333333333,x,true\n");
    }
}
