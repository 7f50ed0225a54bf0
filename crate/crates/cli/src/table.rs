//! In-memory CSV tables with `%.17g` number formatting.

use std::path::Path;

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_g17(*x),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(v) => Some(*v as f64),
            Cell::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
            Cell::Text(s) => s.parse().ok(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// C's `%.17g`: 17 significant digits, trailing zeros removed, exponent
/// form below `1e-4` or from `1e17` on.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    } else {
        let digits = (16 - exp) as usize;
        trim_fraction(&format!("{x:.digits$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header {:?}", self.header);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn floats(&self, name: &str) -> SimResult<Vec<f64>> {
        let j = self.column(name).ok_or_else(|| SimError::Plot(format!("no column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| r[j].as_f64().ok_or_else(|| SimError::Plot(format!("column `{name}` has non-numeric cells"))))
            .collect()
    }

    /// Rows for which `keep` returns true.
    pub fn filtered(&self, keep: impl Fn(&[Cell]) -> bool) -> Self {
        Self { header: self.header.clone(), rows: self.rows.iter().filter(|r| keep(r)).cloned().collect() }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn write(&self, path: &Path) -> SimResult<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| SimError::io(path, e))
    }

    /// Read back a table written by [`CsvTable::write`]; cells come back as text.
    pub fn read(path: &Path) -> SimResult<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| SimError::io(path, std::io::Error::other(e)))?;
        let header = r.headers().map_err(|e| SimError::io(path, std::io::Error::other(e)))?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| SimError::io(path, std::io::Error::other(e)))?;
            rows.push(rec.iter().map(|s| Cell::Text(s.to_string())).collect());
        }
        Ok(Self { header, rows })
    }
}
