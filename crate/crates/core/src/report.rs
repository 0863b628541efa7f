//! Tabular outputs. Floats render with Rust's shortest round-trip formatting,
//! so identical values always produce identical bytes.

use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// One asserted inequality of an experiment, with the row it refers to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contract {
    pub name: String,
    pub row: Option<usize>,
    pub passed: bool,
    pub detail: String,
}

impl Contract {
    pub fn new(name: impl Into<String>, row: Option<usize>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), row, passed, detail: detail.into() }
    }
}

pub fn contracts_table(contracts: &[Contract]) -> Table {
    let mut t = Table::new(["contract", "row", "passed", "detail"]);
    for c in contracts {
        let row = c.row.map_or(Cell::Text(String::new()), Cell::from);
        t.push(vec![c.name.as_str().into(), row, c.passed.into(), c.detail.as_str().into()]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let mut t = Table::new(["x", "n", "tag"]);
        let v = 0.1 + 0.2;
        t.push(vec![v.into(), 3usize.into(), "a,b".into()]);
        t.push(vec![1.0.into(), 0usize.into(), "c".into()]);
        let s = t.to_csv().unwrap();
        assert_eq!(s, "x,n,tag\n0.30000000000000004,3,\"a,b\"\n1.0,0,c\n");
        let parsed: f64 = s.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        assert_eq!(parsed, v);
    }
}
