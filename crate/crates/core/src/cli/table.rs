//! Column tables written as CSV or JSON with stable number formatting.

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    /// Printed with 4 decimals.
    Db(f64),
    /// Printed in scientific notation with 10 significant digits.
    Lin(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Db(v) => fmt_float(*v, |x| format!("{x:.4}")),
            Cell::Lin(v) => fmt_float(*v, |x| format!("{x:.9e}")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Db(v) | Cell::Lin(v) if !v.is_finite() => Value::Null,
            // via the rendered text so CSV and JSON agree digit for digit
            Cell::Db(_) | Cell::Lin(_) => {
                serde_json::from_str(&self.render()).unwrap_or(Value::Null)
            }
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

fn fmt_float(v: f64, f: impl Fn(f64) -> String) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == 0.0 {
        // no "-0"
        f(0.0)
    } else {
        f(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            metadata: vec![(
                "tool".into(),
                format!("noisyquant {}", env!("CARGO_PKG_VERSION")),
            )],
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut meta = Map::new();
        for (k, v) in &self.metadata {
            meta.insert(k.clone(), Value::from(v.as_str()));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj = Map::new();
                for (c, cell) in self.columns.iter().zip(r) {
                    obj.insert((*c).to_string(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        let mut root = Map::new();
        root.insert("metadata".into(), Value::Object(meta));
        root.insert("columns".into(), Value::from(self.columns.clone()));
        root.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        fs::write(path, self.render(format)).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec!["bits", "nf_db", "ber", "status"]).meta("seed", 7);
        t.push(vec![
            Cell::Int(1),
            Cell::Db(1.96119),
            Cell::Lin(1.234567891234e-5),
            Cell::Text("ok".into()),
        ]);
        t.push(vec![
            Cell::Int(2),
            Cell::Db(f64::INFINITY),
            Cell::Lin(-0.0),
            Cell::Empty,
        ]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# tool: noisyquant "));
        assert_eq!(lines[1], "# seed: 7");
        assert_eq!(lines[2], "bits,nf_db,ber,status");
        assert_eq!(lines[3], "1,1.9612,1.234567891e-5,ok");
        assert_eq!(lines[4], "2,inf,0.000000000e0,");
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn json_mirrors_columns() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["metadata"]["seed"], "7");
        assert_eq!(v["rows"][0]["nf_db"], 1.9612);
        assert_eq!(v["rows"][1]["nf_db"], Value::Null);
        assert_eq!(v["rows"][0]["status"], "ok");
        assert_eq!(v["columns"].as_array().unwrap().len(), 4);
    }
}
