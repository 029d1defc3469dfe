//! Tabular output as CSV or JSON.

use std::io::{self, Write};

use serde_json::{Map, Number, Value};

use crate::special::Concentration;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Conc(Concentration),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => real(*v),
            Cell::Conc(k) => match k.value() {
                Some(v) => real(v),
                None => "inf".into(),
            },
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Real(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Conc(k) => match k.value() {
                Some(v) => Number::from_f64(v).map_or(Value::Null, Value::Number),
                None => Value::String("inf".into()),
            },
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    fn write_json(&self, out: &mut dyn Write) -> io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let map: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Cell::json))
                    .collect();
                Value::Object(map)
            })
            .collect();
        serde_json::to_writer_pretty(&mut *out, &rows)?;
        writeln!(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec!["k_tilt".into(), "t".into(), "qfi".into()]);
        t.rows.push(vec![
            Cell::Conc(Concentration::INFINITE),
            Cell::Int(3),
            Cell::Real(0.1 + 0.2),
        ]);
        t.rows.push(vec![
            Cell::Conc(Concentration::new(7.0).unwrap()),
            Cell::Int(4),
            Cell::Real(-1.0 / 3.0),
        ]);
        t
    }

    #[test]
    fn csv_round_trips_reals() {
        let mut buf = Vec::new();
        sample().write(Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k_tilt,t,qfi");
        assert!(lines[1].starts_with("inf,3,"));
        let q: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(q, 0.1 + 0.2);
        let q: f64 = lines[2].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(q, -1.0 / 3.0);
    }

    #[test]
    fn json_keeps_column_order_and_values() {
        let mut buf = Vec::new();
        sample().write(Format::Json, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        let first = v[0].as_object().unwrap();
        let keys: Vec<&String> = first.keys().collect();
        assert_eq!(keys, ["k_tilt", "t", "qfi"]);
        assert_eq!(first["k_tilt"], "inf");
        assert_eq!(first["qfi"].as_f64().unwrap(), 0.1 + 0.2);
        assert_eq!(v[1]["k_tilt"].as_f64().unwrap(), 7.0);
    }

    #[test]
    fn format_names() {
        assert_eq!("CSV".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}
