//! Tabular output shared by the CLI and the acceptance report.
//!
//! A [`Table`] is written either as CSV (header row, floats with 17
//! significant digits, missing values as empty cells) or as a JSON array of
//! objects keyed by the same column names. Both carry the same doubles:
//! 17 significant digits round-trip every finite `f64`.

use std::io::Write;

use serde_json::{Map, Value};

use crate::harness::{EstimateRow, HittingRow, ScalingRow};
use crate::{PointSet, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // serde_json emits the shortest round-trip form; non-finite values become null
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// `x` in scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        writeln!(out)?;
        Ok(())
    }
}

pub fn points_table(ps: &PointSet) -> Table {
    let mut t = Table::new(&["index", "x", "y"]);
    for (i, p) in ps.points().iter().enumerate() {
        t.push(vec![i.into(), p.x().into(), p.y().into()]);
    }
    t
}

pub fn estimate_table(rows: &[EstimateRow]) -> Table {
    let mut t = Table::new(&["name", "ell", "n", "point_estimate", "ci_low", "ci_high", "trials", "seed"]);
    for r in rows {
        t.push(vec![
            r.name.as_str().into(),
            r.ell.into(),
            r.n.into(),
            r.point_estimate.into(),
            r.ci_low.into(),
            r.ci_high.into(),
            r.trials.into(),
            r.seed.into(),
        ]);
    }
    t
}

pub fn scaling_table(rows: &[ScalingRow]) -> Table {
    let mut t = Table::new(&[
        "n",
        "ell",
        "trials",
        "p_hat",
        "p_ci_low",
        "p_ci_high",
        "normalized",
        "normalized_ci_low",
        "normalized_ci_high",
        "p_prime",
    ]);
    for r in rows {
        t.push(vec![
            r.n.into(),
            r.ell.into(),
            r.trials.into(),
            r.p_hat.estimate.into(),
            r.p_hat.low.into(),
            r.p_hat.high.into(),
            r.normalized.estimate.into(),
            r.normalized.low.into(),
            r.normalized.high.into(),
            r.p_prime.estimate.into(),
        ]);
    }
    t
}

pub fn hitting_table(rows: &[HittingRow]) -> Table {
    let mut t = Table::new(&[
        "n",
        "trials",
        "p_equal",
        "p_equal_ci_low",
        "p_equal_ci_high",
        "p_z_positive",
        "p_z_ci_low",
        "p_z_ci_high",
        "r_c_dominates",
    ]);
    for r in rows {
        let z = r.p_z_positive;
        t.push(vec![
            r.n.into(),
            r.trials.into(),
            r.p_equal.estimate.into(),
            r.p_equal.low.into(),
            r.p_equal.high.into(),
            z.map(|i| i.estimate).into(),
            z.map(|i| i.low).into(),
            z.map(|i| i.high).into(),
            r.r_c_dominates.into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_both_formats() {
        let xs = [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 123456789.123456789, 0.0];
        let mut t = Table::new(&["x", "label"]);
        for &x in &xs {
            t.push(vec![x.into(), Cell::Empty]);
        }
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        let from_csv: Vec<f64> = rd.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
        let json = t.to_json();
        let from_json: Vec<f64> = json.as_array().unwrap().iter().map(|o| o["x"].as_f64().unwrap()).collect();
        for ((a, b), c) in xs.iter().zip(&from_csv).zip(&from_json) {
            assert_eq!(a.to_bits(), b.to_bits());
            assert_eq!(a.to_bits(), c.to_bits());
        }
        assert!(json[0]["label"].is_null());
    }

    #[test]
    fn csv_has_header_and_blank_missing_cells() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Int(3), Option::<f64>::None.into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n3,\n");
    }

    #[test]
    #[should_panic]
    fn ragged_rows_are_rejected() {
        Table::new(&["a"]).push(vec![Cell::Empty, Cell::Empty]);
    }
}
