//! Report shapes: labelled tables (CSV with 6 significant digits, JSON at
//! full precision) and JSON documents for identification results,
//! capacities and exchange traces.

use std::io::Write;

use indexmap::IndexMap;
use prefid_core::dataset::Sample;
use prefid_core::doptimal::ExchangeTrace;
use prefid_core::identify::IdentificationReport;
use prefid_core::models::ChoquetCapacity;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;

/// `%g`-style rendering with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs());
    }
    trim_zeros(&format!("{x:.*}", (5 - exp) as usize)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => sig6(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// Row-labelled table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub row_header: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Cell>)>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Table {
            title: title.into(),
            row_header: "row".into(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Header of the label column in CSV output.
    pub fn with_row_header(mut self, header: impl Into<String>) -> Self {
        self.row_header = header.into();
        self
    }

    pub fn push(&mut self, label: impl Into<String>, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push((label.into(), cells));
    }

    pub fn get(&self, row: &str, col: &str) -> Option<&Cell> {
        let c = self.columns.iter().position(|x| x == col)?;
        self.rows.iter().find(|(l, _)| l == row).map(|(_, cells)| &cells[c])
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        let mut header = vec![self.row_header.clone()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (label, cells) in &self.rows {
            let mut rec = vec![label.clone()];
            rec.extend(cells.iter().map(Cell::csv));
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|(label, cells)| {
                let mut obj = IndexMap::new();
                obj.insert(self.row_header.clone(), json!(label));
                for (c, cell) in self.columns.iter().zip(cells) {
                    obj.insert(c.clone(), cell.json());
                }
                json!(obj)
            })
            .collect();
        json!({ "title": self.title, "columns": self.columns, "rows": rows })
    }
}

#[derive(Debug, Serialize)]
struct IdentificationJson<'a> {
    kind: &'a str,
    a: f64,
    b: f64,
    weights: &'a [f64],
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    rms_weight_dev: Option<f64>,
    residual_sse: f64,
}

pub fn identification_json(r: &IdentificationReport) -> Value {
    serde_json::to_value(IdentificationJson {
        kind: r.model.kind.name(),
        a: r.model.a,
        b: r.model.b,
        weights: &r.model.weights,
        valid: r.valid,
        rms_weight_dev: r.rms_weight_dev,
        residual_sse: r.residual_sse,
    })
    .expect("plain data")
}

pub fn identification_table(r: &IdentificationReport) -> Table {
    let mut t = Table::new(format!("{} identification", r.model.kind), ["value"]);
    for (j, w) in r.model.weights.iter().enumerate() {
        t.push(format!("w{}", j + 1), vec![Cell::Num(*w)]);
    }
    t.push("a", vec![Cell::Num(r.model.a)]);
    t.push("b", vec![Cell::Num(r.model.b)]);
    t.push("valid", vec![Cell::Text(r.valid.to_string())]);
    t.push("rms_weight_dev", vec![r.rms_weight_dev.into()]);
    t.push("residual_sse", vec![Cell::Num(r.residual_sse)]);
    t
}

/// Ranking results carry weights only.
pub fn ranking_json(kind: &str, weights: &[f64], valid: bool, rms: Option<f64>) -> Value {
    let mut obj = IndexMap::new();
    obj.insert("kind", json!(kind));
    obj.insert("weights", json!(weights));
    obj.insert("valid", json!(valid));
    if let Some(r) = rms {
        obj.insert("rms_weight_dev", json!(r));
    }
    json!(obj)
}

/// Subset keys (`"1"`, `"12"`, …) in size-then-lexicographic order.
pub fn capacity_json(cap: &ChoquetCapacity) -> Value {
    let map: IndexMap<String, f64> = cap.iter().map(|(k, v)| (k.to_string(), v)).collect();
    json!(map)
}

pub fn capacity_table(title: &str, cap: &ChoquetCapacity) -> Table {
    let mut t = Table::new(title, ["mu"]);
    for (k, v) in cap.iter() {
        t.push(k.to_string(), vec![Cell::Num(v)]);
    }
    t
}

fn sample_json(s: &Sample) -> Value {
    json!({ "name": s.name(), "ids": s.ids() })
}

pub fn trace_json(t: &ExchangeTrace) -> Value {
    let steps: Vec<Value> = t
        .steps
        .iter()
        .map(|s| {
            json!({
                "swapped_in": s.swapped_in,
                "swapped_out": s.swapped_out,
                "u1": s.u1,
                "u2": s.u2,
                "det_after": s.det_after,
            })
        })
        .collect();
    json!({
        "start_sample": sample_json(&t.start_sample),
        "final_sample": sample_json(&t.final_sample),
        "initial_det": t.initial_det,
        "iterations": steps,
        "final_det": t.final_det,
    })
}

/// Summary shaped like the reference exchange tables, one column per run.
pub fn traces_table(title: &str, traces: &[ExchangeTrace]) -> Table {
    let mut t = Table::new(title, traces.iter().map(|x| x.start_sample.name().to_string()));
    t.push("initial_det", traces.iter().map(|x| Cell::Num(x.initial_det)).collect());
    t.push("iterations", traces.iter().map(|x| Cell::Int(x.iterations() as i64)).collect());
    t.push("final_det", traces.iter().map(|x| Cell::Num(x.final_det)).collect());
    let longest = traces.iter().map(|x| x.final_sample.len()).max().unwrap_or(0);
    for i in 0..longest {
        t.push(
            format!("final_sample_{}", i + 1),
            traces
                .iter()
                .map(|x| x.final_sample.ids().get(i).map_or(Cell::Empty, |id| Cell::Int(*id as i64)))
                .collect(),
        );
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.01841721), "0.0184172");
        assert_eq!(sig6(-26.5123456), "-26.5123");
        assert_eq!(sig6(2.16e-6), "2.16e-06");
        assert_eq!(sig6(1234567.0), "1.23457e+06");
        assert_eq!(sig6(43.0), "43");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(999999.5), "1e+06");
        assert_eq!(sig6(0.0001), "0.0001");
    }

    #[test]
    fn table_csv_and_json() {
        let mut t = Table::new("demo", ["x", "y"]);
        t.push("r", vec![Cell::Num(1.0 / 3.0), Cell::Empty]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "row,x,y\nr,0.333333,\n");
        let j = t.to_json();
        assert_eq!(j["rows"][0]["x"], json!(1.0 / 3.0));
        assert!(j["rows"][0]["y"].is_null());
    }
}
