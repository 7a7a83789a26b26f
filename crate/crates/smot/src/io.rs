//! Measure and coupling file formats.
//!
//! Measures: JSON `{"atoms":[{"x": -1, "w": "1/3"}, …]}` where numbers are
//! floats (integers stay exact) and strings are exact rationals; or CSV with
//! one `x,w` pair per line. Couplings: JSON
//! `{"rows":[{"x": …, "kernel":[{"y": …, "w": …}]}]}` or CSV triples `x,y,w`.
//!
//! Output is deterministic: key order is fixed by the struct definitions and
//! floats are written with 17 significant digits, so identical inputs produce
//! byte-identical files.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coupling::{Coupling, Row};
use crate::measure::{DiscreteMeasure, MeasureError};
use crate::scalar::Value;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("io: {0}")]
    File(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct MeasureFile {
    atoms: Vec<AtomRecord>,
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    x: Value,
    w: Value,
}

#[derive(Serialize, Deserialize)]
struct CouplingFile {
    rows: Vec<RowRecord>,
}

#[derive(Serialize, Deserialize)]
struct RowRecord {
    x: Value,
    kernel: Vec<KernelRecord>,
}

#[derive(Serialize, Deserialize)]
struct KernelRecord {
    y: Value,
    w: Value,
}

/// serde_json formatter that prints floats with 17 significant digits.
struct FixedFloats<'a> {
    indent: serde_json::ser::PrettyFormatter<'a>,
}

impl serde_json::ser::Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    // delegate the layout to the pretty formatter
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_array(&mut self.indent, w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_array(&mut self.indent, w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_array_value(&mut self.indent, w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_array_value(&mut self.indent, w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object(&mut self.indent, w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object(&mut self.indent, w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object_key(&mut self.indent, w, first)
    }
    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object_key(&mut self.indent, w)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object_value(&mut self.indent, w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object_value(&mut self.indent, w)
    }
}

fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, IoError> {
    let mut buf = Vec::new();
    let formatter = FixedFloats { indent: serde_json::ser::PrettyFormatter::new() };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, formatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Serialize a measure as deterministic JSON.
pub fn measure_to_json(m: &DiscreteMeasure) -> Result<String, IoError> {
    let file = MeasureFile {
        atoms: m
            .atoms()
            .iter()
            .map(|a| AtomRecord { x: a.x.clone(), w: a.w.clone() })
            .collect(),
    };
    Ok(String::from_utf8(to_json_bytes(&file)?).expect("json is utf-8"))
}

/// Parse a measure from JSON.
pub fn measure_from_json(text: &str) -> Result<DiscreteMeasure, IoError> {
    let file: MeasureFile = serde_json::from_str(text)?;
    Ok(DiscreteMeasure::from_atoms(
        file.atoms.into_iter().map(|a| (a.x, a.w)).collect(),
    )?)
}

/// Serialize a measure as CSV (`x,w` per line).
pub fn measure_to_csv(m: &DiscreteMeasure) -> String {
    let mut out = String::new();
    for a in m.atoms() {
        out.push_str(&format!("{},{}\n", value_csv(&a.x), value_csv(&a.w)));
    }
    out
}

/// Parse a measure from CSV (`x,w` per line, `#` comments allowed).
pub fn measure_from_csv(text: &str) -> Result<DiscreteMeasure, IoError> {
    let mut atoms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let x = parse_field(parts.next(), i)?;
        let w = parse_field(parts.next(), i)?;
        if parts.next().is_some() {
            return Err(IoError::Csv { line: i + 1, message: "expected two fields".into() });
        }
        atoms.push((x, w));
    }
    Ok(DiscreteMeasure::from_atoms(atoms)?)
}

/// Serialize a coupling as deterministic JSON.
pub fn coupling_to_json(p: &Coupling) -> Result<String, IoError> {
    let file = CouplingFile {
        rows: p
            .rows()
            .iter()
            .map(|r| RowRecord {
                x: r.x.clone(),
                kernel: r
                    .kernel
                    .atoms()
                    .iter()
                    .map(|a| KernelRecord { y: a.x.clone(), w: a.w.clone() })
                    .collect(),
            })
            .collect(),
    };
    Ok(String::from_utf8(to_json_bytes(&file)?).expect("json is utf-8"))
}

/// Parse a coupling from JSON.
pub fn coupling_from_json(text: &str) -> Result<Coupling, IoError> {
    let file: CouplingFile = serde_json::from_str(text)?;
    let mut rows = Vec::new();
    for r in file.rows {
        rows.push(Row {
            x: r.x,
            kernel: DiscreteMeasure::from_atoms(
                r.kernel.into_iter().map(|k| (k.y, k.w)).collect(),
            )?,
        });
    }
    Ok(Coupling::from_rows(rows))
}

/// Serialize a coupling as CSV triples (`x,y,w` per line).
pub fn coupling_to_csv(p: &Coupling) -> String {
    let mut out = String::new();
    for r in p.rows() {
        for a in r.kernel.atoms() {
            out.push_str(&format!(
                "{},{},{}\n",
                value_csv(&r.x),
                value_csv(&a.x),
                value_csv(&a.w)
            ));
        }
    }
    out
}

/// Parse a coupling from CSV triples.
pub fn coupling_from_csv(text: &str) -> Result<Coupling, IoError> {
    let mut cells: Vec<(Value, Value, Value)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let x = parse_field(parts.next(), i)?;
        let y = parse_field(parts.next(), i)?;
        let w = parse_field(parts.next(), i)?;
        if parts.next().is_some() {
            return Err(IoError::Csv { line: i + 1, message: "expected three fields".into() });
        }
        cells.push((x, y, w));
    }
    cells.sort_by(|a, b| a.0.cmp(&b.0));
    let mut rows: Vec<Row> = Vec::new();
    let mut current: Option<(Value, Vec<(Value, Value)>)> = None;
    for (x, y, w) in cells {
        match &mut current {
            Some((cx, kernel)) if *cx == x => kernel.push((y, w)),
            _ => {
                if let Some((cx, kernel)) = current.take() {
                    rows.push(Row { x: cx, kernel: DiscreteMeasure::from_atoms(kernel)? });
                }
                current = Some((x, vec![(y, w)]));
            }
        }
    }
    if let Some((cx, kernel)) = current {
        rows.push(Row { x: cx, kernel: DiscreteMeasure::from_atoms(kernel)? });
    }
    Ok(Coupling::from_rows(rows))
}

fn value_csv(v: &Value) -> String {
    match v {
        Value::Exact(_) => format!("{v}"),
        Value::Float(x) => format!("{x:.16e}"),
    }
}

fn parse_field(field: Option<&str>, line: usize) -> Result<Value, IoError> {
    let raw = field
        .ok_or(IoError::Csv { line: line + 1, message: "missing field".into() })?
        .trim();
    // decimal or scientific numbers become floats unless exactly integral;
    // "p/q" strings stay exact
    if raw.contains('/') {
        return Value::parse_exact(raw)
            .map_err(|message| IoError::Csv { line: line + 1, message });
    }
    if let Ok(i) = raw.parse::<i64>() {
        return Ok(Value::int(i));
    }
    raw.parse::<f64>()
        .map(Value::float)
        .map_err(|e| IoError::Csv { line: line + 1, message: e.to_string() })
}
