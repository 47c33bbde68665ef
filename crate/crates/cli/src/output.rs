use std::io::Write;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `key = value` lines reported after the rows.
    pub summary: Vec<(String, String)>,
}

/// `x` with 12 significant digits: fixed notation for moderate magnitudes,
/// scientific otherwise, trailing zeros dropped.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => fmt_num(*x),
        Cell::Text(t) => t.clone(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(x) if x.is_finite() => {
            let rounded: f64 = fmt_num(*x).parse().expect("formatted number parses");
            json!(rounded)
        }
        Cell::Num(_) => Value::Null,
        Cell::Text(t) => json!(t),
    }
}

pub fn write_csv(out: &mut dyn Write, params: &[(&'static str, String)], table: &Table) -> std::io::Result<()> {
    let line: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "# params {}", line.join(" "))?;
    writeln!(out, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(cell_text).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    for (k, v) in &table.summary {
        writeln!(out, "# {k} = {v}")?;
    }
    Ok(())
}

pub fn write_json(out: &mut dyn Write, params: &[(&'static str, String)], table: &Table) -> std::io::Result<()> {
    let mut p = Map::new();
    for (k, v) in params {
        p.insert((*k).to_string(), json!(v));
    }
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (name, cell) in table.columns.iter().zip(row) {
                m.insert((*name).to_string(), cell_json(cell));
            }
            Value::Object(m)
        })
        .collect();
    let mut summary = Map::new();
    for (k, v) in &table.summary {
        summary.insert(k.clone(), json!(v));
    }
    let doc = json!({ "params": p, "columns": table.columns, "rows": rows, "summary": summary });
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)
}
