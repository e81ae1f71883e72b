//! CSV and JSON writers.

use std::io::Write;

use anyhow::Result;
use serde_json::{json, Map, Value};

use synodyne::table::{Cell, Table};

use crate::commands::Output;
use crate::config::{Format, RunConfig};

/// Leading comment line of every CSV file.
pub const CSV_SCHEMA: &str = "# synodyne-csv/1";
pub const JSON_SCHEMA: &str = "synodyne-json/1";

fn value_cell(v: &Value) -> Cell {
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().map_or(Cell::Empty, Cell::Num),
        Value::Number(n) => Cell::Text(n.to_string()),
        Value::String(s) => Cell::Text(s.clone()),
        Value::Null => Cell::Empty,
        other => Cell::Text(other.to_string()),
    }
}

fn record_table(fields: &[(&'static str, Value)]) -> Table {
    let names: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
    let mut t = Table::new(&names);
    t.push(fields.iter().map(|(_, v)| value_cell(v)).collect())
        .expect("one cell per field");
    t
}

fn write_csv<W: Write>(table: &Table, mut w: W) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA}")?;
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(&table.columns)?;
    for row in &table.rows {
        out.write_record(row.iter().map(Cell::render))?;
    }
    out.flush()?;
    Ok(())
}

fn write_json<W: Write>(output: &Output, cfg: &RunConfig, mut w: W) -> Result<()> {
    let doc = match output {
        Output::Table(t) => json!({
            "schema": JSON_SCHEMA,
            "config": cfg,
            "columns": t.columns,
            "rows": t.rows,
        }),
        Output::Record(fields) => {
            let mut m = Map::new();
            for (k, v) in fields {
                m.insert((*k).to_string(), v.clone());
            }
            json!({ "schema": JSON_SCHEMA, "config": cfg, "result": m })
        }
    };
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    Ok(())
}

pub fn write<W: Write>(output: &Output, cfg: &RunConfig, w: W) -> Result<()> {
    match cfg.format {
        Format::Csv => match output {
            Output::Table(t) => write_csv(t, w),
            Output::Record(fields) => write_csv(&record_table(fields), w),
        },
        Format::Json => write_json(output, cfg, w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Num(0.1), Cell::Text("x,y".into())])
            .unwrap();
        t.push(vec![Cell::Empty, Cell::Num(1e-7)]).unwrap();
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# synodyne-csv/1\na,b\n0.1,\"x,y\"\n,1e-7\n"
        );
    }

    #[test]
    fn record_as_single_row() {
        let t = record_table(&[("s", Value::from(1.5)), ("n", Value::from(7u64))]);
        assert_eq!(t.columns, ["s", "n"]);
        assert_eq!(t.rows, vec![vec![Cell::Num(1.5), Cell::Text("7".into())]]);
    }
}
