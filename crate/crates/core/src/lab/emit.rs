//! Deterministic report files: JSON with sorted keys and floats printed with
//! 17 significant digits, and one CSV file per table.

use super::report::{Cell, ExperimentReport, Table};
use crate::error::{LabError, Result};
use serde::Serialize;
use serde_json::ser::Formatter;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// `{:.16e}`: 17 significant digits, enough to round-trip every f64.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        // keeps the sign of -0.0
        return if v.is_sign_negative() {
            "-0.0".into()
        } else {
            "0.0".into()
        };
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    format!("{v:.16e}")
}

struct FixedFloats<'a>(serde_json::ser::PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_float(v).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with sorted object keys (through `serde_json::Value`, whose
/// map is ordered) and fixed float formatting. Non-finite floats become null.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut out,
        FixedFloats(serde_json::ser::PrettyFormatter::new()),
    );
    v.serialize(&mut ser)?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| LabError::Config(e.to_string()))
}

pub fn report_json(report: &ExperimentReport) -> Result<String> {
    to_json_string(report)
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Num(v) => format_float(*v),
        Cell::Text(s) => s.clone(),
        Cell::Flag(b) => b.to_string(),
    }
}

fn parse_cell(s: &str) -> Cell {
    if let Ok(i) = s.parse::<i64>() {
        return Cell::Int(i);
    }
    match s {
        "true" => return Cell::Flag(true),
        "false" => return Cell::Flag(false),
        _ => {}
    }
    // only numeric spellings produced by format_float count as floats
    let numeric = s
        .bytes()
        .all(|b| b.is_ascii_digit() || b".eE+-".contains(&b))
        || matches!(s, "NaN" | "inf" | "-inf");
    match s.parse::<f64>() {
        Ok(v) if numeric => Cell::Num(v),
        _ => Cell::Text(s.to_string()),
    }
}

pub fn write_table_csv<W: Write>(table: &Table, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(&table.columns)?;
    for row in &table.rows {
        wr.write_record(row.iter().map(cell_text))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn table_csv_string(table: &Table) -> Result<String> {
    let mut buf = Vec::new();
    write_table_csv(table, &mut buf)?;
    String::from_utf8(buf).map_err(|e| LabError::Config(e.to_string()))
}

/// Reads a CSV written by [`write_table_csv`]; the table name is supplied by
/// the caller since CSV files carry none.
pub fn read_table_csv<R: io::Read>(name: &str, r: R) -> Result<Table> {
    let mut rd = csv::Reader::from_reader(r);
    let columns = rd.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        rows.push(rec?.iter().map(parse_cell).collect());
    }
    Ok(Table {
        name: name.to_string(),
        columns,
        rows,
    })
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `<experiment>.json`, `<experiment>.<table>.csv` and the
/// non-deterministic `<experiment>.timings.json` into `dir`; returns the
/// paths written.
pub fn emit(report: &ExperimentReport, dir: &Path, json: bool, csv: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let stem = &report.experiment;
    if json {
        let p = dir.join(format!("{stem}.json"));
        write_atomic(&p, report_json(report)?.as_bytes())?;
        written.push(p);
        let t = dir.join(format!("{stem}.timings.json"));
        write_atomic(&t, to_json_string(&report.timings)?.as_bytes())?;
        written.push(t);
    }
    if csv {
        for table in &report.tables {
            let p = dir.join(format!("{stem}.{}.csv", table.name));
            write_atomic(&p, table_csv_string(table)?.as_bytes())?;
            written.push(p);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_significant_digits_and_roundtrip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1.0, -0.0] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn json_keys_are_sorted() {
        let mut m = std::collections::HashMap::new();
        m.insert("zeta", 1.0);
        m.insert("alpha", 0.5);
        let s = to_json_string(&m).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
        assert!(s.contains("5.0000000000000000e-1"));
    }

    #[test]
    fn csv_roundtrip_preserves_cells() {
        let mut t = Table::new("demo", &["domain", "n", "err", "ok"]);
        t.push(vec![
            "ellipsoid:r=1.5,q=2".into(),
            8usize.into(),
            (1.0f64 / 7.0).into(),
            true.into(),
        ]);
        t.push(vec![
            "ball".into(),
            16usize.into(),
            1e-300.into(),
            false.into(),
        ]);
        let s = table_csv_string(&t).unwrap();
        let back = read_table_csv("demo", s.as_bytes()).unwrap();
        assert_eq!(back, t);
    }
}
