//! JSON envelopes and commented CSV tables.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Top-level JSON document written by every command.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: u32,
    pub command: &'a str,
    pub params: Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub data: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'a str, params: Value, seed: Option<u64>, data: T) -> Self {
        Envelope { schema: SCHEMA, command, params, seed, version: env!("CARGO_PKG_VERSION"), data }
    }
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, env: &Envelope<'_, T>) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, env)?;
    writeln!(w)?;
    Ok(())
}

/// A table with `# key: value` comment lines in front of the header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub comments: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    pub fn comment(mut self, key: &str, value: impl ToString) -> Self {
        self.comments.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn write_csv<W: Write>(mut w: W, t: &Table) -> Result<()> {
    for (k, v) in &t.comments {
        writeln!(w, "# {k}: {v}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&t.header)?;
    for r in &t.rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.5e-300, 1e21, -0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["x", "density"]).comment("params", "t=1").comment("seed", 7);
        t.push(vec![num(0.5), num(0.25)]);
        let mut buf = Vec::new();
        write_csv(&mut buf, &t).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# params: t=1\n# seed: 7\nx,density\n0.5,0.25\n");
    }

    #[test]
    fn envelope_fields() {
        let e = Envelope::new("moments", serde_json::json!({"n": 3}), None, vec![1, 2, 6]);
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["data"][2], 6);
        assert!(v["seed"].is_null());
    }
}
