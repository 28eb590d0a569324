use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::{ExperimentConfig, OutputFormat};
use crate::ext::ExtReal;
use crate::{Error, Result};

/// One cell of a record.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Real(ExtReal),
    Int(u64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Real(x) => x.to_string(),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
            Value::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Value::Real(x) => serde_json::to_value(x).expect("extended reals serialize"),
            Value::Int(i) => (*i).into(),
            Value::Bool(b) => (*b).into(),
            Value::Text(s) => s.clone().into(),
            Value::Missing => serde_json::Value::Null,
        }
    }
}

impl From<ExtReal> for Value {
    fn from(x: ExtReal) -> Self {
        Value::Real(x)
    }
}
impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(ExtReal::new(x))
    }
}
impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as u64)
    }
}
impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}
impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.into())
    }
}
impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

/// One output row. `gap` is `quantity − target` for the quantity the
/// experiment compares with its target.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub kind: &'static str,
    pub n: usize,
    pub quantities: Vec<(&'static str, Value)>,
    pub target: Option<ExtReal>,
    pub gap: Option<ExtReal>,
    pub seed: u64,
    pub config_hash: String,
    /// Whether the row passes its checks; any failing row makes the run fail.
    pub ok: bool,
}

impl RunRecord {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.quantities.iter().find(|(k, _)| *k == name).map(|(_, v)| v)
    }

    pub fn real(&self, name: &str) -> Option<ExtReal> {
        match self.get(name) {
            Some(Value::Real(x)) => Some(*x),
            _ => None,
        }
    }
}

/// `quantity − target`, with `−∞ − (−∞)` and `+∞ − (+∞)` read as 0.
pub fn signed_gap(quantity: ExtReal, target: ExtReal) -> ExtReal {
    quantity.checked_add(-target).unwrap_or(ExtReal::ZERO)
}

/// Header of an output table.
pub fn header(quantity_names: &[&str]) -> Vec<String> {
    let mut h = vec!["kind".to_string(), "n".into()];
    h.extend(quantity_names.iter().map(|s| s.to_string()));
    h.extend(["target", "gap", "seed", "config_hash"].map(String::from));
    h
}

fn cells(r: &RunRecord) -> Vec<(String, Value)> {
    let mut c = vec![("kind".to_string(), Value::from(r.kind)), ("n".into(), Value::from(r.n))];
    c.extend(r.quantities.iter().map(|(k, v)| (k.to_string(), v.clone())));
    c.push(("target".into(), r.target.map_or(Value::Missing, Value::Real)));
    c.push(("gap".into(), r.gap.map_or(Value::Missing, Value::Real)));
    c.push(("seed".into(), Value::Int(r.seed)));
    c.push(("config_hash".into(), Value::Text(r.config_hash.clone())));
    c
}

/// Writes records as CSV (with the given quantity columns) or JSONL.
pub fn write_records<W: Write>(
    out: W,
    records: &[RunRecord],
    quantity_names: &[&str],
    format: OutputFormat,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header(quantity_names)).map_err(csv_err)?;
            for r in records {
                let names: Vec<&str> = r.quantities.iter().map(|(k, _)| *k).collect();
                if names != quantity_names {
                    return Err(Error::invalid(format!("record columns {names:?} differ from the header")));
                }
                w.write_record(cells(r).iter().map(|(_, v)| v.csv())).map_err(csv_err)?;
            }
            w.flush().map_err(|e| Error::io("<csv>", e))?;
        }
        OutputFormat::Jsonl => {
            let mut out = out;
            for r in records {
                let line = JsonRow(cells(r));
                serde_json::to_writer(&mut out, &line)?;
                out.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
            }
        }
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Keeps the column order of the CSV form.
struct JsonRow(Vec<(String, Value)>);

impl Serialize for JsonRow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, &v.json())?;
        }
        m.end()
    }
}

/// Writes records to `path` in the config's format.
pub fn emit(records: &[RunRecord], quantity_names: &[&str], cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = std::io::BufWriter::new(file);
    write_records(&mut buf, records, quantity_names, cfg.format)?;
    buf.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, beta: ExtReal) -> RunRecord {
        RunRecord {
            kind: "stein",
            n,
            quantities: vec![("beta_over_n", beta.into()), ("ok", true.into())],
            target: Some(ExtReal::Finite(-0.5)),
            gap: Some(signed_gap(beta, ExtReal::Finite(-0.5))),
            seed: 3,
            config_hash: "abc".into(),
            ok: true,
        }
    }

    #[test]
    fn empty_list_gives_header_only() {
        let mut out = Vec::new();
        write_records(&mut out, &[], &["beta_over_n", "ok"], OutputFormat::Csv).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "kind,n,beta_over_n,ok,target,gap,seed,config_hash\n");
    }

    #[test]
    fn rows_keep_order_and_sentinels() {
        let rows = [row(4, ExtReal::Finite(-0.25)), row(8, ExtReal::NegInf)];
        let mut out = Vec::new();
        write_records(&mut out, &rows, &["beta_over_n", "ok"], OutputFormat::Csv).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "stein,4,-0.25,true,-0.5,0.25,3,abc");
        assert_eq!(lines[2], "stein,8,-inf,true,-0.5,-inf,3,abc");

        let mut out = Vec::new();
        write_records(&mut out, &rows, &["beta_over_n", "ok"], OutputFormat::Jsonl).unwrap();
        let text = String::from_utf8(out).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with(r#"{"kind":"stein","n":4,"beta_over_n":-0.25"#), "{first}");
        assert!(text.lines().nth(1).unwrap().contains(r#""beta_over_n":"-inf""#));
    }

    #[test]
    fn gap_of_matching_infinities_is_zero() {
        assert_eq!(signed_gap(ExtReal::NegInf, ExtReal::NegInf), ExtReal::ZERO);
        assert_eq!(signed_gap(ExtReal::NegInf, ExtReal::Finite(-1.0)), ExtReal::NegInf);
    }

    #[test]
    fn mismatched_columns_are_rejected() {
        let mut out = Vec::new();
        assert!(write_records(&mut out, &[row(1, ExtReal::ZERO)], &["x"], OutputFormat::Csv).is_err());
    }
}
