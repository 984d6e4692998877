//! Result records (CSV and JSON, schema v1) and the sweep config format.
//!
//! CSV columns are `estimand,p,param_json,mean,stderr,n,seed`; `param_json`
//! is a compact JSON object with sorted keys. The JSON mirror is
//! `{"schema": "v1", "records": [...]}` and additionally carries `wall_time`.
//!
//! Sweep configs are flat `key = value` text. Keys before the first
//! `[section]` are defaults for every section; each section names an estimand.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "v1";
pub const CSV_HEADER: [&str; 7] = ["estimand", "p", "param_json", "mean", "stderr", "n", "seed"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub estimand: String,
    pub p: f64,
    pub params: Map<String, Value>,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    /// Seconds spent producing the record; not part of the CSV.
    #[serde(default)]
    pub wall_time: Option<f64>,
}

impl ResultRecord {
    pub fn new(estimand: &str, p: f64, params: Map<String, Value>, mean: f64, stderr: f64, n: u64, seed: u64) -> Self {
        ResultRecord { estimand: estimand.to_string(), p, params, mean, stderr, n, seed, wall_time: None }
    }

    /// Equality ignoring `wall_time`.
    pub fn same_result(&self, o: &ResultRecord) -> bool {
        ResultRecord { wall_time: None, ..self.clone() } == ResultRecord { wall_time: None, ..o.clone() }
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    estimand: String,
    p: f64,
    param_json: String,
    mean: f64,
    stderr: f64,
    n: u64,
    seed: u64,
}

pub fn write_csv<W: Write>(out: W, records: &[ResultRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_HEADER).map_err(csv_err)?;
    }
    for r in records {
        let row = CsvRow {
            estimand: r.estimand.clone(),
            p: r.p,
            param_json: serde_json::to_string(&r.params).expect("maps serialize"),
            mean: r.mean,
            stderr: r.stderr,
            n: r.n,
            seed: r.seed,
        };
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn to_csv_string(records: &[ResultRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRecord>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rd.headers().map_err(|e| Error::parse(e.to_string()))?.clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != CSV_HEADER {
        return Err(Error::parse(format!("CSV header must be {}, got {}", CSV_HEADER.join(","), got.join(","))));
    }
    rd.deserialize()
        .enumerate()
        .map(|(i, row)| {
            let row: CsvRow = row.map_err(|e| Error::parse(format!("row {}: {e}", i + 1)))?;
            let params = match serde_json::from_str::<Value>(&row.param_json) {
                Ok(Value::Object(m)) => m,
                _ => return Err(Error::parse(format!("row {}: param_json must be a JSON object", i + 1))),
            };
            Ok(ResultRecord::new(&row.estimand, row.p, params, row.mean, row.stderr, row.n, row.seed))
        })
        .collect()
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRecord>> {
    read_csv(text.as_bytes())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDoc {
    schema: String,
    records: Vec<ResultRecord>,
}

pub fn to_json_string(records: &[ResultRecord]) -> String {
    let doc = JsonDoc { schema: SCHEMA.to_string(), records: records.to_vec() };
    serde_json::to_string_pretty(&doc).expect("records serialize")
}

pub fn parse_json(text: &str) -> Result<Vec<ResultRecord>> {
    let doc: JsonDoc = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
    if doc.schema != SCHEMA {
        return Err(Error::parse(format!("unsupported schema {:?}, expected {SCHEMA:?}", doc.schema)));
    }
    Ok(doc.records)
}

/// Parsed sweep config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepConfig {
    pub defaults: BTreeMap<String, String>,
    pub sections: Vec<(String, BTreeMap<String, String>)>,
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-' || b == b'_')
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let at = |msg: &str| Error::parse(format!("line {}: {msg}", no + 1));
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| at("section header must end with `]`"))?.trim();
                if !is_ident(name) {
                    return Err(at("section names use lowercase letters, digits, `-` and `_`"));
                }
                if cfg.sections.iter().any(|(n, _)| n == name) {
                    return Err(at(&format!("duplicate section [{name}]")));
                }
                cfg.sections.push((name.to_string(), BTreeMap::new()));
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| at("expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if !is_ident(k) {
                return Err(at("keys use lowercase letters, digits, `-` and `_`"));
            }
            if v.is_empty() {
                return Err(at(&format!("key `{k}` has an empty value")));
            }
            let map = match cfg.sections.last_mut() {
                Some((_, m)) => m,
                None => &mut cfg.defaults,
            };
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(at(&format!("duplicate key `{k}`")));
            }
        }
        if cfg.sections.is_empty() {
            return Err(Error::parse("a sweep config needs at least one [estimand] section"));
        }
        Ok(cfg)
    }

    /// Value of `key` in `section`, falling back to the defaults.
    pub fn get<'a>(&'a self, section: &str, key: &str) -> Option<&'a str> {
        self.sections
            .iter()
            .find(|(n, _)| n == section)
            .and_then(|(_, m)| m.get(key))
            .or_else(|| self.defaults.get(key))
            .map(String::as_str)
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| Error::parse(format!("`{key}`: cannot parse {:?}", s.trim()))))
        .collect()
}
