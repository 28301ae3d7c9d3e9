//! Keyed result rows and their CSV form.
//!
//! Output layout: `# key = value` comment lines echoing the effective
//! configuration, a header row, then one line per [`ResultRow`]. Reals are
//! written with 17 significant digits so parsing restores them exactly.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Scalar {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Scalar::Int(i) => Some(i as f64),
            Scalar::Real(r) => Some(r),
            _ => None,
        }
    }

    fn parse(token: &str) -> Self {
        match token {
            "true" => return Scalar::Bool(true),
            "false" => return Scalar::Bool(false),
            _ => {}
        }
        if let Ok(i) = token.parse::<i64>() {
            return Scalar::Int(i);
        }
        match token.parse::<f64>() {
            Ok(r) => Scalar::Real(r),
            Err(_) => Scalar::Text(token.to_string()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Real(r) if r.is_finite() => write!(f, "{r:.16e}"),
            Scalar::Real(r) => write!(f, "{r}"),
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Real(v)
    }
}

impl From<usize> for Scalar {
    fn from(v: usize) -> Self {
        Scalar::Int(v as i64)
    }
}

impl From<u64> for Scalar {
    fn from(v: u64) -> Self {
        Scalar::Int(v as i64)
    }
}

impl From<bool> for Scalar {
    fn from(v: bool) -> Self {
        Scalar::Bool(v)
    }
}

impl From<&str> for Scalar {
    fn from(v: &str) -> Self {
        Scalar::Text(v.to_string())
    }
}

impl From<String> for Scalar {
    fn from(v: String) -> Self {
        Scalar::Text(v)
    }
}

/// An ordered record of named scalars.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultRow {
    fields: Vec<(String, Scalar)>,
}

impl ResultRow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Scalar>) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<Scalar>) {
        self.fields.push((key.to_string(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Scalar> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn real(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(Scalar::as_f64)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(k, _)| k.as_str())
    }

    pub fn fields(&self) -> &[(String, Scalar)] {
        &self.fields
    }
}

/// Writes config comments, header and rows. All rows must share one key order.
pub fn write_results<W: Write>(mut out: W, config: &[(String, String)], rows: &[ResultRow]) -> Result<()> {
    let io = |e| Error::io("<output>", e);
    for (k, v) in config {
        writeln!(out, "# {k} = {v}").map_err(io)?;
    }
    let Some(first) = rows.first() else {
        return Ok(());
    };
    let header: Vec<&str> = first.keys().collect();
    for (i, row) in rows.iter().enumerate() {
        if !row.keys().eq(header.iter().copied()) {
            return Err(Error::Schema(format!("row {} has a different column set", i + 1)));
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for row in rows {
        w.write_record(row.fields.iter().map(|(_, v)| v.to_string()))?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn results_to_string(config: &[(String, String)], rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_results(&mut buf, config, rows)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// `# key = value` header lines of a results file.
pub type ConfigLines = Vec<(String, String)>;

/// Inverse of [`write_results`].
pub fn read_results<R: Read>(input: R) -> Result<(ConfigLines, Vec<ResultRow>)> {
    let mut reader = BufReader::new(input);
    let mut config = Vec::new();
    let mut body = String::new();
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(|e| Error::io("<input>", e))? == 0 {
            break;
        }
        if let Some(comment) = line.strip_prefix("# ") {
            let (k, v) = comment
                .trim_end()
                .split_once(" = ")
                .ok_or_else(|| Error::Schema(format!("bad config comment: {}", line.trim_end())))?;
            config.push((k.to_string(), v.to_string()));
        } else {
            body.push_str(&line);
            reader.read_to_string(&mut body).map_err(|e| Error::io("<input>", e))?;
            break;
        }
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let mut row = ResultRow::new();
        for (k, v) in header.iter().zip(record.iter()) {
            row.push(k, Scalar::parse(v));
        }
        rows.push(row);
    }
    Ok((config, rows))
}
