//! Delimited-text ingestion for labeled feature tables.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::measures::{Label, LabeledDataset};
use crate::rng::{domain, substream};

/// Which column holds the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub label_column: LabelColumn,
    /// Label token mapped to `+1`; every other token maps to `−1`.
    pub positive_value: String,
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            label_column: LabelColumn::Last,
            positive_value: "1".into(),
            delimiter: b',',
            has_header: true,
        }
    }
}

/// Reads `path` and optionally subsamples positives towards `target_p`.
pub fn load_csv(
    path: impl AsRef<Path>,
    schema: &CsvSchema,
    target_p: Option<f64>,
    seed: u64,
) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let data = parse_csv(file, schema)?;
    match target_p {
        Some(p) => subsample_positives(&data, p, seed),
        None => Ok(data),
    }
}

/// Parses a table from any reader. Rows in errors are 1-based file lines.
pub fn parse_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    let header = if schema.has_header {
        Some(rdr.headers()?.clone())
    } else {
        None
    };

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut label_idx: Option<usize> = None;

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let cols = record.len();
        let w = *width.get_or_insert(cols);
        if cols != w {
            return Err(Error::Parse {
                row: line,
                column: cols.min(w) + 1,
                message: format!("expected {w} fields, found {cols}"),
            });
        }
        let li = match label_idx {
            Some(i) => i,
            None => {
                let i = resolve_label_column(&schema.label_column, header.as_ref(), w)?;
                label_idx = Some(i);
                i
            }
        };
        for (j, field) in record.iter().enumerate() {
            if j == li {
                let label = if field == schema.positive_value {
                    Label::Positive
                } else {
                    Label::Negative
                };
                labels.push(label);
                continue;
            }
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                row: line,
                column: j + 1,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: j + 1,
                    message: format!("non-finite value {field:?}"),
                });
            }
            features.push(value);
        }
    }

    let dim = match width {
        Some(w) if w >= 2 => w - 1,
        Some(_) => {
            return Err(Error::Schema(
                "need at least one feature column besides the label".into(),
            ))
        }
        None => {
            let w = header.as_ref().map_or(0, |h| h.len());
            if w < 2 {
                return Err(Error::Schema("empty table".into()));
            }
            w - 1
        }
    };
    LabeledDataset::from_flat(dim, features, labels)
}

fn resolve_label_column(col: &LabelColumn, header: Option<&csv::StringRecord>, width: usize) -> Result<usize> {
    let idx = match col {
        LabelColumn::Last => width.checked_sub(1),
        LabelColumn::Index(i) => Some(*i),
        LabelColumn::Name(name) => {
            let header = header.ok_or_else(|| {
                Error::Schema(format!(
                    "label column {name:?} given by name but the file has no header"
                ))
            })?;
            Some(
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::Schema(format!("no column named {name:?}")))?,
            )
        }
    };
    match idx {
        Some(i) if i < width => Ok(i),
        _ => Err(Error::Schema(format!(
            "label column {col:?} out of range for {width} columns"
        ))),
    }
}

/// Keeps every negative and a seeded uniform subset of positives so that the
/// positive fraction is as close to `target_p` as integer counts allow (at
/// least one positive). Row order is preserved.
fn subsample_positives(data: &LabeledDataset, target_p: f64, seed: u64) -> Result<LabeledDataset> {
    crate::error::open_unit("target_p", target_p)?;
    let (n_pos, n_neg) = data.class_counts();
    if n_pos == 0 {
        return Err(Error::DegenerateClass {
            positives: 0,
            negatives: n_neg,
        });
    }
    let ideal = target_p * n_neg as f64 / (1.0 - target_p);
    let keep = (ideal.round() as usize).clamp(1, n_pos);
    let pos_idx: Vec<usize> = (0..data.len()).filter(|&i| data.label(i).is_positive()).collect();
    let mut rng = substream(seed, &[domain::SUBSAMPLE]);
    let mut chosen = vec![false; n_pos];
    for j in sample(&mut rng, n_pos, keep).iter() {
        chosen[j] = true;
    }
    let mut kept_pos = pos_idx
        .iter()
        .zip(&chosen)
        .filter(|(_, &c)| c)
        .map(|(&i, _)| i)
        .peekable();
    let mut rows = Vec::with_capacity(n_neg + keep);
    for i in 0..data.len() {
        if !data.label(i).is_positive() {
            rows.push(i);
        } else if kept_pos.peek() == Some(&i) {
            rows.push(i);
            kept_pos.next();
        }
    }
    Ok(data.select(&rows))
}

/// Rescales each feature column to `[0, 1]`; constant columns become 0.
pub fn min_max_scale(data: &mut LabeledDataset) {
    let dim = data.dim();
    let n = data.len();
    for j in 0..dim {
        let (lo, hi) = (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let v = data.features()[i * dim + j];
            (lo.min(v), hi.max(v))
        });
        let span = hi - lo;
        let feats = data.features_mut();
        for i in 0..n {
            let v = &mut feats[i * dim + j];
            *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
        }
    }
}

/// Writes `x1..xd,label` rows with 17 significant digits.
pub fn write_csv<W: Write>(writer: W, data: &LabeledDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=data.dim()).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for (x, y) in data.iter() {
        let mut rec: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
        rec.push(y.as_i8().to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n_pos: usize, n_neg: usize) -> String {
        let mut s = String::from("a,b,class\n");
        for i in 0..n_pos + n_neg {
            let label = if i % 5 == 0 && i / 5 < n_pos { 1 } else { 0 };
            s.push_str(&format!("{i},{},{label}\n", i as f64 * 0.5));
        }
        s
    }

    #[test]
    fn parses_and_preserves_order() {
        let text = table(20, 80);
        let data = parse_csv(text.as_bytes(), &CsvSchema::default()).unwrap();
        assert_eq!(data.len(), 100);
        assert_eq!(data.dim(), 2);
        assert_eq!(data.class_counts(), (20, 80));
        for i in 0..100 {
            assert_eq!(data.row(i)[0], i as f64);
        }
    }

    #[test]
    fn subsamples_positives_towards_target() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(table(20, 80).as_bytes()).unwrap();
        let data = load_csv(file.path(), &CsvSchema::default(), Some(0.05), 3).unwrap();
        let (pos, neg) = data.class_counts();
        assert_eq!(neg, 80);
        assert!((4..=5).contains(&pos), "{pos}");
        let expected = (0.05 * data.len() as f64).round() as i64;
        assert!((pos as i64 - expected).abs() <= 1);
        let firsts: Vec<f64> = data.iter().map(|r| r.0[0]).collect();
        assert!(firsts.windows(2).all(|w| w[0] < w[1]));

        let again = load_csv(file.path(), &CsvSchema::default(), Some(0.05), 3).unwrap();
        assert_eq!(data, again);
        let full = load_csv(file.path(), &CsvSchema::default(), None, 3).unwrap();
        assert_eq!(full.len(), 100);
    }

    #[test]
    fn keeps_at_least_one_positive() {
        let data = parse_csv(table(3, 50).as_bytes(), &CsvSchema::default()).unwrap();
        let sub = subsample_positives(&data, 1e-6, 0).unwrap();
        assert_eq!(sub.class_counts(), (1, 50));
    }

    #[test]
    fn malformed_row_names_line() {
        let text = "a,b,label\n1,2,1\n3,oops,0\n";
        match parse_csv(text.as_bytes(), &CsvSchema::default()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        let ragged = "a,b,label\n1,2,1\n3,0\n";
        assert!(matches!(
            parse_csv(ragged.as_bytes(), &CsvSchema::default()),
            Err(Error::Parse { row: 3, .. })
        ));
    }

    #[test]
    fn label_by_name_and_delimiter() {
        let text = "y;f1;f2\nanomaly;1.5;2\nnormal;0;0\n";
        let schema = CsvSchema {
            label_column: LabelColumn::Name("y".into()),
            positive_value: "anomaly".into(),
            delimiter: b';',
            has_header: true,
        };
        let d = parse_csv(text.as_bytes(), &schema).unwrap();
        assert_eq!(d.labels(), &[Label::Positive, Label::Negative]);
        assert_eq!(d.row(0), &[1.5, 2.0]);

        let missing = CsvSchema {
            label_column: LabelColumn::Name("target".into()),
            ..schema
        };
        assert!(matches!(parse_csv(text.as_bytes(), &missing), Err(Error::Schema(_))));
    }

    #[test]
    fn min_max_scaling() {
        let mut d = parse_csv("a,b,l\n1,5,1\n3,5,0\n2,5,0\n".as_bytes(), &CsvSchema::default()).unwrap();
        min_max_scale(&mut d);
        assert_eq!(d.features(), &[0.0, 0.0, 1.0, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn csv_writer_reads_back() {
        let d = parse_csv("a,b,l\n0.1,-2.5e-7,1\n3,4,-1\n".as_bytes(), &CsvSchema::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &d).unwrap();
        let back = parse_csv(buf.as_slice(), &CsvSchema::default()).unwrap();
        assert_eq!(back, d);
    }
}
