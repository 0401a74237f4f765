//! Long-format CSV datasets: `series_id,period,value[,exog...]`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use aid_core::DemandSeries;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("header must start with series_id,period,value (found {0})")]
    Header(String),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("duplicate observation for series {id} at period {period}")]
    Duplicate { id: String, period: i64 },
    #[error("series {id} has a gap after period {after}")]
    Gap { id: String, after: i64 },
    #[error("series {id}: {message}")]
    Series { id: String, message: String },
    #[error("dataset has no rows")]
    Empty,
}

/// Series sorted by id, plus optional exogenous columns per series.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub series: Vec<DemandSeries>,
    pub frequency: usize,
    /// First period label of each series, aligned with `series`.
    pub first_period: Vec<i64>,
    pub exog_names: Vec<String>,
    /// `exog[s][k]` is column `k` of series `s`, one value per period.
    pub exog: Vec<Vec<Vec<f64>>>,
}

impl Dataset {
    pub fn from_series(series: Vec<DemandSeries>, frequency: usize) -> Self {
        let mut series = series;
        series.sort_by(|a, b| a.id().cmp(b.id()));
        let k = series.len();
        Self {
            series,
            frequency,
            first_period: vec![1; k],
            exog_names: Vec::new(),
            exog: vec![Vec::new(); k],
        }
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }
}

pub fn parse_dataset(path: &Path, frequency: usize) -> Result<Dataset, DatasetError> {
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_reader(file, frequency)
}

struct Row {
    period: i64,
    value: f64,
    exog: Vec<f64>,
}

pub fn parse_reader<R: Read>(reader: R, frequency: usize) -> Result<Dataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| DatasetError::Header(e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names.len() < 3 || names[0] != "series_id" || names[1] != "period" || names[2] != "value" {
        return Err(DatasetError::Header(names.join(",")));
    }
    let exog_names: Vec<String> = names[3..].iter().map(|s| s.to_string()).collect();

    let mut by_id: BTreeMap<String, Vec<Row>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| DatasetError::Row {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| DatasetError::Row { line, message };
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(bad("empty series_id".into()));
        }
        let period: i64 = record[1]
            .parse()
            .map_err(|_| bad(format!("period {:?} is not an integer", &record[1])))?;
        let value: f64 = record[2]
            .parse()
            .map_err(|_| bad(format!("value {:?} is not a number", &record[2])))?;
        if !value.is_finite() || value < 0.0 {
            return Err(bad(format!("value {value} must be finite and non-negative")));
        }
        let exog = record
            .iter()
            .skip(3)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| bad(format!("exogenous value {v:?} is not a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        by_id.entry(id).or_default().push(Row { period, value, exog });
    }
    if by_id.is_empty() {
        return Err(DatasetError::Empty);
    }

    let mut series = Vec::with_capacity(by_id.len());
    let mut first_period = Vec::with_capacity(by_id.len());
    let mut exog = Vec::with_capacity(by_id.len());
    for (id, mut rows) in by_id {
        rows.sort_by_key(|r| r.period);
        for w in rows.windows(2) {
            if w[0].period == w[1].period {
                return Err(DatasetError::Duplicate {
                    id,
                    period: w[0].period,
                });
            }
            if w[1].period != w[0].period + 1 {
                return Err(DatasetError::Gap {
                    id,
                    after: w[0].period,
                });
            }
        }
        first_period.push(rows[0].period);
        exog.push(
            (0..exog_names.len())
                .map(|k| rows.iter().map(|r| r.exog[k]).collect())
                .collect(),
        );
        let values = rows.iter().map(|r| r.value).collect();
        let s = DemandSeries::new(id.clone(), values, frequency).map_err(|e| DatasetError::Series {
            id,
            message: e.to_string(),
        })?;
        series.push(s);
    }
    Ok(Dataset {
        series,
        frequency,
        first_period,
        exog_names,
        exog,
    })
}

/// Writes a dataset in the input schema, optionally with a truth column.
pub fn write_dataset<W: Write>(out: W, dataset: &Dataset, truth: Option<&[Vec<bool>]>) -> anyhow::Result<()> {
    let mut w = crate::output::csv_writer(out)?;
    let mut header = vec!["series_id".to_string(), "period".into(), "value".into()];
    header.extend(dataset.exog_names.iter().cloned());
    if truth.is_some() {
        header.push("stockout".into());
    }
    w.write_record(&header)?;
    for (s_idx, s) in dataset.series.iter().enumerate() {
        for (t, v) in s.values().iter().enumerate() {
            let mut rec = vec![
                s.id().to_string(),
                (dataset.first_period[s_idx] + t as i64).to_string(),
                crate::output::fmt_num(*v),
            ];
            for col in &dataset.exog[s_idx] {
                rec.push(crate::output::fmt_num(col[t]));
            }
            if let Some(tr) = truth {
                rec.push(u8::from(tr[s_idx][t]).to_string());
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}
