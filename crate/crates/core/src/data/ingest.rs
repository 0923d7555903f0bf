use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;

use super::{DataError, PartialSeries, PricePanel};
use crate::{Error, Result};

/// Result of CSV ingestion: complete assets go into the panel, the rest are
/// kept aside as partial series for optional imputation.
#[derive(Debug, Clone)]
pub struct LoadedPanel {
    pub panel: PricePanel,
    pub excluded: Vec<String>,
    pub partial: Vec<PartialSeries>,
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<LoadedPanel> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(read_csv(file)?)
}

/// Parse `date,<id1>,<id2>,...` CSV text. Rows may come in any order; they
/// are sorted by date. Empty cells mark missing values.
pub fn read_csv<R: Read>(reader: R) -> Result<LoadedPanel, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_error(1, e))?,
        None => return Err(DataError::Parse { row: 1, column: 1, message: "empty file".into() }),
    };
    let first = header.get(0).unwrap_or("").trim_start_matches('\u{feff}');
    if first != "date" {
        return Err(DataError::Parse {
            row: 1,
            column: 1,
            message: format!("expected header cell 'date', found '{first}'"),
        });
    }
    let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if ids.is_empty() {
        return Err(DataError::InsufficientData { found: 0, required: 2 });
    }

    let mut rows: Vec<(NaiveDate, Vec<Option<f64>>)> = Vec::new();
    for (i, rec) in records.enumerate() {
        let row_no = i + 2;
        let rec = rec.map_err(|e| csv_error(row_no, e))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        let date_cell = rec.get(0).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_cell, "%Y-%m-%d").map_err(|e| DataError::Parse {
            row: row_no,
            column: 1,
            message: format!("bad date '{date_cell}': {e}"),
        })?;
        let mut vals = Vec::with_capacity(ids.len());
        for (j, cell) in rec.iter().skip(1).enumerate() {
            if cell.is_empty() {
                vals.push(None);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| DataError::Parse {
                row: row_no,
                column: j + 2,
                message: format!("bad number '{cell}'"),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFinite { asset: ids[j].clone(), date });
            }
            vals.push(Some(v));
        }
        rows.push((date, vals));
    }

    rows.sort_by_key(|(d, _)| *d);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(DataError::DuplicateDate(w[0].0));
    }
    let dates: Vec<NaiveDate> = rows.iter().map(|(d, _)| *d).collect();

    for (j, id) in ids.iter().enumerate() {
        for (date, vals) in &rows {
            if let Some(v) = vals[j] {
                if v <= 0.0 {
                    return Err(DataError::NonPositive { asset: id.clone(), date: *date, value: v });
                }
            }
        }
    }

    let mut complete_ids = Vec::new();
    let mut complete_vals = Vec::new();
    let mut excluded = Vec::new();
    let mut partial = Vec::new();
    for (j, id) in ids.iter().enumerate() {
        let col: Vec<Option<f64>> = rows.iter().map(|(_, v)| v[j]).collect();
        if col.iter().all(Option::is_some) {
            complete_ids.push(id.clone());
            complete_vals.push(col.into_iter().flatten().collect());
        } else {
            excluded.push(id.clone());
            partial.push(PartialSeries { asset_id: id.clone(), values: col });
        }
    }
    if complete_ids.len() < 2 {
        return Err(DataError::InsufficientData { found: complete_ids.len(), required: 2 });
    }
    let panel = PricePanel::new(complete_ids, dates, complete_vals)?;
    Ok(LoadedPanel { panel, excluded, partial })
}

fn csv_error(row: usize, e: csv::Error) -> DataError {
    let row = e.position().map(|p| p.line() as usize).filter(|&l| l > 0).unwrap_or(row);
    DataError::Parse { row, column: 0, message: e.to_string() }
}

/// Load every `<stem>_<maturity>.csv` in `dir`, keyed by maturity label.
pub fn load_maturity_csvs(dir: impl AsRef<Path>, stem: &str) -> Result<BTreeMap<String, LoadedPanel>> {
    let dir = dir.as_ref();
    let prefix = format!("{stem}_");
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let Some(maturity) = name.strip_prefix(&prefix).and_then(|rest| rest.strip_suffix(".csv")) else {
            continue;
        };
        if maturity.is_empty() {
            continue;
        }
        let mut loaded = load_csv(entry.path())?;
        loaded.panel = loaded.panel.with_maturity(maturity);
        out.insert(maturity.to_string(), loaded);
    }
    if out.is_empty() {
        return Err(DataError::NoMaturityFiles(dir.join(format!("{stem}_*.csv")).display().to_string()).into());
    }
    Ok(out)
}
