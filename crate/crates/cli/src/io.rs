//! Numeric CSV input and 17-significant-digit CSV output.

use std::fs::File;
use std::path::Path;

use wavemix::DMatrix;

use crate::{io_error, CliError, CliResult};

/// `{:.16e}` prints 17 significant digits, enough for every `f64` to parse
/// back to the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A numeric table with an optional header row and optional leading label
/// column, each detected by a field that does not parse as a number.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub labels: Option<Vec<String>>,
    pub values: DMatrix<f64>,
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut records: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec.iter().map(str::to_string).collect());
    }
    let numeric = |s: &str| s.parse::<f64>().is_ok();

    let header = match records.first() {
        Some(first) if first.iter().skip(1).any(|f| !numeric(f)) => Some(records.remove(0)),
        _ => None,
    };
    if records.is_empty() {
        return Err(CliError::Usage(format!("{}: no data rows", path.display())));
    }
    let labelled = records.iter().all(|r| !r.is_empty() && !numeric(&r[0]));
    let labels = labelled.then(|| records.iter().map(|r| r[0].clone()).collect::<Vec<_>>());
    let skip = usize::from(labelled);

    let ncols = records[0].len() - skip;
    let mut values = DMatrix::zeros(records.len(), ncols);
    for (r, rec) in records.iter().enumerate() {
        if rec.len() - skip != ncols {
            return Err(CliError::Usage(format!(
                "{}: row {} has {} values, expected {ncols}",
                path.display(),
                r + 1,
                rec.len() - skip
            )));
        }
        for (c, field) in rec[skip..].iter().enumerate() {
            values[(r, c)] = field.parse().map_err(|_| {
                CliError::Usage(format!(
                    "{}: row {}, column {}: '{field}' is not a number",
                    path.display(),
                    r + 1,
                    c + 1 + skip
                ))
            })?;
        }
    }
    Ok(Table {
        header,
        labels,
        values,
    })
}

/// Writes `header` then one row per entry of `rows`.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(header).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}
