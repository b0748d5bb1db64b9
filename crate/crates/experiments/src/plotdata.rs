//! Reshapes result CSVs into one wide table per figure: an x column followed
//! by one column per plotted series. Cells are copied as text, never reparsed.

use std::path::{Path, PathBuf};

use crate::error::{ExpError, ExpResult};
use crate::output::{writer, BOUND_HEADER, BOUND_MIN, DOA_RMSE_HEADER, SPECTRUM_RMSE_HEADER, SPECTRUM_TERMS_HEADER};
use crate::summary::Criterion;

type Table = (Vec<String>, Vec<Vec<String>>);

/// Output column name, source value column and row filter.
type Series<'a> = (String, usize, Box<dyn Fn(&csv::StringRecord) -> bool + 'a>);

fn mismatch(msg: impl Into<String>) -> ExpError {
    ExpError::SchemaMismatch(msg.into())
}

/// Values of `key` in order of first appearance.
fn distinct(rows: &[csv::StringRecord], key: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in rows {
        if !out.iter().any(|v| v == &r[key]) {
            out.push(r[key].to_string());
        }
    }
    out
}

/// Long-to-wide pivot: one output row per distinct `x`, one column per
/// `(series, value column)` pair. Absent combinations stay empty; repeated
/// ones are an error because a cell would be lost.
fn pivot(rows: &[csv::StringRecord], x: usize, series: &[Series<'_>]) -> ExpResult<Vec<Vec<String>>> {
    let xs = distinct(rows, x);
    let mut table = vec![vec![String::new(); series.len() + 1]; xs.len()];
    for (row, xv) in table.iter_mut().zip(&xs) {
        row[0] = xv.clone();
    }
    for r in rows {
        let i = xs.iter().position(|v| v == &r[x]).expect("x collected from rows");
        let mut placed = false;
        for (j, (_, col, select)) in series.iter().enumerate() {
            if select(r) {
                if !table[i][j + 1].is_empty() {
                    return Err(mismatch(format!("duplicate entry for x = {}", &r[x])));
                }
                table[i][j + 1] = r[*col].to_string();
                placed = true;
            }
        }
        if !placed {
            return Err(mismatch(format!("row {:?} belongs to no series", r.iter().collect::<Vec<_>>())));
        }
    }
    Ok(table)
}

fn rmse_series(rows: &[csv::StringRecord], label_col: usize, value_col: usize) -> ExpResult<Vec<Series<'_>>> {
    let known: Vec<&str> = Criterion::ALL.iter().map(|c| c.name()).chain([BOUND_MIN]).collect();
    if let Some(r) = rows.iter().find(|r| !known.contains(&&r[label_col])) {
        return Err(mismatch(format!("unknown criterion '{}'", &r[label_col])));
    }
    Ok(known
        .into_iter()
        .map(|name| {
            let header = if name == BOUND_MIN { name.to_string() } else { format!("rmse_{name}") };
            let select: Box<dyn Fn(&csv::StringRecord) -> bool> = Box::new(move |r: &csv::StringRecord| &r[label_col] == name);
            (header, value_col, select)
        })
        .collect())
}

fn per_key_series<'a>(rows: &[csv::StringRecord], key: usize, values: &[(&str, usize)], prefix_key: &str) -> Vec<Series<'a>> {
    let keys = distinct(rows, key);
    let mut out: Vec<Series<'a>> = Vec::new();
    for (name, col) in values {
        for k in &keys {
            let kk = k.clone();
            out.push((format!("{name}_{prefix_key}{k}"), *col, Box::new(move |r: &csv::StringRecord| r[key] == *kk)));
        }
    }
    out
}

fn reshape(header: &csv::StringRecord, rows: &[csv::StringRecord]) -> ExpResult<Table> {
    let h: Vec<&str> = header.iter().collect();
    if h == DOA_RMSE_HEADER {
        let vars = distinct(rows, 0);
        let [var] = vars.as_slice() else {
            return Err(mismatch(format!("expected one sweep variable, found {vars:?}")));
        };
        let series = rmse_series(rows, 2, 3)?;
        let mut names = vec![var.clone()];
        names.extend(series.iter().map(|s| s.0.clone()));
        Ok((names, pivot(rows, 1, &series)?))
    } else if h == SPECTRUM_RMSE_HEADER {
        let series = rmse_series(rows, 1, 2)?;
        let mut names = vec!["T".to_string()];
        names.extend(series.iter().map(|s| s.0.clone()));
        Ok((names, pivot(rows, 0, &series)?))
    } else if h == BOUND_HEADER {
        let series = per_key_series(rows, 0, &[("mean_bound", 2), ("std_bound", 3)], "at_");
        let mut names = vec!["m".to_string()];
        names.extend(series.iter().map(|s| s.0.clone()));
        Ok((names, pivot(rows, 1, &series)?))
    } else if h == SPECTRUM_TERMS_HEADER {
        let series = per_key_series(rows, 0, &[("bias_sq", 2), ("cov_trace", 3), ("total", 4), ("whittle_crb", 5)], "T");
        let mut names = vec!["m".to_string()];
        names.extend(series.iter().map(|s| s.0.clone()));
        Ok((names, pivot(rows, 1, &series)?))
    } else {
        Err(mismatch(format!("unrecognized header {h:?}")))
    }
}

/// Path of the plot-data file for `csv`.
pub fn plotdata_path(csv: &Path, out_dir: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out_dir.join(format!("plot_{stem}.csv"))
}

/// Writes the figure table for one result CSV into `out_dir`.
pub fn emit_plotdata(csv: &Path, out_dir: &Path) -> ExpResult<PathBuf> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(csv)?;
    let header = reader.headers()?.clone();
    let rows = reader.records().collect::<Result<Vec<_>, _>>()?;
    if header.is_empty() || rows.is_empty() {
        return Err(mismatch(format!("{} has no data rows", csv.display())));
    }
    let (names, table) = reshape(&header, &rows)?;
    let path = plotdata_path(csv, out_dir);
    let mut w = writer(&path)?;
    w.write_record(&names)?;
    for row in table {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| ExpError::io(&path, e))?;
    Ok(path)
}
