//! Column tables: CSV with a header row, `#` comment lines allowed.

use std::path::Path;

use crate::error::{CliError, Result};

/// Reads the named numeric columns (in the order given) from a CSV file.
/// Extra columns are ignored; every listed column must be present.
pub fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let table_err = |message: String| CliError::Table {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => table_err(format!("{other:?}")),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| table_err(e.to_string()))?
        .clone();
    let index: Vec<usize> = names
        .iter()
        .map(|name| {
            headers.iter().position(|h| h == *name).ok_or_else(|| {
                table_err(format!(
                    "missing column `{name}` (header: {})",
                    headers.iter().collect::<Vec<_>>().join(",")
                ))
            })
        })
        .collect::<Result<_>>()?;
    let mut columns = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|e| table_err(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        for (column, &i) in columns.iter_mut().zip(&index) {
            let cell = record.get(i).unwrap_or_default();
            let value: f64 = cell
                .parse()
                .map_err(|_| table_err(format!("line {line}: `{cell}` is not a number")))?;
            column.push(value);
        }
    }
    if columns[0].is_empty() {
        return Err(table_err("no data rows".into()));
    }
    Ok(columns)
}

/// Writes named columns as CSV.
pub fn write_columns<W: std::io::Write>(
    out: &mut W,
    names: &[&str],
    columns: &[&[f64]],
) -> std::io::Result<()> {
    writeln!(out, "{}", names.join(","))?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        let cells: Vec<String> = columns.iter().map(|c| c[i].to_string()).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
