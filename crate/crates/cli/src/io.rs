//! CSV files. Numbers are written in the shortest representation that parses
//! back to the same `f64`.

use std::path::Path;

use thinfree::fdsolver::Grid2D;

use crate::CliError;

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `x1, x2, u` rows in row-major order.
pub fn write_field(path: &Path, grid: Grid2D, u: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["x1", "x2", "u"]).map_err(|e| csv_err(path, e))?;
    for j in 0..grid.n() {
        for i in 0..grid.n() {
            w.serialize((grid.coord(i), grid.coord(j), u[grid.index(i, j)])).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Reads a field written by [`write_field`] and checks its coordinates.
pub fn read_field(path: &Path) -> Result<(Grid2D, Vec<f64>), CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        let row: (f64, f64, f64) = rec.map_err(|e| csv_err(path, e))?;
        rows.push(row);
    }
    let n = (rows.len() as f64).sqrt().round() as usize;
    if n * n != rows.len() {
        return Err(CliError::Usage(format!("{}: {} rows is not a square grid", path.display(), rows.len())));
    }
    let grid = Grid2D::new(n).map_err(CliError::from)?;
    let tol = 1e-9 * grid.h();
    for j in 0..n {
        for i in 0..n {
            let (x1, x2, _) = rows[grid.index(i, j)];
            if (x1 - grid.coord(i)).abs() > tol || (x2 - grid.coord(j)).abs() > tol {
                return Err(CliError::Usage(format!(
                    "{}: row {} has coordinates ({x1}, {x2}), expected a row-major grid on [-1, 1]^2",
                    path.display(),
                    grid.index(i, j) + 2
                )));
            }
        }
    }
    Ok((grid, rows.into_iter().map(|r| r.2).collect()))
}

/// Writes a table with a header row.
pub fn write_rows<R: serde::Serialize>(path: &Path, header: &[&str], rows: &[R]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Table with a header row as a string.
pub fn rows_to_string<R: serde::Serialize>(header: &[&str], rows: &[R]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.serialize(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv is utf-8")
}
