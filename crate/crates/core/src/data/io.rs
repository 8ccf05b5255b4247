//! Plain CSV readers and writers for speed histories and N×N matrices.
//!
//! A file may start with a header row; the first row is treated as a header
//! iff any of its cells fails to parse as a number.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use super::series::{RoadNetworkSpec, SpeedSeries};
use crate::error::{Error, Result};

fn read_numeric_rows(path: &Path) -> Result<Vec<(usize, Vec<f64>)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut rows = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedCsv {
            line: idx + 1,
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        let parsed: Vec<Option<f64>> = record.iter().map(|c| c.parse::<f64>().ok()).collect();
        if idx == 0 && parsed.iter().any(Option::is_none) {
            continue;
        }
        if let Some(w) = width {
            if parsed.len() != w {
                return Err(Error::MalformedCsv {
                    line,
                    reason: format!("expected {w} columns, found {}", parsed.len()),
                });
            }
        } else {
            width = Some(parsed.len());
        }
        let mut values = Vec::with_capacity(parsed.len());
        for (col, cell) in parsed.into_iter().enumerate() {
            match cell {
                Some(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::MalformedCsv {
                        line,
                        reason: format!("column {} is not a finite number: {:?}", col + 1, &record[col]),
                    })
                }
            }
        }
        rows.push((line, values));
    }
    Ok(rows)
}

fn rows_to_matrix(rows: Vec<(usize, Vec<f64>)>, path: &Path) -> Result<Array2<f64>> {
    let width = rows.first().map_or(0, |(_, r)| r.len());
    if rows.is_empty() || width == 0 {
        return Err(Error::MalformedCsv {
            line: 1,
            reason: format!("{} contains no numeric rows", path.display()),
        });
    }
    let height = rows.len();
    let flat: Vec<f64> = rows.into_iter().flat_map(|(_, r)| r).collect();
    Ok(Array2::from_shape_vec((height, width), flat).expect("rows share a width"))
}

/// Reads a speed history: rows are time steps, columns are links.
pub fn load_speed_csv(path: impl AsRef<Path>, interval_minutes: u32) -> Result<SpeedSeries> {
    let path = path.as_ref();
    let rows = read_numeric_rows(path)?;
    for (row, (_, values)) in rows.iter().enumerate() {
        if let Some(col) = values.iter().position(|&v| v < 0.0) {
            return Err(Error::NegativeSpeed {
                row,
                col,
                value: values[col],
            });
        }
    }
    let series = SpeedSeries::new(rows_to_matrix(rows, path)?, interval_minutes, 0)?;
    series.require_full_day()?;
    Ok(series)
}

pub fn write_speed_csv(series: &SpeedSeries, path: impl AsRef<Path>) -> Result<()> {
    write_matrix_csv(series.values(), path)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    rows_to_matrix(read_numeric_rows(path)?, path)
}

/// Writes one row per line. Values use Rust's shortest round-trip formatting,
/// so reading the file back yields bit-identical numbers.
pub fn write_matrix_csv<T: std::fmt::Display>(matrix: &Array2<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        for row in matrix.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    out.write_all(b",")?;
                }
                write!(out, "{v}")?;
                first = false;
            }
            out.write_all(b"\n")?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Reads an adjacency CSV (0/1 entries) and a distance CSV (miles).
pub fn load_road_network(adjacency: impl AsRef<Path>, distance: impl AsRef<Path>) -> Result<RoadNetworkSpec> {
    let adj = read_matrix_csv(adjacency)?;
    let mut binary = Array2::<u8>::zeros(adj.dim());
    for ((i, j), &v) in adj.indexed_iter() {
        binary[[i, j]] = match v {
            0.0 => 0,
            1.0 => 1,
            other => {
                return Err(Error::BadParams(format!(
                    "adjacency entry ({i},{j}) = {other} is not 0 or 1"
                )))
            }
        };
    }
    RoadNetworkSpec::new(binary, read_matrix_csv(distance)?)
}

pub fn write_road_network(network: &RoadNetworkSpec, adjacency: impl AsRef<Path>, distance: impl AsRef<Path>) -> Result<()> {
    write_matrix_csv(network.adjacency(), adjacency)?;
    write_matrix_csv(network.distance(), distance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::fs;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn parses_small_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "s.csv", "60,55\n58,54");
        let s = load_speed_csv(&p, 720).unwrap();
        assert_eq!(s.values(), &array![[60.0, 55.0], [58.0, 54.0]]);
        assert_eq!(s.steps_per_day(), 2);
    }

    #[test]
    fn header_row_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "s.csv", "link_a,link_b\n60,55\n58,54\n");
        assert_eq!(load_speed_csv(&p, 720).unwrap().len(), 2);
    }

    #[test]
    fn ragged_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "s.csv", "1,2,3\n4,5\n");
        assert!(matches!(load_speed_csv(&p, 720), Err(Error::MalformedCsv { line: 2, .. })));
    }

    #[test]
    fn non_numeric_cell_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "s.csv", "1,2\n4,x\n");
        assert!(matches!(load_speed_csv(&p, 720), Err(Error::MalformedCsv { .. })));
        let p = write(&dir, "t.csv", "1,2\n4,inf\n");
        assert!(matches!(load_speed_csv(&p, 720), Err(Error::MalformedCsv { .. })));
    }

    #[test]
    fn negative_and_short_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "s.csv", "1,2\n4,-5\n");
        assert!(matches!(load_speed_csv(&p, 720), Err(Error::NegativeSpeed { row: 1, col: 1, .. })));
        let p = write(&dir, "t.csv", "1,2\n4,5\n");
        assert!(matches!(load_speed_csv(&p, 5), Err(Error::TooShort(_))));
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_speed_csv("/nonexistent/speeds.csv", 5).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/speeds.csv"));
    }

    #[test]
    fn network_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let net = RoadNetworkSpec::new(array![[0u8, 1], [1, 0]], array![[0.0, 0.3], [0.3, 0.0]]).unwrap();
        let (a, d) = (dir.path().join("a.csv"), dir.path().join("d.csv"));
        write_road_network(&net, &a, &d).unwrap();
        assert_eq!(load_road_network(&a, &d).unwrap(), net);
    }
}
