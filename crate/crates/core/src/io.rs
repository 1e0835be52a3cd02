//! CSV tables of floating point values with a single header row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn write_table<P, I>(path: P, header: &[String], rows: I) -> Result<()>
where
    P: AsRef<Path>,
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let mut first = true;
        for v in row.as_ref() {
            if !first {
                out.write_all(b",")?;
            }
            first = false;
            write!(out, "{v}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a numeric table; errors carry 1-based file line numbers.
pub fn read_table<P: AsRef<Path>>(path: P) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())
        .map_err(csv_error)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Parse {
            line: 1,
            msg: "missing header row".into(),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row = record
            .iter()
            .enumerate()
            .map(|(col, s)| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("column {} ('{s}') is not a number", col + 1),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Parse {
            line,
            msg: format!("row has {len} fields, expected {expected_len}"),
        },
        other => Error::Parse {
            line,
            msg: format!("{other:?}"),
        },
    }
}

/// Writes through a temporary sibling and renames into place.
pub fn write_atomic<P: AsRef<Path>>(path: P, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("tmp~");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ragged_rows_report_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, "a,b\n1,2\n3\n").unwrap();
        match read_table(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {:?}", other.err()),
        }
        std::fs::write(&p, "a,b\n1,x\n").unwrap();
        assert!(matches!(read_table(&p), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn values_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let rows = vec![vec![0.1 + 0.2, -1e-17, 293.15], vec![1.0 / 3.0, 7.0, -0.0]];
        write_table(&p, &["a".into(), "b".into(), "c".into()], &rows).unwrap();
        let t = read_table(&p).unwrap();
        assert_eq!(t.rows, rows);
    }
}
