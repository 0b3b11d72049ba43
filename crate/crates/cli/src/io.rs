//! Reading data CSVs and writing artifacts.

use std::fs;
use std::io::Write;
use std::path::Path;

use sphereuni::sampling::SphericalSample;

use crate::error::{CliError, CliResult};

/// Rows farther than this from unit norm are reported when normalized.
pub const NORMALIZE_NOTICE_TOL: f64 = 1e-6;

pub struct LoadedData {
    pub sample: SphericalSample,
    /// Rows whose norm differed from 1 by more than the notice tolerance.
    pub normalized_rows: usize,
}

/// Reads an n x p matrix, one observation per line.
///
/// Lines starting with `#` are skipped. The first line is a header when none
/// of its fields parses as a number. Rows and columns in error messages are
/// 1-based and count data rows only.
pub fn read_data(path: &Path) -> CliResult<LoadedData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if first {
            first = false;
            if record.iter().all(|f| f.parse::<f64>().is_err()) {
                continue;
            }
        }
        let row_no = rows.len() + 1;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, tok)| match tok.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(CliError::Data(format!(
                    "row {row_no}, column {}: `{tok}` is not a finite number",
                    c + 1
                ))),
            })
            .collect::<CliResult<Vec<f64>>>()?;
        if let Some(prev) = rows.first() {
            if row.len() != prev.len() {
                return Err(CliError::Data(format!(
                    "row {row_no} has {} columns, expected {}",
                    row.len(),
                    prev.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("{} contains no data rows", path.display())));
    }

    let normalized_rows = rows
        .iter()
        .filter(|r| (r.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() > NORMALIZE_NOTICE_TOL)
        .count();
    if normalized_rows > 0 {
        tracing::warn!(rows = normalized_rows, "normalizing rows to unit length");
    }
    let sample =
        SphericalSample::from_rows_normalized(&rows).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(LoadedData {
        sample,
        normalized_rows,
    })
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_data(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text: a `# config:` line followed by `header` (if non-empty) and `rows`.
pub fn csv_artifact(config_json: &str, header: &[String], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut buf = format!("# config: {config_json}\n").into_bytes();
    {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(&mut buf);
        let write_err = |e: csv::Error| CliError::Internal(format!("csv encoding failed: {e}"));
        if !header.is_empty() {
            w.write_record(header).map_err(write_err)?;
        }
        for r in rows {
            w.write_record(r).map_err(write_err)?;
        }
        w.flush()
            .map_err(|e| CliError::Internal(format!("csv encoding failed: {e}")))?;
    }
    Ok(buf)
}

pub fn json_artifact<T: serde::Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut buf =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::Internal(format!("json encoding failed: {e}")))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Writes to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => {
            fs::write(path, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Internal(format!("cannot write to stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> CliResult<LoadedData> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, text).unwrap();
        read_data(&path)
    }

    #[test]
    fn header_and_comments_are_skipped() {
        let d = load("# a comment\nx,y\n1,0\n0,1\n0.6,0.8\n").unwrap();
        assert_eq!((d.sample.n(), d.sample.p()), (3, 2));
        assert_eq!(d.normalized_rows, 0);
    }

    #[test]
    fn bad_token_is_located() {
        let err = load("1,0\n0,1\n1,zz\n").err().unwrap();
        assert!(err.to_string().contains("row 3, column 2"), "{err}");
        // A partly numeric first line is data, not a header.
        let err = load("1,zz\n0,1\n").err().unwrap();
        assert!(err.to_string().contains("row 1, column 2"), "{err}");
    }

    #[test]
    fn far_rows_are_normalized_and_counted() {
        let d = load("3,4\n0,1\n1,1e-9\n").unwrap();
        assert_eq!(d.normalized_rows, 1);
        assert!((d.sample.row(0)[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn ragged_and_empty_inputs_fail() {
        assert!(load("1,0\n0,1,0\n").is_err());
        assert!(load("# nothing\n").is_err());
        assert!(load("0,0\n1,0\n").is_err());
    }

    #[test]
    fn data_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 0.0] {
            assert_eq!(fmt_data(x).parse::<f64>().unwrap(), x);
        }
    }
}
