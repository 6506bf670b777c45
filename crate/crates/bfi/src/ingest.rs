//! `time,status` CSV reading and writing.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use bfi_core::{Observation, SurvivalDataset};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Parse(ParseError),
    #[error("no observations in input")]
    Empty,
}

/// A rejected line, with 1-based row number (the header is row 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub row: usize,
    pub column: Option<&'static str>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(col) => write!(f, "row {} column {}: {}", self.row, col, self.message),
            None => write!(f, "row {}: {}", self.row, self.message),
        }
    }
}

fn parse_error(
    row: usize,
    column: Option<&'static str>,
    message: impl Into<String>,
) -> IngestError {
    IngestError::Parse(ParseError {
        row,
        column,
        message: message.into(),
    })
}

/// Reads a dataset from a CSV file. Returns the dataset and the raw bytes,
/// which callers hash for the report digest.
pub fn ingest_csv(path: &Path) -> Result<(SurvivalDataset, Vec<u8>), IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let data = parse_csv(&bytes)?;
    Ok((data, bytes))
}

/// Parses `time,status` CSV. The header must be exactly `time,status`
/// (any case); LF and CRLF line endings are accepted.
pub fn parse_csv(bytes: &[u8]) -> Result<SurvivalDataset, IngestError> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = reader.records();

    let header = match records.next() {
        None => return Err(IngestError::Empty),
        Some(Err(e)) => return Err(parse_error(1, None, e.to_string())),
        Some(Ok(h)) => h,
    };
    let header_ok = header.len() == 2
        && header[0].eq_ignore_ascii_case("time")
        && header[1].eq_ignore_ascii_case("status");
    if !header_ok {
        let row = header.position().map_or(1, |p| p.line() as usize);
        return Err(parse_error(row, None, "header must be `time,status`"));
    }

    let mut observations = Vec::new();
    for record in records {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            parse_error(row, None, e.to_string())
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(parse_error(
                row,
                None,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        let time_text = record[0].trim();
        let time: f64 = time_text.parse().map_err(|_| {
            parse_error(row, Some("time"), format!("`{time_text}` is not a number"))
        })?;
        if !(time > 0.0) || !time.is_finite() {
            return Err(parse_error(
                row,
                Some("time"),
                format!("time must be finite and positive, got `{time_text}`"),
            ));
        }
        let event = match record[1].trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(parse_error(
                    row,
                    Some("status"),
                    format!("status must be 0 or 1, got `{other}`"),
                ))
            }
        };
        observations.push(Observation::new(time, event).expect("time validated above"));
    }
    SurvivalDataset::new(observations).map_err(|_| IngestError::Empty)
}

/// Writes `time,status` CSV with LF line endings. Times use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(data: &SurvivalDataset, mut out: W) -> io::Result<()> {
    writeln!(out, "time,status")?;
    for o in data.observations() {
        writeln!(out, "{},{}", o.time(), o.status())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_simple_file() {
        let d = parse_csv(b"time,status\n2,1\n3,0\n").unwrap();
        let obs: Vec<(f64, bool)> = d
            .observations()
            .iter()
            .map(|o| (o.time(), o.is_event()))
            .collect();
        assert_eq!(obs, vec![(2.0, true), (3.0, false)]);
    }

    #[test]
    fn header_case_crlf_and_bom() {
        let d = parse_csv(b"\xEF\xBB\xBFTime,STATUS\r\n2.5,1\r\n3,0\r\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.observations()[0].time(), 2.5);
    }

    fn err_row(input: &[u8]) -> (usize, Option<&'static str>) {
        match parse_csv(input) {
            Err(IngestError::Parse(e)) => (e.row, e.column),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn negative_time_names_row() {
        assert_eq!(err_row(b"time,status\n-1,1\n"), (2, Some("time")));
        assert_eq!(err_row(b"time,status\n2,1\n0,1\n"), (3, Some("time")));
        assert_eq!(err_row(b"time,status\n2,1\nabc,1\n"), (3, Some("time")));
        assert_eq!(err_row(b"time,status\n2,1\ninf,1\n"), (3, Some("time")));
    }

    #[test]
    fn bad_status_names_row() {
        assert_eq!(err_row(b"time,status\n2,1\n3,2\n"), (3, Some("status")));
        assert_eq!(err_row(b"time,status\n2,yes\n"), (2, Some("status")));
    }

    #[test]
    fn bad_header_and_shape() {
        assert_eq!(err_row(b"t,s\n2,1\n"), (1, None));
        assert_eq!(err_row(b"time,status,extra\n2,1,0\n"), (1, None));
        assert_eq!(err_row(b"time,status\n2,1,0\n"), (2, None));
    }

    #[test]
    fn empty_inputs() {
        assert!(matches!(parse_csv(b""), Err(IngestError::Empty)));
        assert!(matches!(
            parse_csv(b"time,status\n"),
            Err(IngestError::Empty)
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            ingest_csv(Path::new("/nonexistent/definitely/missing.csv")),
            Err(IngestError::Io { .. })
        ));
    }
}
