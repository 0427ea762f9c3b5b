//! Delimited-text dataset ingestion.
//!
//! Expected format: CSV with header `group,z,marker`. The group token is
//! `x`/`0` for the nondiseased sample and `y`/`1` for the diseased sample.

use std::path::Path;

use caroc_core::{Population, SamplePairs};

use crate::AppError;

/// Read a dataset file into the two population samples.
///
/// `log_response` applies a natural log to the markers before validation,
/// for markers that are better modelled on the log scale.
pub fn ingest(path: &Path, log_response: bool) -> Result<(SamplePairs, SamplePairs), AppError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?
        .clone();
    let expected = ["group", "z", "marker"];
    let got: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if got != expected {
        return Err(AppError::Input(format!(
            "{}: expected header `group,z,marker`, found `{}`",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut zx = Vec::new();
    let mut vx = Vec::new();
    let mut zy = Vec::new();
    let mut vy = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or_default();
        let field = |i: usize| -> Result<&str, AppError> {
            record.get(i).ok_or_else(|| {
                AppError::Input(format!("{}: line {line}: missing column {i}", path.display()))
            })
        };
        let parse = |name: &str, raw: &str| -> Result<f64, AppError> {
            let v: f64 = raw.parse().map_err(|_| {
                AppError::Input(format!(
                    "{}: line {line}: cannot parse {name} value `{raw}`",
                    path.display()
                ))
            })?;
            if !v.is_finite() {
                return Err(AppError::Input(format!(
                    "{}: line {line}: non-finite {name} value `{raw}`",
                    path.display()
                )));
            }
            Ok(v)
        };
        let z = parse("z", field(1)?)?;
        let mut marker = parse("marker", field(2)?)?;
        if log_response {
            if marker <= 0.0 {
                return Err(AppError::Input(format!(
                    "{}: line {line}: --log-response needs positive markers, got {marker}",
                    path.display()
                )));
            }
            marker = marker.ln();
        }
        match field(0)? {
            "x" | "X" | "0" => {
                zx.push(z);
                vx.push(marker);
            }
            "y" | "Y" | "1" => {
                zy.push(z);
                vy.push(marker);
            }
            other => {
                return Err(AppError::Input(format!(
                    "{}: line {line}: unknown group token `{other}` (expected x/0 or y/1)",
                    path.display()
                )));
            }
        }
    }

    for (group, rows) in [("x", zx.len()), ("y", zy.len())] {
        if rows == 0 {
            return Err(AppError::Input(format!(
                "{}: group `{group}` has no rows",
                path.display()
            )));
        }
    }
    let x = SamplePairs::new(zx, vx, Population::NonDiseasedX)
        .map_err(|e| AppError::Input(format!("{}: group x: {e}", path.display())))?;
    let y = SamplePairs::new(zy, vy, Population::DiseasedY)
        .map_err(|e| AppError::Input(format!("{}: group y: {e}", path.display())))?;
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn well_formed_file_parses() {
        let f = write_file("group,z,marker\nx,1.0,2.0\nx,2.0,2.5\ny,1.5,3.0\ny,2.5,3.5\n");
        let (x, y) = ingest(f.path(), false).unwrap();
        assert_eq!(x.len(), 2);
        assert_eq!(y.len(), 2);
        assert_eq!(x.markers(), &[2.0, 2.5]);
    }

    #[test]
    fn missing_group_named() {
        let f = write_file("group,z,marker\nx,1.0,2.0\nx,2.0,2.5\n");
        let err = ingest(f.path(), false).unwrap_err();
        assert!(err.to_string().contains("group `y`"), "{err}");
    }

    #[test]
    fn bad_marker_cites_line() {
        let f = write_file("group,z,marker\nx,1.0,2.0\ny,2.0,abc\n");
        let err = ingest(f.path(), false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("abc"), "{msg}");
    }

    #[test]
    fn log_response_applies_and_validates() {
        let f = write_file("group,z,marker\nx,1.0,1.0\ny,2.0,2.718281828459045\n");
        let (x, y) = ingest(f.path(), true).unwrap();
        assert_eq!(x.markers()[0], 0.0);
        assert!((y.markers()[0] - 1.0).abs() < 1e-12);

        let f = write_file("group,z,marker\nx,1.0,-1.0\ny,2.0,2.0\n");
        assert!(ingest(f.path(), true).is_err());
    }

    #[test]
    fn numeric_group_tokens() {
        let f = write_file("group,z,marker\n0,1.0,2.0\n1,1.5,3.0\n");
        let (x, y) = ingest(f.path(), false).unwrap();
        assert_eq!((x.len(), y.len()), (1, 1));
    }

    #[test]
    fn bad_header_rejected() {
        let f = write_file("g,z,m\nx,1.0,2.0\n");
        let err = ingest(f.path(), false).unwrap_err();
        assert!(err.to_string().contains("group,z,marker"));
    }
}
