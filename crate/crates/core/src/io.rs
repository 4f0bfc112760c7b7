//! Point-set files: CSV (one point per row, optional header) and JSON
//! (array of rows).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signatures::PointSet;

/// Parses CSV text. A first record that does not parse as numbers is treated
/// as a header. Blank lines and lines starting with `#` are skipped.
pub fn parse_csv(text: &str) -> Result<PointSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut flat = Vec::new();
    let mut dim: Option<usize> = None;
    let mut seen_data = false;
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if !seen_data && dim.is_none() => {
                dim = Some(rec.len());
                continue;
            }
            Err(e) => {
                return Err(Error::Parse {
                    line,
                    msg: format!("{e}: {:?}", rec.iter().collect::<Vec<_>>().join(",")),
                })
            }
        };
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line,
                msg: "non-finite value".into(),
            });
        }
        match dim {
            Some(d) if d != row.len() => {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {d} fields, found {}", row.len()),
                })
            }
            _ => dim = Some(row.len()),
        }
        seen_data = true;
        flat.extend(row);
    }
    match dim {
        Some(d) if seen_data => PointSet::from_flat(flat, d),
        _ => Err(Error::EmptyPointSet),
    }
}

pub fn parse_json(text: &str) -> Result<PointSet> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text)?;
    PointSet::from_rows(&rows)
}

/// Loads by extension: `.json` as JSON, anything else as CSV.
pub fn read_points(path: &Path) -> Result<PointSet> {
    let text = fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => parse_json(&text),
        _ => parse_csv(&text),
    }
}

/// Full-precision CSV, no header.
pub fn format_csv(points: &PointSet) -> String {
    let mut out = String::new();
    for p in points.iter() {
        let row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_points(path: &Path, points: &PointSet) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => {
            fs::write(path, serde_json::to_string(&points.to_rows())?)?;
        }
        _ => {
            let mut f = fs::File::create(path)?;
            f.write_all(format_csv(points).as_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_comments() {
        let p = parse_csv("x,y\n# note\n1,2\n\n3.5, -4e-3\n").unwrap();
        assert_eq!(p.to_rows(), vec![vec![1.0, 2.0], vec![3.5, -4e-3]]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_csv("1,2\n3,4\n5\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_csv("1,2\n3,abc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_csv("1,nan\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_csv("a,b\n"), Err(Error::EmptyPointSet)));
    }

    #[test]
    fn json_rows() {
        let p = parse_json("[[1,2,3],[4,5,6]]").unwrap();
        assert_eq!(p.dim(), 3);
        assert!(parse_json("[[1,2],[3]]").is_err());
    }

    #[test]
    fn files_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let p = PointSet::from_rows(&[vec![0.1, 1.0 / 3.0], vec![-2.0, 1e-300]]).unwrap();
        for name in ["a.csv", "a.json"] {
            let path = dir.path().join(name);
            write_points(&path, &p).unwrap();
            assert_eq!(read_points(&path).unwrap().to_rows(), p.to_rows());
        }
    }

    proptest! {
        #[test]
        fn csv_preserves_bits(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..20)) {
            let p = PointSet::from_rows(&rows).unwrap();
            prop_assert_eq!(parse_csv(&format_csv(&p)).unwrap().to_rows(), rows);
        }
    }
}
