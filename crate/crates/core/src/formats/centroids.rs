use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{CentroidSet, Point2D};

fn csv_error(err: &csv::Error) -> Error {
    let line = err.position().map_or(0, csv::Position::line);
    let message = match err.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => err.to_string(),
    };
    Error::Csv { line, message }
}

/// Reads a centroid CSV. Errors carry the 1-based line number.
pub fn read_centroids<R: Read>(reader: R) -> Result<CentroidSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers().map_err(|e| csv_error(&e))?;
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(Error::Csv {
            line: 1,
            message: format!(
                "expected header `x,y`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut points = Vec::new();
    for record in rdr.deserialize::<Point2D>() {
        let p = record.map_err(|e| csv_error(&e))?;
        if !p.is_finite() {
            // Header is line 1, so point k sits on line k + 2.
            return Err(Error::Csv {
                line: points.len() as u64 + 2,
                message: "coordinates must be finite".into(),
            });
        }
        points.push(p);
    }
    Ok(CentroidSet::from_finite(points))
}

pub fn read_centroids_file(path: impl AsRef<Path>) -> Result<CentroidSet> {
    read_centroids(BufReader::new(File::open(path)?))
}

/// Writes the set in shortest round-trip decimal form, so reading the file
/// back reproduces every coordinate bit for bit.
pub fn write_centroids<W: Write>(writer: W, set: &CentroidSet) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    wtr.write_record(["x", "y"]).map_err(|e| csv_error(&e))?;
    for p in set {
        wtr.write_record([p.x.to_string(), p.y.to_string()])
            .map_err(|e| csv_error(&e))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_centroids_file(path: impl AsRef<Path>, set: &CentroidSet) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_centroids(&mut out, set)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_text_layout() {
        let set = CentroidSet::new(vec![Point2D::new(1.0, 2.5), Point2D::new(-0.25, 1e-7)]).unwrap();
        let mut buf = Vec::new();
        write_centroids(&mut buf, &set).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y\n1,2.5\n-0.25,0.0000001\n");
    }

    #[test]
    fn header_only_is_empty() {
        assert!(read_centroids("x,y\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn bad_header() {
        let err = read_centroids("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 1, .. }), "{err}");
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = read_centroids("x,y\n1,2\n3,oops\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }), "{err}");
        let err = read_centroids("x,y\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }), "{err}");
    }

    #[test]
    fn non_finite_rejected() {
        let err = read_centroids("x,y\n1,2\nNaN,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }), "{err}");
    }
}
