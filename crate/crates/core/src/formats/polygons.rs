use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::error::Result;
use crate::geometry::{Point2D, Polygon};

pub fn read_polygons<R: Read>(reader: R) -> Result<Vec<Polygon>> {
    let raw: Vec<Vec<[f64; 2]>> = serde_json::from_reader(reader)?;
    raw.into_iter()
        .map(|verts| Polygon::new(verts.into_iter().map(|[x, y]| Point2D::new(x, y)).collect()))
        .collect()
}

pub fn read_polygons_file(path: impl AsRef<Path>) -> Result<Vec<Polygon>> {
    read_polygons(BufReader::new(File::open(path)?))
}

pub fn write_polygons<W: Write>(writer: W, polygons: &[Polygon]) -> Result<()> {
    let raw: Vec<Vec<[f64; 2]>> = polygons
        .iter()
        .map(|p| p.vertices().iter().map(|v| [v.x, v.y]).collect())
        .collect();
    serde_json::to_writer(writer, &raw)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_pairs() {
        let polys = read_polygons("[[[0,0],[2,0],[2,2],[0,2]], [[5,5],[6,5],[5,6]]]".as_bytes()).unwrap();
        assert_eq!(polys.len(), 2);
        assert_eq!(polys[1].vertices()[2], Point2D::new(5.0, 6.0));
    }

    #[test]
    fn short_polygon_is_an_error() {
        assert!(read_polygons("[[[0,0],[1,1]]]".as_bytes()).is_err());
        assert!(read_polygons("{\"x\": 1}".as_bytes()).is_err());
    }
}
