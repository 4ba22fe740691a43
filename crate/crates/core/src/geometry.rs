//! Geometric primitives shared by every stage of the pipeline.
//!
//! Coordinates are in pixels with the origin at the top-left corner, `x`
//! increasing to the right and `y` increasing downward. Pixel centers sit at
//! integer coordinates, so pixel `(col, row)` covers `[col - 0.5, col + 0.5)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sub-pixel position in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

/// An ordered list of detections or annotations.
///
/// Index identity matters: matchings and reports refer to points by their
/// position in the set, so the order is kept exactly as produced or loaded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CentroidSet {
    points: Vec<Point2D>,
}

impl CentroidSet {
    pub fn new(points: Vec<Point2D>) -> Result<Self> {
        if let Some(index) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinitePoint { index });
        }
        Ok(Self { points })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Caller guarantees every point is finite.
    pub(crate) fn from_finite(points: Vec<Point2D>) -> Self {
        debug_assert!(points.iter().all(Point2D::is_finite));
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point2D> {
        self.points.iter()
    }

    pub fn get(&self, index: usize) -> Option<&Point2D> {
        self.points.get(index)
    }

    pub fn into_points(self) -> Vec<Point2D> {
        self.points
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self::from_finite(self.points.iter().map(|p| p.translated(dx, dy)).collect())
    }
}

impl<'a> IntoIterator for &'a CentroidSet {
    type Item = &'a Point2D;
    type IntoIter = std::slice::Iter<'a, Point2D>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Image extent in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageGeometry {
    pub width: usize,
    pub height: usize,
}

impl ImageGeometry {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter(format!(
                "image geometry must be at least 1x1, got {width}x{height}"
            )));
        }
        Ok(Self { width, height })
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Whether `p` falls on a pixel of this image.
    pub fn contains(&self, p: &Point2D) -> bool {
        p.x >= -0.5 && p.y >= -0.5 && p.x < self.width as f64 - 0.5 && p.y < self.height as f64 - 0.5
    }

    /// Distance from `p` to the nearest border pixel center.
    pub fn edge_distance(&self, p: &Point2D) -> f64 {
        let right = (self.width - 1) as f64 - p.x;
        let bottom = (self.height - 1) as f64 - p.y;
        p.x.min(p.y).min(right).min(bottom)
    }
}

/// A closed polygon outline; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2D>,
}

const DEGENERATE_AREA: f64 = 1e-12;

impl Polygon {
    /// Builds a polygon from at least three finite vertices.
    ///
    /// Zero-area outlines are accepted here and rejected by [`polygon_centroid`],
    /// so batches containing a few broken annotations can still be loaded.
    pub fn new(vertices: Vec<Point2D>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(index) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinitePoint { index });
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point2D] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = (&Point2D, &Point2D)> {
        self.vertices.iter().zip(self.vertices.iter().cycle().skip(1))
    }

    /// Shoelace signed area; positive for counter-clockwise outlines in a
    /// y-up frame (clockwise on screen).
    pub fn signed_area(&self) -> f64 {
        // Relative to the first vertex to limit cancellation on large coordinates.
        let o = self.vertices[0];
        0.5 * self
            .edges()
            .map(|(a, b)| (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y))
            .sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn is_degenerate(&self) -> bool {
        self.area() < DEGENERATE_AREA
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| p.translated(dx, dy)).collect(),
        }
    }
}

/// Area-weighted centroid of the polygon interior.
pub fn polygon_centroid(polygon: &Polygon) -> Result<Point2D> {
    let o = polygon.vertices[0];
    let mut twice_area = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for (a, b) in polygon.edges() {
        let (ax, ay) = (a.x - o.x, a.y - o.y);
        let (bx, by) = (b.x - o.x, b.y - o.y);
        let cross = ax * by - bx * ay;
        twice_area += cross;
        cx += (ax + bx) * cross;
        cy += (ay + by) * cross;
    }
    if (0.5 * twice_area).abs() < DEGENERATE_AREA {
        return Err(Error::DegeneratePolygon);
    }
    let scale = 1.0 / (3.0 * twice_area);
    Ok(Point2D::new(o.x + cx * scale, o.y + cy * scale))
}

/// Mean equivalent-area diameter `2 * sqrt(area / pi)` over the valid
/// polygons of a batch. Degenerate outlines are skipped.
pub fn estimate_avg_diameter(polygons: &[Polygon]) -> Result<f64> {
    let diameters: Vec<f64> = polygons
        .iter()
        .filter(|p| !p.is_degenerate())
        .map(|p| 2.0 * (p.area() / std::f64::consts::PI).sqrt())
        .collect();
    if diameters.is_empty() {
        return Err(Error::NoAnnotations);
    }
    Ok(diameters.iter().sum::<f64>() / diameters.len() as f64)
}

/// Dense row-major matrix of pairwise Euclidean distances
/// (rows = predictions, columns = ground truths).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates that every entry is finite and non-negative.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Input(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Input(format!(
                "cost ({}, {}) is {}; costs must be finite and non-negative",
                k / cols.max(1),
                k % cols.max(1),
                values[k]
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Input("ragged cost matrix".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                values.push(self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            values,
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

/// Euclidean distance between every prediction (row) and ground truth (column).
pub fn distance_matrix(preds: &CentroidSet, gts: &CentroidSet) -> DistanceMatrix {
    let mut values = Vec::with_capacity(preds.len() * gts.len());
    for p in preds {
        values.extend(gts.iter().map(|g| p.distance(g)));
    }
    DistanceMatrix {
        rows: preds.len(),
        cols: gts.len(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(coords: &[(f64, f64)]) -> Polygon {
        Polygon::new(coords.iter().map(|&(x, y)| Point2D::new(x, y)).collect()).unwrap()
    }

    fn close(a: Point2D, b: Point2D, tol: f64) -> bool {
        (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol
    }

    #[test]
    fn unit_square_centroid() {
        let c = polygon_centroid(&poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])).unwrap();
        assert!(close(c, Point2D::new(0.5, 0.5), 1e-15));
    }

    #[test]
    fn triangle_centroid_is_vertex_mean() {
        let c = polygon_centroid(&poly(&[(0.0, 0.0), (6.0, 0.0), (0.0, 3.0)])).unwrap();
        assert!(close(c, Point2D::new(2.0, 1.0), 1e-12));
    }

    #[test]
    fn l_shape_matches_rectangle_decomposition() {
        // Oracle: split into [0,4]x[0,1] (area 4, centroid (2, 0.5)) and
        // [0,1]x[1,4] (area 3, centroid (0.5, 2.5)); weighted mean = (19/14, 19/14).
        let l = poly(&[
            (0.0, 0.0),
            (4.0, 0.0),
            (4.0, 1.0),
            (1.0, 1.0),
            (1.0, 4.0),
            (0.0, 4.0),
        ]);
        let c = polygon_centroid(&l).unwrap();
        assert!(close(c, Point2D::new(19.0 / 14.0, 19.0 / 14.0), 1e-12));
        // Vertex mean is (5/3, 5/3), which is why the area-weighted form is used.
        assert!(!close(c, Point2D::new(5.0 / 3.0, 5.0 / 3.0), 1e-3));
    }

    #[test]
    fn degenerate_polygon_is_rejected() {
        let line = poly(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]);
        assert!(matches!(polygon_centroid(&line), Err(Error::DegeneratePolygon)));
        assert_eq!(Error::DegeneratePolygon.to_string(), "degenerate polygon");
    }

    #[test]
    fn too_few_vertices() {
        assert!(Polygon::new(vec![Point2D::new(0.0, 0.0), Point2D::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn orientation_flip_keeps_centroid() {
        let l = [
            (0.0, 0.0),
            (4.0, 0.0),
            (4.0, 1.0),
            (1.0, 1.0),
            (1.0, 4.0),
            (0.0, 4.0),
        ];
        let mut rev = l.to_vec();
        rev.reverse();
        let a = polygon_centroid(&poly(&l)).unwrap();
        let b = polygon_centroid(&poly(&rev)).unwrap();
        assert!(close(a, b, 1e-12));
    }

    #[test]
    fn avg_diameter_of_64gon_circle() {
        let r = 5.0;
        let verts: Vec<_> = (0..64)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 64.0;
                Point2D::new(20.0 + r * t.cos(), 20.0 + r * t.sin())
            })
            .collect();
        // Regular 64-gon area: (64/2) r^2 sin(2pi/64) = 0.99839 * pi r^2.
        let d = estimate_avg_diameter(&[Polygon::new(verts).unwrap()]).unwrap();
        assert!((d - 10.0).abs() / 10.0 < 0.01, "{d}");
    }

    #[test]
    fn avg_diameter_of_two_squares() {
        let sq = poly(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]);
        let d = estimate_avg_diameter(&[sq.clone(), sq.translated(10.0, 10.0)]).unwrap();
        assert!((d - 2.256_758_334_191_025).abs() < 1e-12, "{d}");
    }

    #[test]
    fn avg_diameter_skips_degenerate() {
        let sq = poly(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]);
        let line = poly(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let d = estimate_avg_diameter(&[sq.clone(), line.clone()]).unwrap();
        assert_eq!(d, estimate_avg_diameter(&[sq]).unwrap());
        assert!(matches!(
            estimate_avg_diameter(&[line]),
            Err(Error::NoAnnotations)
        ));
        assert!(matches!(estimate_avg_diameter(&[]), Err(Error::NoAnnotations)));
    }

    #[test]
    fn distance_matrix_examples() {
        let origin = CentroidSet::new(vec![Point2D::new(0.0, 0.0)]).unwrap();
        assert_eq!(distance_matrix(&origin, &origin).values(), &[0.0]);

        let far = CentroidSet::new(vec![Point2D::new(3.0, 4.0)]).unwrap();
        assert_eq!(distance_matrix(&origin, &far).values(), &[5.0]);

        let empty = CentroidSet::empty();
        let one = CentroidSet::new(vec![Point2D::new(1.0, 1.0)]).unwrap();
        let m = distance_matrix(&empty, &one);
        assert_eq!((m.rows(), m.cols()), (0, 1));
        assert!(m.values().is_empty());
    }

    #[test]
    fn nan_points_rejected() {
        let err = CentroidSet::new(vec![Point2D::new(0.0, 0.0), Point2D::new(f64::NAN, 1.0)]);
        assert!(matches!(err, Err(Error::NonFinitePoint { index: 1 })));
    }

    #[test]
    fn edge_distance_and_containment() {
        let g = ImageGeometry::new(256, 256).unwrap();
        assert_eq!(g.edge_distance(&Point2D::new(2.0, 2.0)), 2.0);
        assert_eq!(g.edge_distance(&Point2D::new(250.0, 128.0)), 5.0);
        assert!(g.contains(&Point2D::new(-0.5, 255.4)));
        assert!(!g.contains(&Point2D::new(255.5, 0.0)));
        assert!(ImageGeometry::new(0, 3).is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(DistanceMatrix::from_rows(&[vec![1.0, -1.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
