//! Closed planar lesion outlines and the basic measurements taken on them.

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Regions with less area than this (mm²) are treated as degenerate.
pub const AREA_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }
}

impl From<[f64; 2]> for Point {
    fn from(p: [f64; 2]) -> Self {
        Point::new(p[0], p[1])
    }
}

/// Twice the signed area of triangle `(a, b, c)`; positive when counter-clockwise.
pub(crate) fn orient(a: Point, b: Point, c: Point) -> f64 {
    b.sub(a).cross(c.sub(a))
}

/// A simple closed polygon in millimetres, stored counter-clockwise.
///
/// The closing edge from the last vertex back to the first is implied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct LesionContour {
    vertices: Vec<Point>,
}

impl TryFrom<Vec<Point>> for LesionContour {
    type Error = GeometryError;

    fn try_from(points: Vec<Point>) -> Result<Self, Self::Error> {
        LesionContour::new(points)
    }
}

impl From<LesionContour> for Vec<Point> {
    fn from(c: LesionContour) -> Self {
        c.vertices
    }
}

impl LesionContour {
    /// Validates and normalizes a vertex ring.
    ///
    /// Repeated consecutive vertices (including an explicit closing vertex)
    /// are dropped and clockwise rings are reversed. The ring must have at
    /// least three distinct vertices, be simple, and enclose more than
    /// [`AREA_TOLERANCE`].
    pub fn new(points: Vec<Point>) -> Result<Self, GeometryError> {
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut vertices: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if vertices.last() != Some(&p) {
                vertices.push(p);
            }
        }
        while vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        let area = signed_area(&vertices);
        if area.abs() < AREA_TOLERANCE {
            return Err(GeometryError::DegenerateRegion { area: area.abs() });
        }
        if area < 0.0 {
            vertices.reverse();
        }
        if let Some((i, j)) = find_self_intersection(&vertices) {
            return Err(GeometryError::SelfIntersecting { edge_a: i, edge_b: j });
        }
        Ok(Self { vertices })
    }

    pub fn from_xy(points: &[[f64; 2]]) -> Result<Self, GeometryError> {
        Self::new(points.iter().copied().map(Point::from).collect())
    }

    /// Builds a contour from vertices already known to be a valid CCW ring.
    pub(crate) fn from_trusted(vertices: Vec<Point>) -> Self {
        debug_assert!(vertices.len() >= 3);
        debug_assert!(signed_area(&vertices) > 0.0);
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Iterates over the edges `(v[i], v[i+1])`, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Applies a point map and re-validates the result.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<Self, GeometryError> {
        Self::new(self.vertices.iter().copied().map(f).collect())
    }

    pub fn scaled(&self, s: f64) -> Result<Self, GeometryError> {
        self.map_points(|p| p.scale(s))
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self, GeometryError> {
        self.map_points(|p| Point::new(p.x + dx, p.y + dy))
    }

    /// Rotates counter-clockwise by `angle` radians about the origin.
    pub fn rotated(&self, angle: f64) -> Result<Self, GeometryError> {
        let (s, c) = angle.sin_cos();
        self.map_points(|p| Point::new(c * p.x - s * p.y, s * p.x + c * p.y))
    }

    /// Same ring with the vertex list starting at `k`.
    pub fn with_start(&self, k: usize) -> Self {
        let mut vertices = self.vertices.clone();
        let n = vertices.len();
        vertices.rotate_left(k % n);
        Self { vertices }
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    /// Area-weighted centroid of the enclosed region.
    pub fn centroid(&self) -> Point {
        // Shift to the first vertex to limit cancellation for far-off polygons.
        let o = self.vertices[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for (p, q) in self.edges() {
            let (p, q) = (p.sub(o), q.sub(o));
            let w = p.cross(q);
            a2 += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Point::new(o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2))
    }

    /// Signed distance from `p` to the boundary: positive inside, negative outside.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let v = &self.vertices;
        let mut d2 = segment_distance2(p, v[v.len() - 1], v[0]);
        for w in v.windows(2) {
            d2 = d2.min(segment_distance2(p, w[0], w[1]));
        }
        let d = d2.sqrt();
        if self.contains(p) {
            d
        } else {
            -d
        }
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Area, perimeter and centroid of a contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicGeometry {
    pub area: f64,
    pub perimeter: f64,
    pub centroid: Point,
}

pub fn basic_geometry(c: &LesionContour) -> Result<BasicGeometry, GeometryError> {
    let area = c.area();
    if area < AREA_TOLERANCE {
        return Err(GeometryError::DegenerateRegion { area });
    }
    Ok(BasicGeometry {
        area,
        perimeter: c.perimeter(),
        centroid: c.centroid(),
    })
}

pub(crate) fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    let o = v[0];
    let mut a2 = 0.0;
    for i in 1..n - 1 {
        a2 += v[i].sub(o).cross(v[i + 1].sub(o));
    }
    0.5 * a2
}

fn segment_distance2(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let ap = p.sub(a);
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { (ap.dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let q = ap.sub(ab.scale(t));
    q.dot(q)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Returns the first pair of edges that intersect other than at their shared vertex.
fn find_self_intersection(v: &[Point]) -> Option<(usize, usize)> {
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        // Adjacent edges may only share their common vertex; a reversal is a spike.
        let c = v[(i + 2) % n];
        if orient(a, b, c) == 0.0 && b.sub(a).dot(c.sub(b)) < 0.0 {
            return Some((i, (i + 1) % n));
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (v[j], v[(j + 1) % n]);
            if segments_touch(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}
