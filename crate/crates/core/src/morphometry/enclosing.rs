//! Bounding boxes, minimum-area rectangle, and inscribed / circumscribed circles.

use serde::{Deserialize, Serialize};

use super::hull::convex_hull;
use super::{GeometryError, LesionContour, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub center: Point,
    /// Extent along `angle`.
    pub width: f64,
    /// Extent perpendicular to `angle`.
    pub height: f64,
    /// Direction of the width side, radians.
    pub angle: f64,
}

impl Rect {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnclosingShapes {
    pub aabb: Rect,
    pub min_area_rect: Rect,
    pub inscribed: Circle,
    pub circumscribed: Circle,
}

pub fn enclosing_shapes(c: &LesionContour) -> Result<EnclosingShapes, GeometryError> {
    let area = c.area();
    if area < super::contour::AREA_TOLERANCE {
        return Err(GeometryError::DegenerateRegion { area });
    }
    let hull = convex_hull(c);
    Ok(EnclosingShapes {
        aabb: aabb(c.vertices()),
        min_area_rect: min_area_rect(hull.vertices()),
        inscribed: inscribed_circle(c),
        circumscribed: min_enclosing_circle(hull.vertices()),
    })
}

pub fn aabb(points: &[Point]) -> Rect {
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    Rect {
        center: lo.add(hi).scale(0.5),
        width: hi.x - lo.x,
        height: hi.y - lo.y,
        angle: 0.0,
    }
}

/// Minimum-area enclosing rectangle of a convex CCW polygon by rotating calipers.
///
/// One side of the optimum is collinear with a hull edge, so each edge is
/// tried in turn while three caliper indices (farthest along the edge, farthest
/// from it, and farthest against it) advance monotonically around the hull.
pub fn min_area_rect(hull: &[Point]) -> Rect {
    let n = hull.len();
    let next = |i: usize| (i + 1) % n;
    let mut best: Option<Rect> = None;
    let (mut right, mut top, mut left) = (0usize, 0usize, 0usize);
    for i in 0..n {
        let a = hull[i];
        let e = hull[next(i)].sub(a);
        let len = e.norm();
        let u = e.scale(1.0 / len);
        let nrm = Point::new(-u.y, u.x);
        while hull[next(right)].sub(a).dot(u) > hull[right].sub(a).dot(u) {
            right = next(right);
        }
        if i == 0 {
            top = right;
        }
        while hull[next(top)].sub(a).dot(nrm) > hull[top].sub(a).dot(nrm) {
            top = next(top);
        }
        if i == 0 {
            left = top;
        }
        while hull[next(left)].sub(a).dot(u) < hull[left].sub(a).dot(u) {
            left = next(left);
        }
        let umax = hull[right].sub(a).dot(u);
        let umin = hull[left].sub(a).dot(u).min(0.0);
        let h = hull[top].sub(a).dot(nrm);
        let w = umax - umin;
        if best.map_or(true, |b| w * h < b.area()) {
            let center = a.add(u.scale(0.5 * (umax + umin))).add(nrm.scale(0.5 * h));
            best = Some(Rect {
                center,
                width: w,
                height: h,
                angle: u.y.atan2(u.x),
            });
        }
    }
    best.expect("hull has at least three vertices")
}

fn circle_two(a: Point, b: Point) -> Circle {
    let center = a.add(b).scale(0.5);
    Circle { center, radius: center.dist(a) }
}

fn circle_three(a: Point, b: Point, c: Point) -> Circle {
    let (b, c) = (b.sub(a), c.sub(a));
    let d = 2.0 * b.cross(c);
    if d.abs() < 1e-300 {
        // collinear: the widest pair determines the circle
        let cands = [circle_two(a, a.add(b)), circle_two(a, a.add(c)), circle_two(a.add(b), a.add(c))];
        return cands
            .into_iter()
            .max_by(|x, y| x.radius.total_cmp(&y.radius))
            .expect("non-empty");
    }
    let b2 = b.dot(b);
    let c2 = c.dot(c);
    let ux = (c.y * b2 - b.y * c2) / d;
    let uy = (b.x * c2 - c.x * b2) / d;
    let center = Point::new(a.x + ux, a.y + uy);
    Circle { center, radius: ux.hypot(uy) }
}

fn inside(c: &Circle, p: Point) -> bool {
    c.center.dist(p) <= c.radius * (1.0 + 1e-12) + 1e-15
}

/// Smallest circle containing all points (Welzl's incremental form).
///
/// Points are visited in a fixed pseudo-random order so the expected running
/// time is linear and results are reproducible.
pub fn min_enclosing_circle(points: &[Point]) -> Circle {
    let mut p: Vec<Point> = points.to_vec();
    // deterministic Fisher-Yates with a small LCG
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    for i in (1..p.len()).rev() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let j = ((state >> 33) as usize) % (i + 1);
        p.swap(i, j);
    }
    let mut c = Circle { center: p[0], radius: 0.0 };
    for i in 1..p.len() {
        if inside(&c, p[i]) {
            continue;
        }
        c = Circle { center: p[i], radius: 0.0 };
        for j in 0..i {
            if inside(&c, p[j]) {
                continue;
            }
            c = circle_two(p[i], p[j]);
            for k in 0..j {
                if !inside(&c, p[k]) {
                    c = circle_three(p[i], p[j], p[k]);
                }
            }
        }
    }
    c
}

/// Grid resolution of the inscribed-circle search, as a fraction of the
/// shorter bounding-box side.
const GRID_DIVISIONS: f64 = 32.0;
/// Grid cells across the shorter side, at least.
const MIN_ACROSS: f64 = 12.0;
const MAX_GRID_POINTS: usize = 60_000;
const REFINE_STARTS: usize = 4;

/// Largest circle inside the polygon: coarse grid of the distance-to-boundary
/// field, then Nelder–Mead refinement from the best few grid points.
///
/// The search runs in coordinates normalized by the bounding box so that the
/// result is scale-equivariant up to rounding.
pub fn inscribed_circle(c: &LesionContour) -> Circle {
    let bb = aabb(c.vertices());
    let scale = bb.width.max(bb.height);
    let origin = bb.center;
    // a similarity transform keeps the outline simple and counter-clockwise
    let unit = LesionContour::from_trusted(c.vertices().iter().map(|p| p.sub(origin).scale(1.0 / scale)).collect());
    let (w, h) = (bb.width / scale, bb.height / scale);
    let mut step = (1.0 / GRID_DIVISIONS).min(w.min(h) / MIN_ACROSS);
    let cells = |s: f64| ((w / s).ceil() as usize) * ((h / s).ceil() as usize);
    while cells(step) > MAX_GRID_POINTS {
        step *= 1.25;
    }
    let (nx, ny) = ((w / step).ceil() as usize, (h / step).ceil() as usize);
    let mut cands: Vec<(f64, Point)> = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let p = Point::new(-0.5 * w + (ix as f64 + 0.5) * step, -0.5 * h + (iy as f64 + 0.5) * step);
            let d = unit.signed_distance(p);
            if d > 0.0 {
                cands.push((d, p));
            }
        }
    }
    if cands.is_empty() {
        // thinner than the grid: fall back to vertex midpoints of the centroid
        cands.push((unit.signed_distance(unit.centroid()), unit.centroid()));
    }
    cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.x.total_cmp(&b.1.x)).then(a.1.y.total_cmp(&b.1.y)));
    let mut best = Circle { center: cands[0].1, radius: cands[0].0 };
    for &(_, start) in cands.iter().take(REFINE_STARTS) {
        let (p, d) = nelder_mead_max(|q| unit.signed_distance(q), start, step);
        if d > best.radius {
            best = Circle { center: p, radius: d };
        }
    }
    Circle {
        center: best.center.scale(scale).add(origin),
        radius: best.radius * scale,
    }
}

fn nelder_mead_max(f: impl Fn(Point) -> f64, start: Point, size: f64) -> (Point, f64) {
    let g = |p: Point| -f(p);
    let mut s = [
        (start, g(start)),
        (start.add(Point::new(size, 0.0)), 0.0),
        (start.add(Point::new(0.0, size)), 0.0),
    ];
    s[1].1 = g(s[1].0);
    s[2].1 = g(s[2].0);
    for _ in 0..2000 {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        let extent = s[0].0.dist(s[1].0).max(s[0].0.dist(s[2].0));
        if extent < 1e-13 {
            break;
        }
        let centroid = s[0].0.add(s[1].0).scale(0.5);
        let worst = s[2];
        let reflect = centroid.add(centroid.sub(worst.0));
        let fr = g(reflect);
        if fr < s[0].1 {
            let expand = centroid.add(reflect.sub(centroid).scale(2.0));
            let fe = g(expand);
            s[2] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < s[1].1 {
            s[2] = (reflect, fr);
        } else {
            let contract = if fr < worst.1 {
                centroid.add(reflect.sub(centroid).scale(0.5))
            } else {
                centroid.add(worst.0.sub(centroid).scale(0.5))
            };
            let fc = g(contract);
            if fc < worst.1.min(fr) {
                s[2] = (contract, fc);
            } else {
                let best = s[0].0;
                for v in s.iter_mut().skip(1) {
                    v.0 = best.add(v.0.sub(best).scale(0.5));
                    v.1 = g(v.0);
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    (s[0].0, -s[0].1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphometry::shapes;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn unit_square() {
        let e = enclosing_shapes(&shapes::rectangle(1.0, 1.0)).unwrap();
        assert_relative_eq!(e.min_area_rect.area(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.aabb.area(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.inscribed.radius, 0.5, max_relative = 1e-3);
        assert_relative_eq!(e.circumscribed.radius, 2f64.sqrt() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn circle_limits() {
        let e = enclosing_shapes(&shapes::regular_polygon(360, 1.0)).unwrap();
        assert!((e.inscribed.radius - 1.0).abs() < 1e-2);
        assert!((e.circumscribed.radius - 1.0).abs() < 1e-2);
        assert!((e.min_area_rect.area() - 4.0).abs() < 0.04);
    }

    #[test]
    fn rotated_rectangle_min_rect() {
        let r = shapes::rectangle(4.0, 1.0).rotated(0.4).unwrap();
        let e = enclosing_shapes(&r).unwrap();
        assert_relative_eq!(e.min_area_rect.area(), 4.0, epsilon = 1e-9);
        assert!(e.aabb.area() > 4.5);
        let a = e.min_area_rect.angle.rem_euclid(PI / 2.0);
        assert_relative_eq!(a, 0.4, epsilon = 1e-9);
    }

    #[test]
    fn containment_ordering_on_blobs() {
        for seed in 0..10 {
            let b = shapes::random_blob(seed, 80, 3.0, 0.8);
            let e = enclosing_shapes(&b).unwrap();
            let area = b.area();
            assert!(e.aabb.area() >= e.min_area_rect.area() - 1e-9);
            assert!(e.min_area_rect.area() >= area - 1e-9);
            assert!(e.inscribed.radius <= e.circumscribed.radius);
            for p in b.vertices() {
                assert!(e.circumscribed.center.dist(*p) <= e.circumscribed.radius * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn three_point_circle() {
        let c = circle_three(Point::new(0., 0.), Point::new(2., 0.), Point::new(0., 2.));
        assert_relative_eq!(c.radius, 2f64.sqrt(), epsilon = 1e-12);
    }
}
