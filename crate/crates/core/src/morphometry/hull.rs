//! Convex hull and convexity defects.

use super::contour::orient;
use super::{LesionContour, Point};

/// Indices (into `points`) of the strictly convex hull, counter-clockwise.
///
/// Andrew's monotone chain; collinear boundary points are dropped.
pub fn hull_indices(points: &[Point]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        let (p, q) = (points[a], points[b]);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y))
    });
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2
                && orient(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

/// Convex hull of a contour's vertices as a new contour.
pub fn convex_hull(c: &LesionContour) -> LesionContour {
    let v = c.vertices();
    let idx = hull_indices(v);
    LesionContour::from_trusted(idx.into_iter().map(|i| v[i]).collect())
}

/// Deepest vertex-to-chord distance over all convexity defects.
///
/// A defect is the run of contour vertices between two consecutive hull
/// vertices; its depth is the largest perpendicular distance from those
/// vertices to the chord joining the hull vertices.
pub fn max_defect_depth(c: &LesionContour) -> f64 {
    let v = c.vertices();
    let n = v.len();
    let mut on_hull = hull_indices(v);
    on_hull.sort_unstable();
    let mut deepest: f64 = 0.0;
    for (k, &i) in on_hull.iter().enumerate() {
        let j = on_hull[(k + 1) % on_hull.len()];
        let (a, b) = (v[i], v[j]);
        let len = a.dist(b);
        if len == 0.0 {
            continue;
        }
        let mut t = (i + 1) % n;
        while t != j {
            let d = orient(a, b, v[t]).abs() / len;
            deepest = deepest.max(d);
            t = (t + 1) % n;
        }
    }
    deepest
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphometry::shapes;
    use approx::assert_relative_eq;

    #[test]
    fn convex_input_is_its_own_hull() {
        let c = shapes::regular_polygon(17, 2.0);
        let h = convex_hull(&c);
        assert_eq!(h.len(), c.len());
        for p in c.vertices() {
            assert!(h.vertices().contains(p));
        }
        assert_eq!(max_defect_depth(&c), 0.0);
    }

    #[test]
    fn star_hull_is_outer_pentagon() {
        let s = shapes::star(5, 2.0, 0.8);
        let h = convex_hull(&s);
        assert_eq!(h.len(), 5);
        for p in h.vertices() {
            assert_relative_eq!(p.norm(), 2.0, epsilon = 1e-12);
        }
        // each notch sits at the inner radius; the chord between tips is at outer·cos(π/5)
        let depth = max_defect_depth(&s);
        let expected = 2.0 * (std::f64::consts::PI / 5.0).cos() - 0.8;
        assert_relative_eq!(depth, expected, epsilon = 1e-12);
    }

    #[test]
    fn collinear_points_are_dropped() {
        let pts = [[0., 0.], [1., 0.], [2., 0.], [2., 2.], [0., 2.]].map(Point::from);
        assert_eq!(hull_indices(&pts).len(), 4);
    }
}
