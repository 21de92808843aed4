use lesionkit::morphometry::{
    contour_from_mask, convex_hull, enclosing_shapes, extract_features, hu_moments, shapes, BinaryMask, LesionContour, Point,
    ShapeFeatureVector,
};
use proptest::prelude::*;
use std::f64::consts::PI;

/// Hull vertices by brute force: endpoints of every pair with all other points on its left.
fn brute_force_hull(points: &[Point]) -> Vec<Point> {
    let mut out = Vec::new();
    for (i, &a) in points.iter().enumerate() {
        for (j, &b) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let all_left = points.iter().enumerate().all(|(k, &p)| {
                if k == i || k == j {
                    return true;
                }
                let o = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
                // strictly left, or on the segment interior (collinear points are not vertices)
                o > 0.0 || (o == 0.0 && (p.x - a.x) * (p.x - b.x) + (p.y - a.y) * (p.y - b.y) < 0.0)
            });
            if all_left {
                out.push(a);
                out.push(b);
            }
        }
    }
    out.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)));
    out.dedup();
    out
}

/// Moments by sampling cell centres of a fine raster (scanline inside test).
fn raster_moments(c: &LesionContour, cell: f64) -> [[f64; 4]; 4] {
    let v = c.vertices();
    let (mut lo, mut hi) = (v[0], v[0]);
    for p in v {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let mut m = [[0.0; 4]; 4];
    let ny = ((hi.y - lo.y) / cell).ceil() as usize + 1;
    let x0 = (lo.x / cell).floor() * cell;
    let y0 = (lo.y / cell).floor() * cell;
    for r in 0..ny {
        let y = y0 + (r as f64 + 0.5) * cell;
        let mut xs: Vec<f64> = Vec::new();
        for k in 0..v.len() {
            let (a, b) = (v[k], v[(k + 1) % v.len()]);
            if (a.y > y) != (b.y > y) {
                xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks(2) {
            let first = ((pair[0] - x0) / cell - 0.5).ceil().max(0.0) as usize;
            let mut col = first;
            loop {
                let x = x0 + (col as f64 + 0.5) * cell;
                if x > pair[1] {
                    break;
                }
                for p in 0..4 {
                    for q in 0..4 - p {
                        m[p][q] += x.powi(p as i32) * y.powi(q as i32) * cell * cell;
                    }
                }
                col += 1;
            }
        }
    }
    m
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn assert_moments_match(c: &LesionContour, cell: f64) {
    let exact = hu_moments(c).unwrap().raw;
    let raster = raster_moments(c, cell);
    for p in 0..4 {
        for q in 0..4 - p {
            assert!(rel(exact[p][q], raster[p][q]) < 1e-3, "m{p}{q}: {} vs {}", exact[p][q], raster[p][q]);
        }
    }
}

#[test]
fn hull_matches_brute_force() {
    for seed in 0..25u64 {
        let blob = shapes::random_blob(seed, 40 + seed as usize, 2.0, 1.5);
        let mut hull: Vec<Point> = convex_hull(&blob).vertices().to_vec();
        hull.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)));
        assert_eq!(hull, brute_force_hull(blob.vertices()), "seed {seed}");
    }
}

#[test]
fn hexomino_moments_match_raster() {
    let l = shapes::l_hexomino().translated(0.3, 0.7).unwrap();
    assert_moments_match(&l, 0.01);
}

#[test]
fn blob_moments_match_raster() {
    for seed in 0..20u64 {
        let blob = shapes::random_blob(100 + seed, 96, 2.0, 1.2).translated(5.0, 4.0).unwrap();
        assert_moments_match(&blob, 0.01);
    }
}

#[test]
fn random_blob_mask_area_tracks_cell_count() {
    for seed in 0..6u64 {
        let blob = shapes::random_blob(seed, 120, 14.0, 0.8).translated(20.0, 20.0).unwrap();
        let mask = BinaryMask::from_fn(40, 40, (1.0, 1.0), |i, j| blob.contains(Point::new(i as f64 + 0.5, j as f64 + 0.5))).unwrap();
        let count = mask.count();
        assert!(count >= 500);
        let c = contour_from_mask(&mask).unwrap();
        assert!(rel(c.area(), count as f64) < 0.02, "seed {seed}: {} vs {count}", c.area());
    }
}

fn l_relative_ok(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || a == b
}

#[test]
fn hu_invariance_rigid_and_scale() {
    let shapes_under_test = [shapes::rectangle(1.0, 1.0), shapes::l_hexomino(), shapes::random_blob(7, 64, 2.0, 1.0)];
    for base in &shapes_under_test {
        let h0 = hu_moments(base).unwrap().hu;
        let moved = base.rotated(37f64.to_radians()).unwrap().translated(12.5, -3.25).unwrap();
        let scaled = base.scaled(5.0).unwrap();
        for other in [moved, scaled] {
            let h = hu_moments(&other).unwrap().hu;
            for i in 0..7 {
                // h7 flips sign only under reflection, so signs must agree too
                assert!(l_relative_ok(h0[i], h[i], 1e-9), "h{}: {} vs {}", i + 1, h0[i], h[i]);
            }
        }
    }
}

#[test]
fn convex_inputs_have_unit_convexity() {
    for c in [shapes::regular_polygon(9, 1.0), shapes::ellipse(50, 3.0, 1.0), shapes::rectangle(2.0, 5.0)] {
        let f = extract_features(&c).unwrap();
        assert!((f.convexity1 - 1.0).abs() < 1e-9);
        assert!((f.convexity2 - 1.0).abs() < 1e-9);
        assert!(f.concavity.abs() < 1e-9);
    }
}

fn anisotropic_blob(seed: u64) -> LesionContour {
    // stretch so the orientation is well defined
    shapes::random_blob(seed, 72, 2.0, 1.0).map_points(|p| Point::new(1.7 * p.x, p.y)).unwrap()
}

fn dimensionless(f: &ShapeFeatureVector) -> Vec<(&'static str, f64)> {
    ShapeFeatureVector::NAMES
        .iter()
        .zip(f.to_array())
        .filter(|(n, _)| !ShapeFeatureVector::DIMENSIONAL.contains(n))
        .map(|(n, v)| (*n, v))
        .collect()
}

#[test]
fn orderings_hold() {
    for seed in 0..15 {
        let c = anisotropic_blob(seed);
        let hull = convex_hull(&c);
        let e = enclosing_shapes(&c).unwrap();
        assert!(c.area() <= hull.area() + 1e-12);
        assert!(hull.area() <= e.min_area_rect.area() + 1e-9);
        assert!(e.min_area_rect.area() <= e.aabb.area() + 1e-9);
        assert!(hull.perimeter() <= c.perimeter() + 1e-12);
        assert!(e.inscribed.radius <= e.circumscribed.radius);
        let f = extract_features(&c).unwrap();
        for v in [f.circularity1, f.convexity1, f.convexity2, f.extent, f.rectangularity, f.inscribed_circumscribed_ratio] {
            assert!((0.0..=1.0 + 1e-9).contains(&v));
        }
        assert!(f.concavity >= 0.0);
        assert!(f.to_array().iter().all(|v| v.is_finite()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scale_invariance(seed in 0u64..1000, s in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        let c = anisotropic_blob(seed);
        let a = extract_features(&c).unwrap();
        let b = extract_features(&c.scaled(s).unwrap()).unwrap();
        for ((n, x), (_, y)) in dimensionless(&a).into_iter().zip(dimensionless(&b)) {
            prop_assert!(l_relative_ok(x, y, 1e-6), "{n}: {x} vs {y}");
        }
        prop_assert!(l_relative_ok(b.area, a.area * s * s, 1e-12));
        prop_assert!(l_relative_ok(b.perimeter, a.perimeter * s, 1e-12));
    }

    #[test]
    fn rigid_motion_invariance(seed in 0u64..1000, angle in 0.0f64..(2.0 * PI), dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let c = anisotropic_blob(seed);
        let a = extract_features(&c).unwrap();
        let b = extract_features(&c.rotated(angle).unwrap().translated(dx, dy).unwrap()).unwrap();
        for ((n, x), y) in ShapeFeatureVector::NAMES.iter().zip(a.to_array()).zip(b.to_array()) {
            if *n == "orientation" {
                let shift = (y - x - angle).rem_euclid(PI);
                prop_assert!(shift.min(PI - shift) < 1e-6, "orientation {x} -> {y}");
            } else {
                prop_assert!(l_relative_ok(x, y, 1e-6), "{n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn vertex_start_invariance(seed in 0u64..1000, k in 1usize..72) {
        let c = anisotropic_blob(seed);
        let a = extract_features(&c).unwrap().to_array();
        let b = extract_features(&c.with_start(k)).unwrap().to_array();
        for (x, y) in a.iter().zip(b) {
            prop_assert!(l_relative_ok(*x, y, 1e-9), "{x} vs {y}");
        }
    }
}
