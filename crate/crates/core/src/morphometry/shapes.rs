//! Parametric test shapes: regular polygons, ellipses, stars and random blobs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::{LesionContour, Point};

/// Regular `n`-gon of circumradius `r` centred on the origin.
pub fn regular_polygon(n: usize, r: f64) -> LesionContour {
    ellipse(n, r, r)
}

/// Ellipse with semi-axes `a` (along x) and `b`, sampled at `n` vertices.
pub fn ellipse(n: usize, a: f64, b: f64) -> LesionContour {
    let pts = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            Point::new(a * t.cos(), b * t.sin())
        })
        .collect();
    LesionContour::new(pts).expect("ellipse is a valid contour")
}

/// Axis-aligned `w` × `h` rectangle with its lower-left corner at the origin.
pub fn rectangle(w: f64, h: f64) -> LesionContour {
    LesionContour::from_xy(&[[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]]).expect("valid rectangle")
}

/// Star with `tips` outer points at radius `outer` and notches at `inner`.
pub fn star(tips: usize, outer: f64, inner: f64) -> LesionContour {
    let pts = (0..2 * tips)
        .map(|k| {
            let t = PI / 2.0 + PI * k as f64 / tips as f64;
            let r = if k % 2 == 0 { outer } else { inner };
            Point::new(r * t.cos(), r * t.sin())
        })
        .collect();
    LesionContour::new(pts).expect("valid star")
}

/// L-shaped hexomino with unit cells: a 3-cell column on a 3-cell row.
pub fn l_hexomino() -> LesionContour {
    LesionContour::from_xy(&[
        [0.0, 0.0],
        [3.0, 0.0],
        [3.0, 1.0],
        [1.0, 1.0],
        [1.0, 4.0],
        [0.0, 4.0],
    ])
    .expect("valid hexomino")
}

/// Star-shaped random blob: a smooth positive radius function of the angle.
///
/// The radius is `mean_radius · (1 + Σ a_k cos(k t + φ_k))` over a handful of
/// low harmonics with random amplitudes, so the outline is always simple.
pub fn random_blob(seed: u64, n: usize, mean_radius: f64, roughness: f64) -> LesionContour {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let harmonics: Vec<(f64, f64, f64)> = (2..=7)
        .map(|k| {
            let amp = roughness * rng.gen_range(0.0..1.0) / k as f64;
            (k as f64, amp, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    // keep the radius well away from zero
    let total: f64 = harmonics.iter().map(|h| h.1).sum();
    let damp = if total > 0.6 { 0.6 / total } else { 1.0 };
    let pts = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let r = mean_radius
                * (1.0 + damp * harmonics.iter().map(|&(k, a, ph)| a * (k * t + ph).cos()).sum::<f64>());
            Point::new(r * t.cos(), r * t.sin())
        })
        .collect();
    LesionContour::new(pts).expect("radial blob is simple")
}
