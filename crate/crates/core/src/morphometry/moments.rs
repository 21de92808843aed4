//! Region moments by exact polygon integration, and the seven Hu invariants.
//!
//! Raw moments use the closed-form Green's-theorem expansion for a filled
//! polygon:
//!
//! ```text
//! m_pq = 1 / ((p+q+2)(p+q+1) C(p+q, p))
//!        Σ_i (x_i y_{i+1} − x_{i+1} y_i)
//!            Σ_{k≤p} Σ_{l≤q} C(k+l, l) C(p+q−k−l, q−l) x_i^k x_{i+1}^{p−k} y_i^l y_{i+1}^{q−l}
//! ```
//!
//! Central moments apply the same expansion to the polygon translated to its
//! centroid, which avoids the cancellation of the raw-to-central conversion.

use serde::{Deserialize, Serialize};

use super::contour::AREA_TOLERANCE;
use super::{GeometryError, LesionContour, Point};

/// Added inside the logarithm of the signed-log transform.
pub const LOG_EPSILON: f64 = 1e-300;

/// Relative amplitude below which an invariant is treated as exactly zero.
///
/// Shapes with rotational symmetry have vanishing h2..h7; in floating point
/// those come out as rounding noise of either sign, which the log transform
/// would blow up into large, sign-unstable values.
pub const ZERO_SNAP: f64 = 1e-10;

/// Moments of order `p + q ≤ 3`, indexed `[p][q]`.
pub type MomentTable = [[f64; 4]; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    /// Raw moments about the coordinate origin.
    pub raw: MomentTable,
    /// Moments about the centroid.
    pub central: MomentTable,
    /// Scale-normalized central moments `μ_pq / μ00^(1 + (p+q)/2)`.
    pub normalized: MomentTable,
    pub hu: [f64; 7],
}

impl MomentSet {
    pub fn centroid(&self) -> Point {
        Point::new(self.raw[1][0] / self.raw[0][0], self.raw[0][1] / self.raw[0][0])
    }

    /// Signed-log Hu features `−sign(h)·log10(|h| + ε)`; exact zeros map to 0.
    pub fn log_hu(&self) -> [f64; 7] {
        self.hu.map(signed_log)
    }
}

pub fn signed_log(h: f64) -> f64 {
    if h == 0.0 {
        0.0
    } else {
        -h.signum() * (h.abs() + LOG_EPSILON).log10()
    }
}

fn binom(n: usize, k: usize) -> f64 {
    const TABLE: [[f64; 7]; 7] = [
        [1., 0., 0., 0., 0., 0., 0.],
        [1., 1., 0., 0., 0., 0., 0.],
        [1., 2., 1., 0., 0., 0., 0.],
        [1., 3., 3., 1., 0., 0., 0.],
        [1., 4., 6., 4., 1., 0., 0.],
        [1., 5., 10., 10., 5., 1., 0.],
        [1., 6., 15., 20., 15., 6., 1.],
    ];
    TABLE[n][k]
}

fn polygon_moments(v: &[Point], shift: Point) -> MomentTable {
    let n = v.len();
    let mut m = [[0.0; 4]; 4];
    let mut pw = [[0.0f64; 4]; 4];
    for i in 0..n {
        let a = v[i].sub(shift);
        let b = v[(i + 1) % n].sub(shift);
        let w = a.cross(b);
        // powers: pw[0] = x_i^k, pw[1] = x_{i+1}^k, pw[2] = y_i^k, pw[3] = y_{i+1}^k
        for k in 0..4 {
            pw[0][k] = a.x.powi(k as i32);
            pw[1][k] = b.x.powi(k as i32);
            pw[2][k] = a.y.powi(k as i32);
            pw[3][k] = b.y.powi(k as i32);
        }
        for p in 0..4 {
            for q in 0..4 - p {
                let mut s = 0.0;
                for k in 0..=p {
                    for l in 0..=q {
                        s += binom(k + l, l)
                            * binom(p + q - k - l, q - l)
                            * pw[0][k]
                            * pw[1][p - k]
                            * pw[2][l]
                            * pw[3][q - l];
                    }
                }
                m[p][q] += w * s;
            }
        }
    }
    for p in 0..4 {
        for q in 0..4 - p {
            let d = ((p + q + 2) * (p + q + 1)) as f64 * binom(p + q, p);
            m[p][q] /= d;
        }
    }
    m
}

/// Raw, central and normalized moments plus Hu invariants of the filled region.
pub fn hu_moments(c: &LesionContour) -> Result<MomentSet, GeometryError> {
    let v = c.vertices();
    let raw = polygon_moments(v, Point::new(0.0, 0.0));
    let area = c.area();
    if area < AREA_TOLERANCE {
        return Err(GeometryError::DegenerateRegion { area });
    }
    let centroid = c.centroid();
    let mut central = polygon_moments(v, centroid);
    // first-order central moments vanish by definition
    central[1][0] = 0.0;
    central[0][1] = 0.0;
    let mu00 = central[0][0];
    let mut normalized = [[0.0; 4]; 4];
    for p in 0..4 {
        for q in 0..4 - p {
            normalized[p][q] = central[p][q] / mu00.powf(1.0 + (p + q) as f64 / 2.0);
        }
    }
    normalized[0][0] = 1.0;
    Ok(MomentSet {
        raw,
        central,
        normalized,
        hu: hu_invariants(&normalized),
    })
}

/// The seven Hu combinations of normalized central moments, with rounding-level
/// values snapped to zero (see [`ZERO_SNAP`]).
pub fn hu_invariants(eta: &MomentTable) -> [f64; 7] {
    let (n20, n02, n11) = (eta[2][0], eta[0][2], eta[1][1]);
    let (n30, n03, n21, n12) = (eta[3][0], eta[0][3], eta[2][1], eta[1][2]);
    let a = n30 + n12;
    let b = n21 + n03;
    let c = n30 - 3.0 * n12;
    let d = 3.0 * n21 - n03;
    let h = [
        n20 + n02,
        (n20 - n02).powi(2) + 4.0 * n11 * n11,
        c * c + d * d,
        a * a + b * b,
        c * a * (a * a - 3.0 * b * b) + d * b * (3.0 * a * a - b * b),
        (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b,
        d * a * (a * a - 3.0 * b * b) - c * b * (3.0 * a * a - b * b),
    ];
    // Reference magnitudes: second-order moments scale like h1, third-order like h1^1.5.
    let s2 = h[0].abs();
    let s3 = s2.powf(1.5);
    let reference = [
        s2,
        (ZERO_SNAP * s2).powi(2),
        (ZERO_SNAP * s3).powi(2),
        (ZERO_SNAP * s3).powi(2),
        (ZERO_SNAP * s3).powi(4),
        ZERO_SNAP * s2 * (ZERO_SNAP * s3).powi(2),
        (ZERO_SNAP * s3).powi(4),
    ];
    let mut out = h;
    for i in 1..7 {
        if out[i].abs() < reference[i] {
            out[i] = 0.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphometry::shapes;
    use approx::assert_relative_eq;

    #[test]
    fn rectangle_closed_forms() {
        let r = shapes::rectangle(4.0, 2.0);
        let m = hu_moments(&r).unwrap();
        assert_relative_eq!(m.raw[0][0], 8.0, epsilon = 1e-12);
        assert_relative_eq!(m.raw[1][0], 16.0, epsilon = 1e-12);
        assert_relative_eq!(m.raw[0][1], 8.0, epsilon = 1e-12);
        // ∫x² over [0,4]×[0,2] = 2·64/3
        assert_relative_eq!(m.raw[2][0], 128.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(m.raw[3][0], 128.0, epsilon = 1e-12);
        assert_relative_eq!(m.raw[1][2], 8.0 * 8.0 / 3.0, epsilon = 1e-12);
        // μ20 = A·w²/12
        assert_relative_eq!(m.central[2][0], 8.0 * 16.0 / 12.0, epsilon = 1e-12);
        assert_relative_eq!(m.central[0][2], 8.0 * 4.0 / 12.0, epsilon = 1e-12);
        assert!(m.central[1][1].abs() < 1e-12);
        assert_eq!(m.normalized[0][0], 1.0);
        assert_eq!(m.hu[2], 0.0);
        assert!(m.hu[0] > 0.0);
    }

    #[test]
    fn square_has_only_first_invariant() {
        let m = hu_moments(&shapes::rectangle(1.0, 1.0).rotated(0.3).unwrap()).unwrap();
        assert_relative_eq!(m.hu[0], 1.0 / 6.0, epsilon = 1e-12);
        assert_eq!(&m.hu[1..], &[0.0; 6]);
        assert_eq!(m.log_hu()[1], 0.0);
    }

    #[test]
    fn signed_log_transform() {
        assert_eq!(signed_log(0.0), 0.0);
        assert_relative_eq!(signed_log(1e-3), 3.0, epsilon = 1e-12);
        assert_relative_eq!(signed_log(-1e-3), -3.0, epsilon = 1e-12);
    }
}
