//! The 26-entry morphometric feature vector.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::contour::AREA_TOLERANCE;
use super::enclosing::{aabb, enclosing_shapes};
use super::hull::{convex_hull, max_defect_depth};
use super::moments::{hu_moments, MomentSet};
use super::{GeometryError, LesionContour, Point};

/// Semi-axes and orientation of the ellipse sharing the region's second moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEllipse {
    pub major: f64,
    pub minor: f64,
    /// Direction of the major axis in `[0, π)`.
    pub theta: f64,
}

/// Relative anisotropy below which the second moments are treated as
/// isotropic and the orientation is reported as 0.
const ISOTROPY_TOLERANCE: f64 = 1e-10;

pub fn moment_ellipse(c: &LesionContour) -> Result<MomentEllipse, GeometryError> {
    ellipse_from_moments(&hu_moments(c)?)
}

fn ellipse_from_moments(m: &MomentSet) -> Result<MomentEllipse, GeometryError> {
    let mu00 = m.central[0][0];
    if mu00 < AREA_TOLERANCE {
        return Err(GeometryError::DegenerateRegion { area: mu00 });
    }
    let (a, b, c) = (m.central[2][0] / mu00, m.central[1][1] / mu00, m.central[0][2] / mu00);
    let half_diff = 0.5 * (a - c);
    let mut r = half_diff.hypot(b);
    let mean = 0.5 * (a + c);
    let theta = if r <= ISOTROPY_TOLERANCE * mean {
        r = 0.0;
        0.0
    } else {
        (0.5 * (2.0 * b).atan2(a - c)).rem_euclid(PI)
    };
    let (l1, l2) = (mean + r, mean - r);
    if !(l2 > 0.0) {
        return Err(GeometryError::DegenerateRegion { area: mu00 });
    }
    // a solid ellipse with semi-axis s has variance s²/4 along that axis
    Ok(MomentEllipse {
        major: 2.0 * l1.sqrt(),
        minor: 2.0 * l2.sqrt(),
        theta: if theta >= PI { 0.0 } else { theta },
    })
}

macro_rules! feature_vector {
    ($($field:ident => $name:literal),+ $(,)?) => {
        /// Morphometric features of one lesion, in canonical order.
        #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
        pub struct ShapeFeatureVector {
            $(pub $field: f64,)+
        }

        impl ShapeFeatureVector {
            /// Canonical feature names, in column order.
            pub const NAMES: [&'static str; 26] = [$($name),+];

            pub fn to_array(&self) -> [f64; 26] {
                [$(self.$field),+]
            }

            pub fn from_array(v: [f64; 26]) -> Self {
                let [$($field),+] = v;
                Self { $($field),+ }
            }

            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    $($name => Some(self.$field),)+
                    _ => None,
                }
            }
        }
    };
}

feature_vector! {
    area => "area",
    perimeter => "perimeter",
    circularity1 => "circularity1",
    circularity2 => "circularity2",
    roundness => "roundness",
    compactness => "compactness",
    convexity1 => "convexity1",
    convexity2 => "convexity2",
    convexity3 => "convexity3",
    convexity4 => "convexity4",
    concavity => "concavity",
    aspect_ratio => "aspect_ratio",
    elongation => "elongation",
    eccentricity => "eccentricity",
    extent => "extent",
    orientation => "orientation",
    rectangularity => "rectangularity",
    inscribed_circumscribed_ratio => "inscribed_circumscribed_ratio",
    ellipticity => "ellipticity",
    humoment1 => "humoment1",
    humoment2 => "humoment2",
    humoment3 => "humoment3",
    humoment4 => "humoment4",
    humoment5 => "humoment5",
    humoment6 => "humoment6",
    humoment7 => "humoment7",
}

impl ShapeFeatureVector {
    /// Features carrying physical units or a reference direction.
    pub const DIMENSIONAL: [&'static str; 3] = ["area", "perimeter", "orientation"];
}

/// Computes all 26 features of a contour.
///
/// | feature | definition |
/// |---|---|
/// | circularity1 | 4πA / P² |
/// | circularity2 | A / (π R²), R = minimum enclosing circle radius |
/// | roundness | 4A / (π L²), L = 2·major semi-axis |
/// | compactness | P² / (4πA) |
/// | convexity1 | P_hull / P |
/// | convexity2 | A / A_hull |
/// | convexity3 | deepest convexity defect / √(4A/π) |
/// | convexity4 | 4π (A_hull − A) / P_hull² |
/// | concavity | (A_hull − A) / A_hull |
/// | aspect_ratio | major / minor |
/// | elongation | 1 − minor / major |
/// | eccentricity | √(1 − (minor/major)²) |
/// | extent | A / bounding-box area in the principal-axis frame |
/// | orientation | major-axis direction in [0, π) |
/// | rectangularity | A / minimum-area rectangle |
/// | inscribed_circumscribed_ratio | r_in / R |
/// | ellipticity | A / (π · major · minor) |
/// | humoment1..7 | −sign(h)·log10(\|h\| + ε) |
pub fn extract_features(c: &LesionContour) -> Result<ShapeFeatureVector, GeometryError> {
    let area = c.area();
    if area < AREA_TOLERANCE {
        return Err(GeometryError::DegenerateRegion { area });
    }
    let perimeter = c.perimeter();
    let hull = convex_hull(c);
    let (hull_area, hull_perimeter) = (hull.area(), hull.perimeter());
    let moments = hu_moments(c)?;
    let ellipse = ellipse_from_moments(&moments)?;
    let enclosing = enclosing_shapes(c)?;
    let r_circ = enclosing.circumscribed.radius;
    let defect = (hull_area - area).max(0.0);
    let axis_ratio = ellipse.minor / ellipse.major;

    let centroid = moments.centroid();
    let (s, co) = (-ellipse.theta).sin_cos();
    let principal: Vec<Point> = c
        .vertices()
        .iter()
        .map(|p| {
            let q = p.sub(centroid);
            Point::new(co * q.x - s * q.y, s * q.x + co * q.y)
        })
        .collect();
    let frame_box = aabb(&principal);
    let hu = moments.log_hu();

    Ok(ShapeFeatureVector {
        area,
        perimeter,
        circularity1: 4.0 * PI * area / (perimeter * perimeter),
        circularity2: area / (PI * r_circ * r_circ),
        roundness: area / (PI * ellipse.major * ellipse.major),
        compactness: perimeter * perimeter / (4.0 * PI * area),
        convexity1: hull_perimeter / perimeter,
        convexity2: area / hull_area,
        convexity3: max_defect_depth(c) / (4.0 * area / PI).sqrt(),
        convexity4: 4.0 * PI * defect / (hull_perimeter * hull_perimeter),
        concavity: defect / hull_area,
        aspect_ratio: 1.0 / axis_ratio,
        elongation: 1.0 - axis_ratio,
        eccentricity: (1.0 - axis_ratio * axis_ratio).max(0.0).sqrt(),
        extent: area / frame_box.area(),
        orientation: ellipse.theta,
        rectangularity: area / enclosing.min_area_rect.area(),
        inscribed_circumscribed_ratio: enclosing.inscribed.radius / r_circ,
        ellipticity: area / (PI * ellipse.major * ellipse.minor),
        humoment1: hu[0],
        humoment2: hu[1],
        humoment3: hu[2],
        humoment4: hu[3],
        humoment5: hu[4],
        humoment6: hu[5],
        humoment7: hu[6],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphometry::shapes;
    use approx::assert_relative_eq;

    #[test]
    fn rectangle_ellipse() {
        let r = shapes::rectangle(4.0, 2.0);
        let e = moment_ellipse(&r).unwrap();
        assert_relative_eq!(e.major / e.minor, 2.0, epsilon = 1e-12);
        assert_eq!(e.theta, 0.0);
        let rot = r.rotated(PI / 6.0).unwrap();
        let er = moment_ellipse(&rot).unwrap();
        assert_relative_eq!(er.theta, PI / 6.0, epsilon = 1e-9);
        assert_relative_eq!(er.major, e.major, epsilon = 1e-9);
        assert_relative_eq!(er.minor, e.minor, epsilon = 1e-9);
    }

    #[test]
    fn polygonized_ellipse_axes() {
        let e = moment_ellipse(&shapes::ellipse(720, 3.0, 1.0)).unwrap();
        assert!((e.major / e.minor - 3.0).abs() < 0.015);
        assert!((e.major - 3.0).abs() < 1e-3);
    }

    #[test]
    fn circle_limits() {
        let f = extract_features(&shapes::regular_polygon(360, 1.0)).unwrap();
        assert!((f.circularity1 - 1.0).abs() < 1e-3);
        assert!(f.concavity.abs() < 1e-3);
        assert!((f.aspect_ratio - 1.0).abs() < 1e-3);
        assert!((f.roundness - 1.0).abs() < 1e-3);
        assert!((f.ellipticity - 1.0).abs() < 1e-3);
    }

    #[test]
    fn unit_square_closed_forms() {
        let f = extract_features(&shapes::rectangle(1.0, 1.0)).unwrap();
        assert_relative_eq!(f.circularity1, PI / 4.0, epsilon = 1e-12);
        assert_relative_eq!(f.extent, 1.0, epsilon = 1e-12);
        assert_relative_eq!(f.rectangularity, 1.0, epsilon = 1e-12);
        assert_relative_eq!(f.convexity1, 1.0, epsilon = 1e-12);
        assert_relative_eq!(f.circularity2, 2.0 / PI, epsilon = 1e-12);
        assert_eq!(f.concavity, 0.0);
        assert_eq!(f.convexity4, 0.0);
    }

    #[test]
    fn star_solidity_matches_hull_area() {
        let s = shapes::star(5, 2.0, 0.8);
        let f = extract_features(&s).unwrap();
        // five outer tips at radius 2: regular pentagon area (5/2) R² sin(2π/5)
        let pentagon = 2.5 * 4.0 * (2.0 * PI / 5.0).sin();
        assert_relative_eq!(f.convexity2, s.area() / pentagon, epsilon = 1e-9);
        assert!(f.convexity2 < 1.0);
        assert!(f.concavity > 0.0);
    }

    #[test]
    fn names_are_unique_and_complete() {
        let mut n = ShapeFeatureVector::NAMES.to_vec();
        n.sort_unstable();
        n.dedup();
        assert_eq!(n.len(), 26);
        let f = extract_features(&shapes::l_hexomino()).unwrap();
        let arr = f.to_array();
        for (i, name) in ShapeFeatureVector::NAMES.iter().enumerate() {
            assert_eq!(f.get(name), Some(arr[i]));
        }
        assert_eq!(ShapeFeatureVector::from_array(arr), f);
    }
}
