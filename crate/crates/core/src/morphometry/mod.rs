//! Morphometric features of lesion outlines.

mod contour;
mod enclosing;
mod features;
mod hull;
mod mask;
mod moments;
pub mod shapes;

pub use contour::{basic_geometry, BasicGeometry, LesionContour, Point, AREA_TOLERANCE};
pub use enclosing::{aabb, enclosing_shapes, inscribed_circle, min_area_rect, min_enclosing_circle, Circle, EnclosingShapes, Rect};
pub use features::{extract_features, moment_ellipse, MomentEllipse, ShapeFeatureVector};
pub use hull::{convex_hull, hull_indices, max_defect_depth};
pub use mask::{contour_from_mask, BinaryMask};
pub use moments::{hu_invariants, hu_moments, signed_log, MomentSet, MomentTable, LOG_EPSILON, ZERO_SNAP};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("contour needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("contour has non-finite coordinates")]
    NonFinite,
    #[error("contour edges {edge_a} and {edge_b} intersect")]
    SelfIntersecting { edge_a: usize, edge_b: usize },
    #[error("degenerate region (area {area:e} mm²)")]
    DegenerateRegion { area: f64 },
    #[error("mask has no foreground cells")]
    EmptyMask,
    #[error("mask has {actual} cells, expected {expected}")]
    MaskShape { expected: usize, actual: usize },
    #[error("mask spacing must be positive, got ({0}, {1})")]
    InvalidSpacing(f64, f64),
}
