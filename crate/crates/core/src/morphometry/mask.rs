//! Raster masks and boundary tracing.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::contour::{orient, AREA_TOLERANCE};
use super::{GeometryError, LesionContour, Point};

/// Offset (in cells) applied to vertices where the region pinches through a
/// diagonal cell contact, so the traced outline stays simple.
const PINCH_OFFSET: f64 = 1e-6;

/// Boolean raster, row-major with row `j` spanning `y ∈ [j·dy, (j+1)·dy]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    cells: Vec<bool>,
    spacing: (f64, f64),
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, cells: Vec<bool>, spacing: (f64, f64)) -> Result<Self, GeometryError> {
        if cells.len() != width * height {
            return Err(GeometryError::MaskShape {
                expected: width * height,
                actual: cells.len(),
            });
        }
        if !(spacing.0 > 0.0 && spacing.1 > 0.0 && spacing.0.is_finite() && spacing.1.is_finite()) {
            return Err(GeometryError::InvalidSpacing(spacing.0, spacing.1));
        }
        Ok(Self { width, height, cells, spacing })
    }

    /// Builds a mask by evaluating `f(col, row)` on every cell.
    pub fn from_fn(width: usize, height: usize, spacing: (f64, f64), f: impl Fn(usize, usize) -> bool) -> Result<Self, GeometryError> {
        let cells = (0..height).flat_map(|j| (0..width).map(move |i| (i, j))).map(|(i, j)| f(i, j)).collect();
        Self::new(width, height, cells, spacing)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn spacing(&self) -> (f64, f64) {
        self.spacing
    }

    pub fn get(&self, i: i64, j: i64) -> bool {
        if i < 0 || j < 0 || i as usize >= self.width || j as usize >= self.height {
            return false;
        }
        self.cells[j as usize * self.width + i as usize]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Labels 8-connected foreground components; returns cell lists in scan order of discovery.
    fn components(&self) -> Vec<Vec<(i64, i64)>> {
        let mut seen = vec![false; self.cells.len()];
        let mut out = Vec::new();
        for start in 0..self.cells.len() {
            if !self.cells[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            while let Some(k) = queue.pop_front() {
                let (i, j) = ((k % self.width) as i64, (k / self.width) as i64);
                comp.push((i, j));
                for dj in -1..=1 {
                    for di in -1..=1 {
                        let (ni, nj) = (i + di, j + dj);
                        if self.get(ni, nj) {
                            let nk = nj as usize * self.width + ni as usize;
                            if !seen[nk] {
                                seen[nk] = true;
                                queue.push_back(nk);
                            }
                        }
                    }
                }
            }
            out.push(comp);
        }
        out
    }
}

/// Outer boundary of the largest 8-connected component, traced along cell edges.
///
/// Vertices sit on cell corners, so a region without holes has polygon area
/// equal to its cell count times `dx·dy`. Interior holes are filled. Ties for
/// the largest component go to the one found first in row-major order.
pub fn contour_from_mask(mask: &BinaryMask) -> Result<LesionContour, GeometryError> {
    let comps = mask.components();
    let largest = comps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
        .map(|(_, c)| c)
        .ok_or(GeometryError::EmptyMask)?;
    let member = {
        let mut m = vec![false; mask.width * mask.height];
        for &(i, j) in largest {
            m[j as usize * mask.width + i as usize] = true;
        }
        m
    };
    let fg = |i: i64, j: i64| {
        i >= 0 && j >= 0 && (i as usize) < mask.width && (j as usize) < mask.height && member[j as usize * mask.width + i as usize]
    };
    // lowest row, then leftmost column: its bottom edge is on the outer boundary
    let &(si, sj) = largest.iter().min_by_key(|&&(i, j)| (j, i)).expect("non-empty component");
    let start = (si, sj);
    let mut v = start;
    // as if arriving from above; the first step turns east along the bottom edge
    let mut d = (0i64, -1i64);
    let mut lattice: Vec<(f64, f64)> = Vec::new();
    loop {
        // cells ahead-left / ahead-right of the vertex `v` when heading `d`
        let left = (-d.1, d.0);
        let cell_of = |ox: i64, oy: i64| -> (i64, i64) {
            // cell whose centre is v + (d + o)/2: floor((2v + d + o)/2)
            ((2 * v.0 + d.0 + ox).div_euclid(2), (2 * v.1 + d.1 + oy).div_euclid(2))
        };
        let al = cell_of(left.0, left.1);
        let ar = cell_of(-left.0, -left.1);
        let (ar_fg, al_fg) = (fg(ar.0, ar.1), fg(al.0, al.1));
        let new_d = if ar_fg {
            (d.1, -d.0)
        } else if al_fg {
            d
        } else {
            (-d.1, d.0)
        };
        if new_d != d {
            let (mut x, mut y) = (v.0 as f64, v.1 as f64);
            if ar_fg && !al_fg {
                x += PINCH_OFFSET * (new_d.0 - d.0) as f64;
                y += PINCH_OFFSET * (new_d.1 - d.1) as f64;
            }
            lattice.push((x, y));
        }
        d = new_d;
        v = (v.0 + d.0, v.1 + d.1);
        // the start corner cannot be a pinch, so it is visited exactly once
        if v == start {
            break;
        }
    }
    let (dx, dy) = mask.spacing;
    let mut pts: Vec<Point> = lattice.into_iter().map(|(x, y)| Point::new(x * dx, y * dy)).collect();
    drop_collinear(&mut pts);
    let c = LesionContour::new(pts)?;
    if c.area() < AREA_TOLERANCE {
        return Err(GeometryError::DegenerateRegion { area: c.area() });
    }
    Ok(c)
}

fn drop_collinear(pts: &mut Vec<Point>) {
    loop {
        let n = pts.len();
        if n < 4 {
            return;
        }
        let keep: Vec<bool> = (0..n)
            .map(|i| orient(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]) != 0.0)
            .collect();
        if keep.iter().all(|&k| k) {
            return;
        }
        let mut k = keep.iter();
        pts.retain(|_| *k.next().expect("same length"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn full_square_mask() {
        let m = BinaryMask::from_fn(3, 3, (1.0, 1.0), |_, _| true).unwrap();
        let c = contour_from_mask(&m).unwrap();
        assert_eq!(c.len(), 4);
        assert_relative_eq!(c.area(), 9.0);
        assert_relative_eq!(c.perimeter(), 12.0);
    }

    #[test]
    fn anisotropic_spacing() {
        let m = BinaryMask::from_fn(4, 2, (0.5, 2.0), |_, _| true).unwrap();
        let c = contour_from_mask(&m).unwrap();
        assert_relative_eq!(c.area(), 8.0 * 1.0);
    }

    #[test]
    fn keeps_largest_component() {
        // 5-cell plus sign at the left, a 50-cell 10×5 block at the right
        let plus = [(1, 1), (0, 1), (2, 1), (1, 0), (1, 2)];
        let m = BinaryMask::from_fn(20, 6, (1.0, 1.0), |i, j| plus.contains(&(i, j)) || (i >= 8 && i < 18 && j < 5)).unwrap();
        assert_eq!(m.count(), 55);
        let c = contour_from_mask(&m).unwrap();
        assert_relative_eq!(c.area(), 50.0);
        assert!(c.vertices().iter().all(|p| p.x >= 8.0));
    }

    #[test]
    fn diagonal_contact_is_one_component() {
        // two cells touching at a corner plus a tail so the pinch is interior
        let cells = [(0, 0), (1, 1), (2, 1), (2, 2)];
        let m = BinaryMask::from_fn(3, 3, (1.0, 1.0), |i, j| cells.contains(&(i, j))).unwrap();
        let c = contour_from_mask(&m).unwrap();
        assert!((c.area() - 4.0).abs() < 1e-5);
    }

    #[test]
    fn hole_is_filled() {
        let m = BinaryMask::from_fn(5, 5, (1.0, 1.0), |i, j| !(i == 2 && j == 2)).unwrap();
        let c = contour_from_mask(&m).unwrap();
        assert_relative_eq!(c.area(), 25.0);
    }

    #[test]
    fn empty_and_invalid() {
        let m = BinaryMask::from_fn(3, 3, (1.0, 1.0), |_, _| false).unwrap();
        assert!(matches!(contour_from_mask(&m), Err(GeometryError::EmptyMask)));
        assert!(BinaryMask::new(2, 2, vec![true; 3], (1.0, 1.0)).is_err());
        assert!(BinaryMask::new(1, 1, vec![true], (0.0, 1.0)).is_err());
    }
}
