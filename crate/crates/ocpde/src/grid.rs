//! Axis-aligned box domains partitioned into uniform cells.
//!
//! The open box `(lower_1, upper_1) x ... x (lower_n, upper_n)` is split
//! along each axis into a fixed number of equal cells. The union of the
//! interior cell boundaries is the grid skeleton: finitely many axis-aligned
//! faces, hence closed and nowhere dense in the box. Cellwise-defined
//! functions use the skeleton as their default exceptional set, so the grid
//! also provides the canonical sample points used to compare such functions:
//! a Chebyshev-placed interior cloud per cell plus every face midpoint.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("axis {axis}: lower bound {lower} is not below upper bound {upper}")]
    BadBounds { axis: usize, lower: f64, upper: f64 },
    #[error("axis {axis}: cell count must be positive")]
    ZeroCells { axis: usize },
    #[error("point {point:?} lies outside the domain closure")]
    OutsideDomain { point: Vec<f64> },
    #[error("dimension mismatch: grid is {grid}-dimensional, point has {point} coordinates")]
    DimMismatch { grid: usize, point: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    cells: Vec<usize>,
}

/// One interior face of the grid: the hyperplane slice `x_axis = const`
/// between two neighbouring cells, restricted to one transverse cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FaceId {
    pub axis: usize,
    /// Which interior boundary along `axis`, in `1..cells[axis]`.
    pub slice: usize,
    /// Row-major index over the cells of the remaining axes.
    pub transverse: usize,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, cells: Vec<usize>) -> Result<Self, GridError> {
        if lower.is_empty() || lower.len() != upper.len() || lower.len() != cells.len() {
            return Err(GridError::EmptyDimension);
        }
        for axis in 0..lower.len() {
            if !(lower[axis] < upper[axis]) || !lower[axis].is_finite() || !upper[axis].is_finite()
            {
                return Err(GridError::BadBounds {
                    axis,
                    lower: lower[axis],
                    upper: upper[axis],
                });
            }
            if cells[axis] == 0 {
                return Err(GridError::ZeroCells { axis });
            }
        }
        Ok(Grid { lower, upper, cells })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn width(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.cells[axis] as f64
    }

    /// Same box, every axis split twice as finely.
    pub fn bisected(&self) -> Grid {
        Grid {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            cells: self.cells.iter().map(|c| c * 2).collect(),
        }
    }

    /// True when the two grids cover the same box, regardless of cell counts.
    pub fn same_domain(&self, other: &Grid) -> bool {
        self.lower == other.lower && self.upper == other.upper
    }

    /// Row-major flattening, axis 0 slowest.
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim());
        let mut idx = 0;
        for axis in 0..self.dim() {
            debug_assert!(multi[axis] < self.cells[axis]);
            idx = idx * self.cells[axis] + multi[axis];
        }
        idx
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut multi = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            multi[axis] = flat % self.cells[axis];
            flat /= self.cells[axis];
        }
        multi
    }

    /// The grid line coordinate `lower + j * width` on one axis. Sample
    /// construction and point classification route through this single
    /// formula so that equality tests on face coordinates are exact.
    pub fn line(&self, axis: usize, j: usize) -> f64 {
        if j == 0 {
            self.lower[axis]
        } else if j == self.cells[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + j as f64 * self.width(axis)
        }
    }

    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        let multi = self.multi_index(flat);
        (0..self.dim())
            .map(|axis| self.lower[axis] + (multi[axis] as f64 + 0.5) * self.width(axis))
            .collect()
    }

    pub fn cell_bounds(&self, flat: usize) -> Vec<(f64, f64)> {
        let multi = self.multi_index(flat);
        (0..self.dim())
            .map(|axis| (self.line(axis, multi[axis]), self.line(axis, multi[axis] + 1)))
            .collect()
    }

    /// Half the cell diagonal in the max norm: the largest distance from a
    /// cell center to any point of that cell.
    pub fn cell_radius(&self) -> f64 {
        (0..self.dim())
            .map(|axis| self.width(axis) / 2.0)
            .fold(0.0, f64::max)
    }

    /// All cells whose closure contains `x`. One cell for interior points,
    /// several when `x` sits on a face, edge or corner.
    pub fn incident_cells(&self, x: &[f64]) -> Result<Vec<usize>, GridError> {
        if x.len() != self.dim() {
            return Err(GridError::DimMismatch {
                grid: self.dim(),
                point: x.len(),
            });
        }
        let mut per_axis: Vec<Vec<usize>> = Vec::with_capacity(self.dim());
        for axis in 0..self.dim() {
            let lo = self.lower[axis];
            let hi = self.upper[axis];
            if !(x[axis] >= lo && x[axis] <= hi) {
                return Err(GridError::OutsideDomain { point: x.to_vec() });
            }
            let w = self.width(axis);
            let mut j = (((x[axis] - lo) / w).floor() as isize)
                .clamp(0, self.cells[axis] as isize - 1) as usize;
            // Exact face membership beats the floor estimate, which can land
            // on either side of a boundary after rounding.
            if x[axis] == self.line(axis, j) && j > 0 {
                per_axis.push(vec![j - 1, j]);
                continue;
            }
            if x[axis] == self.line(axis, j + 1) {
                if j + 1 < self.cells[axis] {
                    per_axis.push(vec![j, j + 1]);
                } else {
                    per_axis.push(vec![j]);
                }
                continue;
            }
            if x[axis] < self.line(axis, j) {
                j -= 1;
            } else if x[axis] > self.line(axis, j + 1) {
                j += 1;
            }
            per_axis.push(vec![j]);
        }
        // Cartesian product of the per-axis candidates.
        let mut cells = vec![Vec::new()];
        for cand in &per_axis {
            let mut next = Vec::with_capacity(cells.len() * cand.len());
            for prefix in &cells {
                for &j in cand {
                    let mut m = prefix.clone();
                    m.push(j);
                    next.push(m);
                }
            }
            cells = next;
        }
        Ok(cells.iter().map(|m| self.flat_index(m)).collect())
    }

    fn transverse_count(&self, axis: usize) -> usize {
        self.cells
            .iter()
            .enumerate()
            .filter(|(a, _)| *a != axis)
            .map(|(_, c)| *c)
            .product()
    }

    /// Number of interior faces.
    pub fn face_count(&self) -> usize {
        (0..self.dim())
            .map(|axis| (self.cells[axis] - 1) * self.transverse_count(axis))
            .sum()
    }

    /// Canonical flat enumeration of interior faces: axes in order, then
    /// slice index, then row-major transverse cell index.
    pub fn face_from_index(&self, mut idx: usize) -> Option<FaceId> {
        for axis in 0..self.dim() {
            let count = (self.cells[axis] - 1) * self.transverse_count(axis);
            if idx < count {
                let t = self.transverse_count(axis);
                return Some(FaceId {
                    axis,
                    slice: idx / t + 1,
                    transverse: idx % t,
                });
            }
            idx -= count;
        }
        None
    }

    pub fn face_index(&self, face: &FaceId) -> usize {
        let mut offset = 0;
        for axis in 0..face.axis {
            offset += (self.cells[axis] - 1) * self.transverse_count(axis);
        }
        offset + (face.slice - 1) * self.transverse_count(face.axis) + face.transverse
    }

    /// The midpoint of an interior face: the shared boundary coordinate on
    /// `face.axis`, cell-center coordinates transversally.
    pub fn face_midpoint(&self, face: &FaceId) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        x[face.axis] = self.line(face.axis, face.slice);
        let mut rem = face.transverse;
        let mut trans_axes: Vec<usize> = (0..self.dim()).filter(|a| *a != face.axis).collect();
        // Row-major over transverse axes, last axis fastest.
        trans_axes.reverse();
        for axis in trans_axes {
            let j = rem % self.cells[axis];
            rem /= self.cells[axis];
            x[axis] = self.lower[axis] + (j as f64 + 0.5) * self.width(axis);
        }
        x
    }

    /// Chebyshev-placed interior points of one cell, `density` per axis,
    /// strictly inside the cell.
    pub fn cell_samples(&self, flat: usize, density: usize) -> Vec<Vec<f64>> {
        let bounds = self.cell_bounds(flat);
        let per_axis: Vec<Vec<f64>> = (0..self.dim())
            .map(|axis| {
                let (a, b) = bounds[axis];
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                (0..density)
                    .map(|q| {
                        let theta = std::f64::consts::PI * (2.0 * q as f64 + 1.0)
                            / (2.0 * density as f64);
                        mid + half * theta.cos()
                    })
                    .collect()
            })
            .collect();
        let mut points = vec![Vec::new()];
        for cand in &per_axis {
            let mut next = Vec::with_capacity(points.len() * cand.len());
            for prefix in &points {
                for &c in cand {
                    let mut p = prefix.clone();
                    p.push(c);
                    next.push(p);
                }
            }
            points = next;
        }
        points
    }
}

/// A finite point cloud on which cellwise functions are compared: the
/// per-cell interior Chebyshev points together with every interior face
/// midpoint. Order and equality of such functions are decided on this set.
#[derive(Debug, Clone)]
pub struct SampleSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
    points: Vec<Vec<f64>>,
}

/// Default per-axis count of interior sample points. Sign decisions on a
/// sample cloud are exact for polynomial data whenever the per-axis count
/// exceeds the degree, so three points cover the quadratic pieces used
/// throughout the tests.
pub const DEFAULT_DENSITY: usize = 3;

impl SampleSet {
    /// Interior cloud plus face midpoints.
    pub fn from_grid(grid: &Grid, density: usize) -> SampleSet {
        let mut points = Vec::new();
        for cell in 0..grid.cell_count() {
            points.extend(grid.cell_samples(cell, density));
        }
        for f in 0..grid.face_count() {
            let face = grid.face_from_index(f).expect("face index in range");
            points.push(grid.face_midpoint(&face));
        }
        SampleSet {
            lower: grid.lower().to_vec(),
            upper: grid.upper().to_vec(),
            points,
        }
    }

    /// Interior cloud only, no skeleton points. Used when checking bounds
    /// that are only claimed off the exceptional set.
    pub fn interior_only(grid: &Grid, density: usize) -> SampleSet {
        let mut points = Vec::new();
        for cell in 0..grid.cell_count() {
            points.extend(grid.cell_samples(cell, density));
        }
        SampleSet {
            lower: grid.lower().to_vec(),
            upper: grid.upper().to_vec(),
            points,
        }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn matches_domain(&self, grid: &Grid) -> bool {
        self.lower == grid.lower() && self.upper == grid.upper()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_line(cells: usize) -> Grid {
        Grid::new(vec![0.0], vec![1.0], vec![cells]).unwrap()
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(Grid::new(vec![1.0], vec![0.0], vec![4]).is_err());
        assert!(Grid::new(vec![0.0], vec![1.0], vec![0]).is_err());
    }

    #[test]
    fn face_count_one_dim() {
        assert_eq!(unit_line(64).face_count(), 63);
        assert_eq!(unit_line(1).face_count(), 0);
    }

    #[test]
    fn face_count_two_dim() {
        let g = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![3, 2]).unwrap();
        // axis 0: 2 slices * 2 transverse cells; axis 1: 1 slice * 3 cells
        assert_eq!(g.face_count(), 4 + 3);
        for i in 0..g.face_count() {
            let f = g.face_from_index(i).unwrap();
            assert_eq!(g.face_index(&f), i);
        }
    }

    #[test]
    fn incident_cells_interior_and_face() {
        let g = unit_line(4);
        assert_eq!(g.incident_cells(&[0.1]).unwrap(), vec![0]);
        assert_eq!(g.incident_cells(&[0.25]).unwrap(), vec![0, 1]);
        assert_eq!(g.incident_cells(&[0.0]).unwrap(), vec![0]);
        assert_eq!(g.incident_cells(&[1.0]).unwrap(), vec![3]);
        assert!(g.incident_cells(&[1.5]).is_err());
    }

    #[test]
    fn incident_cells_corner_two_dim() {
        let g = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![2, 2]).unwrap();
        let cells = g.incident_cells(&[0.5, 0.5]).unwrap();
        assert_eq!(cells.len(), 4);
    }

    #[test]
    fn refined_grid_keeps_parent_lines() {
        let g = unit_line(3);
        let fine = g.bisected();
        for j in 0..=3 {
            assert_eq!(g.line(0, j), fine.line(0, 2 * j));
        }
    }

    #[test]
    fn cell_samples_strictly_interior() {
        let g = unit_line(4);
        for cell in 0..4 {
            let (a, b) = g.cell_bounds(cell)[0];
            for p in g.cell_samples(cell, 5) {
                assert!(p[0] > a && p[0] < b, "sample {p:?} not inside ({a}, {b})");
            }
        }
    }

    #[test]
    fn sample_set_counts() {
        let g = unit_line(4);
        let s = SampleSet::from_grid(&g, 3);
        assert_eq!(s.len(), 4 * 3 + 3);
        let g2 = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![2, 2]).unwrap();
        let s2 = SampleSet::from_grid(&g2, 3);
        assert_eq!(s2.len(), 4 * 9 + 4);
    }

    #[test]
    fn face_midpoints_land_on_faces() {
        let g = unit_line(4);
        for i in 0..g.face_count() {
            let f = g.face_from_index(i).unwrap();
            let x = g.face_midpoint(&f);
            assert_eq!(g.incident_cells(&x).unwrap().len(), 2);
        }
    }
}
