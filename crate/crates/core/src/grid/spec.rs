use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniform grid over the box `corner + [0, cells·h]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    corner: Vec<f64>,
    h: f64,
    cells: Vec<usize>,
}

impl GridSpec {
    pub fn new(corner: Vec<f64>, h: f64, cells: Vec<usize>) -> Result<Self> {
        if corner.is_empty() || corner.len() != cells.len() {
            return Err(invalid("grid corner and cell counts must have the same nonzero dimension"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("grid resolution must be positive, got {h}")));
        }
        if cells.contains(&0) {
            return Err(invalid("grid needs at least one cell per axis"));
        }
        if corner.iter().any(|c| !c.is_finite()) {
            return Err(invalid("grid corner must be finite"));
        }
        Ok(GridSpec { corner, h, cells })
    }

    /// Grid from a box extent, which must be an integer multiple of `h`.
    pub fn from_extent(corner: Vec<f64>, extent: &[f64], h: f64) -> Result<Self> {
        if extent.len() != corner.len() {
            return Err(invalid("grid corner and extent dimensions differ"));
        }
        let mut cells = Vec::with_capacity(extent.len());
        for &e in extent {
            let m = (e / h).round();
            if !(m >= 1.0) || (m * h - e).abs() > 1e-9 * e.abs().max(h) {
                return Err(invalid(format!("extent {e} is not an integer multiple of h={h}")));
            }
            cells.push(m as usize);
        }
        GridSpec::new(corner, h, cells)
    }

    /// Cube grid `[-half_width, half_width]ⁿ` with `cells_per_axis` cells.
    pub fn centered(n: usize, half_width: f64, cells_per_axis: usize) -> Result<Self> {
        GridSpec::new(vec![-half_width; n], 2.0 * half_width / cells_per_axis as f64, vec![cells_per_axis; n])
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn corner(&self) -> &[f64] {
        &self.corner
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.cells[axis] as f64 * self.h
    }

    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    /// Row-major flat index (last axis fastest).
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.cells).fold(0, |acc, (&i, &m)| acc * m + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.cells[a];
            flat /= self.cells[a];
        }
        idx
    }

    pub fn cell_center(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &i)| self.corner[a] + (i as f64 + 0.5) * self.h).collect()
    }

    pub fn cell_lower(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &i)| self.corner[a] + i as f64 * self.h).collect()
    }

    /// Inclusive per-axis ranges of cells whose centers lie in `[lo, hi]`.
    pub fn center_ranges(&self, lo: &[f64], hi: &[f64]) -> Option<Vec<(usize, usize)>> {
        let mut out = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let first = ((lo[a] - self.corner[a]) / self.h - 0.5).ceil().max(0.0);
            let last = ((hi[a] - self.corner[a]) / self.h - 0.5).floor().min(self.cells[a] as f64 - 1.0);
            if first > last {
                return None;
            }
            let (mut f, mut l) = (first as usize, last as usize);
            // settle rounding at the boundary against the exact center coordinates
            while f > 0 && self.center_coord(a, f - 1) >= lo[a] {
                f -= 1;
            }
            while f <= l && self.center_coord(a, f) < lo[a] {
                f += 1;
            }
            while l + 1 < self.cells[a] && self.center_coord(a, l + 1) <= hi[a] {
                l += 1;
            }
            while l >= f && self.center_coord(a, l) > hi[a] {
                if l == 0 {
                    return None;
                }
                l -= 1;
            }
            if f > l {
                return None;
            }
            out.push((f, l));
        }
        Some(out)
    }

    fn center_coord(&self, axis: usize, i: usize) -> f64 {
        self.corner[axis] + (i as f64 + 0.5) * self.h
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self == other
    }
}

/// Visits every multi-index of the inclusive ranges in row-major order.
pub fn for_each_in_ranges(ranges: &[(usize, usize)], mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    loop {
        visit(&idx);
        let mut axis = ranges.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if idx[axis] < ranges[axis].1 {
                idx[axis] += 1;
                break;
            }
            idx[axis] = ranges[axis].0;
        }
    }
}
