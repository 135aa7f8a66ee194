use serde::{Deserialize, Serialize};

use super::cube::Cube;
use crate::error::{invalid, Result};
use crate::grid::GridSpec;

/// One of the `3ⁿ` shifted dyadic lattices over a grid box.
///
/// Generation `g` has side `h·2^(top−g)`; generation `top` is the cell scale.
/// Along each axis the interval endpoints at side `s` sit at
/// `corner + s·(m + σ_g t/3)` where `t ∈ {0,1,2}` is the shift digit and
/// `σ_g = (−1)^g`. The alternating sign makes every generation nest exactly in
/// the previous one. All bookkeeping is done in integer units of `h/3`, so
/// containment and nesting checks are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicLattice {
    shift: Vec<u8>,
    corner: Vec<f64>,
    cells: Vec<usize>,
    h: f64,
    top: u32,
}

/// Integer address of a lattice cube: generation and per-axis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeCubeId {
    pub generation: u32,
    pub index: Vec<i64>,
}

fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

impl DyadicLattice {
    /// Lattice with shift digits `shift` over the box of `spec`. Each axis of
    /// the box must hold a power-of-two number of cells.
    pub fn new(shift: Vec<u8>, spec: &GridSpec) -> Result<Self> {
        if shift.len() != spec.dim() {
            return Err(invalid(format!("shift has {} digits, grid dimension is {}", shift.len(), spec.dim())));
        }
        if shift.iter().any(|&t| t > 2) {
            return Err(invalid("shift digits must be 0, 1 or 2"));
        }
        let mut k_max = 0u32;
        for &m in spec.cells() {
            if !m.is_power_of_two() {
                return Err(invalid(format!("box side must be a power-of-two multiple of the resolution, got {m} cells")));
            }
            k_max = k_max.max(m.trailing_zeros());
        }
        Ok(DyadicLattice {
            shift,
            corner: spec.corner().to_vec(),
            cells: spec.cells().to_vec(),
            h: spec.h(),
            // root side 4L guarantees one root cube containing the box for every shift
            top: k_max + 2,
        })
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[u8] {
        &self.shift
    }

    /// Position of this lattice in the lexicographic order of shift vectors.
    pub fn shift_index(&self) -> usize {
        self.shift.iter().fold(0, |acc, &t| acc * 3 + t as usize)
    }

    pub fn top_generation(&self) -> u32 {
        self.top
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn side(&self, generation: u32) -> f64 {
        self.h * 2f64.powi((self.top - generation) as i32)
    }

    fn sign(generation: u32) -> i64 {
        if generation.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Base length and offset in thirds of `h` for one axis at a generation.
    fn thirds(&self, generation: u32, axis: usize) -> (i64, i64) {
        let e = self.top - generation;
        let base = 3i64 << e;
        let off = Self::sign(generation) * self.shift[axis] as i64 * (1i64 << e);
        (base, off)
    }

    /// Bounds of a lattice interval in thirds of `h`, relative to the corner.
    pub fn interval_thirds(&self, generation: u32, axis: usize, m: i64) -> (i64, i64) {
        let (base, off) = self.thirds(generation, axis);
        (base * m + off, base * (m + 1) + off)
    }

    pub fn cube(&self, id: &LatticeCubeId) -> Cube {
        let s = self.side(id.generation);
        let center = id
            .index
            .iter()
            .enumerate()
            .map(|(axis, &m)| {
                let (lo, hi) = self.interval_thirds(id.generation, axis, m);
                self.corner[axis] + (lo + hi) as f64 * self.h / 6.0
            })
            .collect();
        Cube::new(center, s).expect("lattice cube is valid")
    }

    /// Lattice cube of a generation containing the center of a grid cell.
    /// Cell centers never lie on lattice boundaries.
    pub fn containing_cell(&self, generation: u32, cell: &[usize]) -> LatticeCubeId {
        let index = cell
            .iter()
            .enumerate()
            .map(|(axis, &i)| {
                let (base, off) = self.thirds(generation, axis);
                // in sixths: center at 6i+3, interval m starts at 2(base·m + off)
                floor_div(6 * i as i64 + 3 - 2 * off, 2 * base)
            })
            .collect();
        LatticeCubeId { generation, index }
    }

    pub fn parent(&self, id: &LatticeCubeId) -> Option<LatticeCubeId> {
        if id.generation == 0 {
            return None;
        }
        let g = id.generation - 1;
        let index = id
            .index
            .iter()
            .enumerate()
            .map(|(axis, &m)| floor_div(m - Self::sign(g) * self.shift[axis] as i64, 2))
            .collect();
        Some(LatticeCubeId { generation: g, index })
    }

    pub fn children(&self, id: &LatticeCubeId) -> Vec<LatticeCubeId> {
        if id.generation >= self.top {
            return Vec::new();
        }
        let n = self.dim();
        let s = Self::sign(id.generation);
        (0..1usize << n)
            .map(|mask| LatticeCubeId {
                generation: id.generation + 1,
                index: (0..n)
                    .map(|a| 2 * id.index[a] + s * self.shift[a] as i64 + (mask >> a & 1) as i64)
                    .collect(),
            })
            .collect()
    }

    /// Per-axis index ranges of the cubes of a generation meeting some cell center.
    fn index_ranges(&self, generation: u32) -> Vec<(i64, i64)> {
        (0..self.dim())
            .map(|axis| {
                let mut first = vec![0usize; self.dim()];
                let mut last = vec![0usize; self.dim()];
                first[axis] = 0;
                last[axis] = self.cells[axis] - 1;
                (
                    self.containing_cell(generation, &first).index[axis],
                    self.containing_cell(generation, &last).index[axis],
                )
            })
            .collect()
    }

    /// Cubes of one generation containing at least one cell center, in
    /// lexicographic index order. They tile the covered region.
    pub fn cubes_at(&self, generation: u32) -> Vec<LatticeCubeId> {
        let ranges = self.index_ranges(generation);
        let mut out = Vec::new();
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            out.push(LatticeCubeId { generation, index: idx.clone() });
            let mut axis = self.dim();
            loop {
                if axis == 0 {
                    return out;
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

    /// Per-axis inclusive range of grid cells whose centers lie in the cube.
    pub fn cell_ranges(&self, id: &LatticeCubeId) -> Option<Vec<(usize, usize)>> {
        let mut out = Vec::with_capacity(self.dim());
        for (axis, &m) in id.index.iter().enumerate() {
            let (lo, hi) = self.interval_thirds(id.generation, axis, m);
            // 6i+3 > 2lo and 6i+3 < 2hi
            let first = floor_div(2 * lo - 3, 6) + 1;
            let last = -floor_div(-(2 * hi - 3), 6) - 1;
            let first = first.max(0);
            let last = last.min(self.cells[axis] as i64 - 1);
            if first > last {
                return None;
            }
            out.push((first as usize, last as usize));
        }
        Some(out)
    }

    /// Smallest lattice cube containing the grid-aligned closed cube with
    /// lower cell corner `lower` (in cells) and side `side_cells`.
    pub fn smallest_containing_grid_cube(&self, lower: &[i64], side_cells: i64) -> Option<LatticeCubeId> {
        for generation in (0..=self.top).rev() {
            let mut index = Vec::with_capacity(self.dim());
            let mut ok = true;
            for (axis, &l) in lower.iter().enumerate() {
                let (base, off) = self.thirds(generation, axis);
                let a = 3 * l;
                let b = 3 * (l + side_cells);
                let m = floor_div(a - off, base);
                if b > base * (m + 1) + off {
                    ok = false;
                    break;
                }
                index.push(m);
            }
            if ok {
                return Some(LatticeCubeId { generation, index });
            }
        }
        None
    }
}

/// The `3ⁿ` lattices with shift digits `t ∈ {0,1,2}ⁿ`, in lexicographic order.
///
/// Every grid-aligned cube `Q` of the box lies in a cube `R` of one of them
/// with `ℓ_R ≤ 3ℓ_Q`: at the side `s ∈ (3ℓ_Q/2, 3ℓ_Q]` the three shifts place
/// interval endpoints every `s/3`, and an interval shorter than `2s/3` blocks
/// at most two of them per axis.
pub fn build_shifted_lattices(spec: &GridSpec) -> Result<Vec<DyadicLattice>> {
    let n = spec.dim();
    let count = 3usize.pow(n as u32);
    (0..count)
        .map(|j| {
            let mut t = vec![0u8; n];
            let mut r = j;
            for a in (0..n).rev() {
                t[a] = (r % 3) as u8;
                r /= 3;
            }
            DyadicLattice::new(t, spec)
        })
        .collect()
}
