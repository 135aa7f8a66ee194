//! Summed tables (n-dimensional integral images) in double-double precision.
//!
//! Prefix sums are stored as unevaluated pairs `hi + lo`, so the
//! inclusion–exclusion that recovers a small block deep inside a large grid
//! does not lose the block's digits to cancellation.

use super::spec::GridSpec;
use crate::geometry::Cube;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl Dd {
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    fn scale(self, k: f64) -> Dd {
        // exact enough for block weights; the product error is relative, not cancelling
        let hi = self.hi * k;
        let err = self.hi.mul_add(k, -hi);
        let (h, l) = two_sum(hi, err + self.lo * k);
        Dd { hi: h, lo: l }
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Prefix-sum table of cell values with constant-time box sums.
#[derive(Debug, Clone)]
pub struct SummedTable {
    spec: GridSpec,
    dims: Vec<usize>,
    strides: Vec<usize>,
    data: Vec<Dd>,
}

impl SummedTable {
    /// Builds the table from row-major cell values matching `spec`.
    pub fn new(spec: &GridSpec, values: &[f64]) -> Self {
        assert_eq!(values.len(), spec.len(), "value count does not match grid");
        let n = spec.dim();
        let dims: Vec<usize> = spec.cells().iter().map(|m| m + 1).collect();
        let mut strides = vec![1usize; n];
        for a in (0..n.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        let total: usize = dims.iter().product();
        let mut data = vec![Dd::default(); total];
        for (flat, &v) in values.iter().enumerate() {
            let idx = spec.multi_index(flat);
            let t: usize = idx.iter().zip(&strides).map(|(&i, &s)| (i + 1) * s).sum();
            data[t] = Dd { hi: v, lo: 0.0 };
        }
        // one running-sum pass per axis
        for a in 0..n {
            let stride = strides[a];
            for t in 0..total {
                let ia = (t / stride) % dims[a];
                if ia >= 1 {
                    let prev = data[t - stride];
                    data[t] = data[t].add(prev);
                }
            }
        }
        SummedTable { spec: spec.clone(), dims, strides, data }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Sum of cell values over `lo ≤ idx < hi` (cell indices).
    pub fn block_sum(&self, lo: &[usize], hi: &[usize]) -> f64 {
        self.block_sum_dd(lo, hi).value()
    }

    fn block_sum_dd(&self, lo: &[usize], hi: &[usize]) -> Dd {
        let n = self.dims.len();
        if (0..n).any(|a| lo[a] >= hi[a]) {
            return Dd::default();
        }
        let mut acc = Dd::default();
        for mask in 0..1usize << n {
            let mut t = 0;
            let mut lows = 0;
            for a in 0..n {
                if mask >> a & 1 == 1 {
                    t += lo[a] * self.strides[a];
                    lows += 1;
                } else {
                    t += hi[a] * self.strides[a];
                }
            }
            let v = self.data[t];
            acc = acc.add(if lows % 2 == 0 { v } else { v.neg() });
        }
        acc
    }

    /// Exact integral of the piecewise-constant function over the closed box
    /// `[lo, hi]`; parts outside the grid box contribute zero.
    pub fn box_integral(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let n = self.dims.len();
        let mut segs: Vec<Vec<(usize, usize, f64)>> = Vec::with_capacity(n);
        for a in 0..n {
            match axis_segments(&self.spec, a, lo[a], hi[a]) {
                Some(s) => segs.push(s),
                None => return 0.0,
            }
        }
        let mut choice = vec![0usize; n];
        let mut blo = vec![0usize; n];
        let mut bhi = vec![0usize; n];
        let mut acc = Dd::default();
        loop {
            let mut weight = 1.0;
            for a in 0..n {
                let (s, e, f) = segs[a][choice[a]];
                blo[a] = s;
                bhi[a] = e;
                weight *= f;
            }
            if weight != 0.0 {
                acc = acc.add(self.block_sum_dd(&blo, &bhi).scale(weight));
            }
            let mut axis = n;
            loop {
                if axis == 0 {
                    return acc.value() * self.spec.cell_volume();
                }
                axis -= 1;
                choice[axis] += 1;
                if choice[axis] < segs[axis].len() {
                    break;
                }
                choice[axis] = 0;
            }
        }
    }

    /// Cell range `[i0, i1)` covered by `[lo, hi]` along `axis` when both ends
    /// fall exactly on cell faces inside the box.
    pub fn aligned_cells(&self, axis: usize, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let m = self.spec.cells()[axis] as f64;
        let u0 = (lo - self.spec.corner()[axis]) / self.spec.h();
        let u1 = (hi - self.spec.corner()[axis]) / self.spec.h();
        let exact = |u: f64| u >= 0.0 && u <= m && u.fract() == 0.0;
        (exact(u0) && exact(u1) && u0 < u1).then_some((u0 as usize, u1 as usize))
    }

    /// [`Self::box_integral`] of a box whose faces are the cell faces `lo`
    /// and `hi`, bit for bit, without the per-axis segment bookkeeping.
    pub fn aligned_integral(&self, lo: &[usize], hi: &[usize]) -> f64 {
        Dd::default().add(self.block_sum_dd(lo, hi).scale(1.0)).value() * self.spec.cell_volume()
    }

    pub fn cube_integral(&self, q: &Cube) -> f64 {
        let (lo, hi) = q.bounds();
        self.box_integral(&lo, &hi)
    }

    /// `∫_Q f / |Q|` with the full (unclipped) cube volume.
    pub fn cube_average(&self, q: &Cube) -> f64 {
        self.cube_integral(q) / q.volume()
    }
}

/// Splits `[lo, hi] ∩ box` along one axis into runs of cells with a common
/// overlap fraction: partial first cell, full middle cells, partial last cell.
fn axis_segments(spec: &GridSpec, axis: usize, lo: f64, hi: f64) -> Option<Vec<(usize, usize, f64)>> {
    let m = spec.cells()[axis];
    let u0 = ((lo - spec.corner()[axis]) / spec.h()).max(0.0);
    let u1 = ((hi - spec.corner()[axis]) / spec.h()).min(m as f64);
    if !(u0 < u1) {
        return None;
    }
    let i0 = (u0.floor() as usize).min(m - 1);
    let i1 = (u1.ceil() as usize).clamp(i0 + 1, m);
    if i1 - i0 == 1 {
        return Some(vec![(i0, i1, u1 - u0)]);
    }
    let mut segs: Vec<(usize, usize, f64)> = Vec::with_capacity(3);
    let mut push = |s: usize, e: usize, f: f64| {
        if s >= e {
            return;
        }
        match segs.last_mut() {
            Some(last) if last.2 == f && last.1 == s => last.1 = e,
            _ => segs.push((s, e, f)),
        }
    };
    push(i0, i0 + 1, (i0 + 1) as f64 - u0);
    push(i0 + 1, i1 - 1, 1.0);
    push(i1 - 1, i1, u1 - (i1 - 1) as f64);
    Some(segs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_sums_exact_on_integers() {
        let spec = GridSpec::new(vec![0.0, 0.0], 1.0, vec![5, 7]).unwrap();
        let values: Vec<f64> = (0..35).map(|i| ((i * 37) % 11) as f64 - 3.0).collect();
        let t = SummedTable::new(&spec, &values);
        for lo0 in 0..5 {
            for hi0 in lo0 + 1..=5 {
                for lo1 in 0..7 {
                    for hi1 in lo1 + 1..=7 {
                        let mut direct = 0.0;
                        for i in lo0..hi0 {
                            for j in lo1..hi1 {
                                direct += values[i * 7 + j];
                            }
                        }
                        assert_eq!(t.block_sum(&[lo0, lo1], &[hi0, hi1]), direct);
                    }
                }
            }
        }
    }

    #[test]
    fn aligned_path_matches_general_path() {
        let spec = GridSpec::new(vec![-1.0, 0.5], 0.125, vec![16, 8]).unwrap();
        let values: Vec<f64> = (0..128).map(|i| ((i * 7919) % 97) as f64 / 13.0 - 2.0).collect();
        let t = SummedTable::new(&spec, &values);
        for (i0, i1, j0, j1) in [(0, 16, 0, 8), (3, 7, 2, 3), (15, 16, 7, 8)] {
            let lo = [-1.0 + i0 as f64 * 0.125, 0.5 + j0 as f64 * 0.125];
            let hi = [-1.0 + i1 as f64 * 0.125, 0.5 + j1 as f64 * 0.125];
            assert_eq!(t.aligned_cells(0, lo[0], hi[0]), Some((i0, i1)));
            assert_eq!(t.aligned_integral(&[i0, j0], &[i1, j1]).to_bits(), t.box_integral(&lo, &hi).to_bits());
        }
        assert_eq!(t.aligned_cells(0, -1.01, 0.0), None);
    }

    #[test]
    fn segments_merge_full_cells() {
        let spec = GridSpec::new(vec![0.0], 1.0, vec![10]).unwrap();
        assert_eq!(axis_segments(&spec, 0, 2.0, 5.0), Some(vec![(2, 5, 1.0)]));
        assert_eq!(axis_segments(&spec, 0, 2.5, 2.75), Some(vec![(2, 3, 0.25)]));
        assert_eq!(axis_segments(&spec, 0, 2.5, 4.0), Some(vec![(2, 3, 0.5), (3, 4, 1.0)]));
        assert_eq!(axis_segments(&spec, 0, 11.0, 12.0), None);
        assert_eq!(axis_segments(&spec, 0, -3.0, 0.5), Some(vec![(0, 1, 0.5)]));
    }
}
