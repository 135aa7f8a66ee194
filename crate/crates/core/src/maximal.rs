//! Hardy–Littlewood, dyadic and family-restricted maximal operators.
//!
//! Every operator is evaluated at cell centers: `Mf(x) = max ⟨|f|⟩_Q` over the
//! cubes of a finite set that contain `x` (closed cubes). Cells covered by no
//! cube get `0`.

use std::collections::VecDeque;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cube, CubeFamily, CubePredicate, DyadicLattice, FamilyKind};
use crate::grid::{for_each_in_ranges, io, GridFunction, GridSpec, SummedTable};
use crate::norms::FunctionSpace;

/// Pointwise maximal values with a description of the operator that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalField {
    pub field: GridFunction,
    pub provenance: String,
}

impl MaximalField {
    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    /// True when `self ≥ other` at every cell.
    pub fn dominates(&self, other: &MaximalField) -> bool {
        self.values().iter().zip(other.values()).all(|(a, b)| a >= b)
    }

    pub fn write_binary<W: Write>(&self, out: W) -> Result<()> {
        io::write_binary(&self.field, &self.provenance, out)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        io::write_csv(&self.field, &self.provenance, out)
    }
}

fn field(spec: &GridSpec, values: Vec<f64>, provenance: String) -> Result<MaximalField> {
    Ok(MaximalField { field: GridFunction::new(spec.clone(), values)?, provenance })
}

fn check_family_dim(f: &GridFunction, family: &CubeFamily) -> Result<()> {
    if family.dim() != f.spec().dim() {
        return Err(Error::DimensionMismatch { expected: f.spec().dim(), got: family.dim() });
    }
    Ok(())
}

/// Brute-force maximal function over the family's enumeration.
pub fn maximal_exact(f: &GridFunction, family: &CubeFamily) -> Result<MaximalField> {
    check_family_dim(f, family)?;
    let cubes = family.enumerate_nonempty()?;
    let values = maximal_over_cubes(f, &cubes);
    field(f.spec(), values, format!("exact maximal over {} cubes", cubes.len()))
}

/// Maximal function over an explicit cube list.
pub fn maximal_over_cubes(f: &GridFunction, cubes: &[Cube]) -> Vec<f64> {
    let spec = f.spec();
    let table = f.abs().table();
    let len = spec.len();
    cubes
        .par_chunks(64)
        .fold(
            || vec![0.0f64; len],
            |mut acc, chunk| {
                for q in chunk {
                    let avg = table.cube_average(q);
                    let (lo, hi) = q.bounds();
                    if let Some(ranges) = spec.center_ranges(&lo, &hi) {
                        for_each_in_ranges(&ranges, |idx| {
                            let k = spec.flat_index(idx);
                            if avg > acc[k] {
                                acc[k] = avg;
                            }
                        });
                    }
                }
                acc
            },
        )
        .reduce(|| vec![0.0f64; len], |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect())
}

/// Maximal function over all grid-aligned cubes of `f`'s grid, in
/// `O(cells · sides · n)` by separable sliding-window maxima. Agrees exactly
/// with [`maximal_exact`] on the same family.
pub fn maximal_grid_cubes(f: &GridFunction, family: &CubeFamily) -> Result<MaximalField> {
    let spec = f.spec();
    if !family.is_grid_cubes_of(spec) {
        return Err(Error::GridMismatch("fast maximal path needs the grid-aligned cubes of the function's grid".into()));
    }
    let t = &family.truncation;
    let n = spec.dim();
    let table = f.abs().table();
    let max_k = *spec.cells().iter().min().expect("nonempty grid");
    let sides: Vec<usize> =
        (1..=max_k).filter(|&k| t.min_side <= k as f64 * t.step && k as f64 * t.step <= t.max_side).collect();
    if sides.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let per_side: Vec<Vec<f64>> = sides
        .par_iter()
        .map(|&k| {
            let positions: Vec<usize> = spec.cells().iter().map(|m| m - k + 1).collect();
            let count: usize = positions.iter().product();
            let mut averages = Vec::with_capacity(count);
            let ranges: Vec<(usize, usize)> = positions.iter().map(|&p| (0, p - 1)).collect();
            let side = k as f64 * t.step;
            let volume = side.powi(n as i32);
            let mut lo = vec![0usize; n];
            let mut hi = vec![0usize; n];
            for_each_in_ranges(&ranges, |idx| {
                // same float bounds as `Cube::from_lower`; exact cell faces skip the general path
                let mut aligned = true;
                for a in 0..n {
                    let center = (t.corner[a] + idx[a] as f64 * t.step) + side / 2.0;
                    match table.aligned_cells(a, center - side / 2.0, center + side / 2.0) {
                        Some((i0, i1)) => {
                            lo[a] = i0;
                            hi[a] = i1;
                        }
                        None => aligned = false,
                    }
                }
                if aligned {
                    averages.push(table.aligned_integral(&lo, &hi) / volume);
                } else {
                    let lower: Vec<f64> = (0..n).map(|a| t.corner[a] + idx[a] as f64 * t.step).collect();
                    let q = Cube::from_lower(&lower, side).expect("positive side");
                    averages.push(table.cube_average(&q));
                }
            });
            spread_windows(averages, positions, spec.cells(), k)
        })
        .collect();
    let mut values = vec![0.0f64; spec.len()];
    for v in per_side {
        for (a, b) in values.iter_mut().zip(v) {
            if b > *a {
                *a = b;
            }
        }
    }
    field(spec, values, format!("grid-cube maximal over {} side lengths", sides.len()))
}

/// Turns per-position window values into per-cell maxima over the windows
/// of width `k` covering each cell, one axis at a time.
fn spread_windows(mut data: Vec<f64>, mut shape: Vec<usize>, cells: &[usize], k: usize) -> Vec<f64> {
    let n = shape.len();
    for axis in 0..n {
        let m = cells[axis];
        let len_in = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut out = vec![0.0f64; outer * m * inner];
        let mut line = vec![0.0f64; len_in];
        let mut deque: VecDeque<usize> = VecDeque::with_capacity(k);
        for o in 0..outer {
            for i in 0..inner {
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[(o * len_in + j) * inner + i];
                }
                deque.clear();
                for c in 0..m {
                    if c < len_in {
                        while deque.back().is_some_and(|&b| line[b] <= line[c]) {
                            deque.pop_back();
                        }
                        deque.push_back(c);
                    }
                    while deque.front().is_some_and(|&fr| fr + k <= c) {
                        deque.pop_front();
                    }
                    out[(o * m + c) * inner + i] = line[*deque.front().expect("window nonempty")];
                }
            }
        }
        data = out;
        shape[axis] = m;
    }
    data
}

/// Dyadic maximal function over `lattice`, optionally restricted to the cubes
/// satisfying `restriction`. Generation by generation the lattice cubes tile
/// the covered cells, so the sweep costs `cells × generations`.
pub fn maximal_dyadic(f: &GridFunction, lattice: &DyadicLattice, restriction: Option<&CubePredicate>) -> Result<MaximalField> {
    let values = dyadic_sweep(f, lattice, |q| match restriction {
        Some(p) => p.eval(q),
        None => Ok(true),
    })?;
    let label = if restriction.is_some() { "restricted dyadic" } else { "dyadic" };
    field(f.spec(), values, format!("{label} maximal, lattice shift {:?}", lattice.shift()))
}

/// Maximal function over a dyadic-restricted family, honoring its side range.
pub fn maximal_family_dyadic(f: &GridFunction, family: &CubeFamily) -> Result<MaximalField> {
    let FamilyKind::DyadicRestricted { lattice, predicate } = &family.kind else {
        return Err(Error::InvalidParameter("family is not dyadic-restricted".into()));
    };
    check_family_dim(f, family)?;
    let t = &family.truncation;
    let values =
        dyadic_sweep(f, lattice, |q| Ok(t.min_side <= q.side() && q.side() <= t.max_side && predicate.eval(q)?))?;
    field(f.spec(), values, format!("family dyadic maximal, lattice shift {:?}", lattice.shift()))
}

fn dyadic_sweep(
    f: &GridFunction,
    lattice: &DyadicLattice,
    keep: impl Fn(&Cube) -> Result<bool> + Sync,
) -> Result<Vec<f64>> {
    let spec = f.spec();
    if lattice.dim() != spec.dim() || lattice.cells() != spec.cells() {
        return Err(Error::GridMismatch("lattice was built for a different grid".into()));
    }
    let table: SummedTable = f.abs().table();
    let mut values = vec![0.0f64; spec.len()];
    for g in 0..=lattice.top_generation() {
        let ids = lattice.cubes_at(g);
        let averages: Vec<Option<f64>> = ids
            .par_iter()
            .map(|id| {
                let q = lattice.cube(id);
                Ok(if keep(&q)? { Some(table.cube_average(&q)) } else { None })
            })
            .collect::<Result<_>>()?;
        for (id, avg) in ids.iter().zip(averages) {
            let (Some(avg), Some(ranges)) = (avg, lattice.cell_ranges(id)) else { continue };
            for_each_in_ranges(&ranges, |idx| {
                let k = spec.flat_index(idx);
                if avg > values[k] {
                    values[k] = avg;
                }
            });
        }
    }
    Ok(values)
}

/// `3ⁿ Σ_j M^{𝒟_j} f` over the shifted lattices: a pointwise upper bound for
/// the maximal function over grid-aligned cubes.
pub fn three_lattice_bound(f: &GridFunction, lattices: &[DyadicLattice]) -> Result<MaximalField> {
    let n = f.spec().dim();
    let expected = 3usize.pow(n as u32);
    if lattices.len() != expected {
        return Err(Error::LatticeCount { expected, got: lattices.len() });
    }
    let fields: Vec<MaximalField> =
        lattices.par_iter().map(|l| maximal_dyadic(f, l, None)).collect::<Result<_>>()?;
    let mut sum = vec![0.0f64; f.spec().len()];
    for fl in &fields {
        for (s, v) in sum.iter_mut().zip(fl.values()) {
            *s += v;
        }
    }
    let factor = expected as f64;
    let values = sum.into_iter().map(|s| s * factor).collect();
    field(f.spec(), values, format!("3^n sum of {expected} shifted dyadic maximal functions"))
}

/// A maximal operator variant with its cube set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operator", rename_all = "snake_case")]
pub enum MaximalOperator {
    Exact { family: CubeFamily },
    GridCubes { family: CubeFamily },
    Dyadic { lattice: DyadicLattice, restriction: Option<CubePredicate> },
    /// `M^ℱ` for a dyadic-restricted family, honoring its side range.
    FamilyDyadic { family: CubeFamily },
    ThreeLattice { lattices: Vec<DyadicLattice> },
}

impl MaximalOperator {
    pub fn apply(&self, f: &GridFunction) -> Result<MaximalField> {
        match self {
            MaximalOperator::Exact { family } => maximal_exact(f, family),
            MaximalOperator::GridCubes { family } => maximal_grid_cubes(f, family),
            MaximalOperator::Dyadic { lattice, restriction } => maximal_dyadic(f, lattice, restriction.as_ref()),
            MaximalOperator::FamilyDyadic { family } => maximal_family_dyadic(f, family),
            MaximalOperator::ThreeLattice { lattices } => three_lattice_bound(f, lattices),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorEstimate {
    /// `max ‖Tf‖/‖f‖` over the corpus, a lower bound for the operator norm.
    pub value: f64,
    /// Corpus index of the maximizing function.
    pub argmax: usize,
    /// Corpus members skipped for having zero norm.
    pub skipped: usize,
}

/// Empirical operator norm of `op` on `space` over a test corpus.
pub fn operator_norm_estimate(op: &MaximalOperator, space: &FunctionSpace, corpus: &[GridFunction]) -> Result<OperatorEstimate> {
    let ratios: Vec<Option<f64>> = corpus
        .par_iter()
        .map(|f| {
            let denom = space.norm(f)?;
            if denom == 0.0 {
                return Ok(None);
            }
            Ok(Some(space.norm(&op.apply(f)?.field)? / denom))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, usize)> = None;
    let mut skipped = 0;
    for (i, r) in ratios.into_iter().enumerate() {
        match r {
            None => skipped += 1,
            Some(v) if best.is_none_or(|(b, _)| v > b) => best = Some((v, i)),
            Some(_) => {}
        }
    }
    let (value, argmax) = best.ok_or(Error::EmptyCorpus)?;
    Ok(OperatorEstimate { value, argmax, skipped })
}
