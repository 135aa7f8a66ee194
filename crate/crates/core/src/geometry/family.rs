use serde::{Deserialize, Serialize};

use super::cube::Cube;
use super::lattice::DyadicLattice;
use super::points::{check_whitney_radii, dist_sq_cube_to_set, whitney_member_sq, PointSet};
use crate::error::{invalid, Error, Result};
use crate::grid::GridSpec;

/// Serializable membership predicate on cubes, used to restrict dyadic
/// families and dyadic maximal operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CubePredicate {
    All,
    /// `dist(R, S) ≤ α·diam R`.
    Near { reference: PointSet, alpha: f64 },
    /// `dist(R, S) > α·diam R`, the exact complement of `Near`.
    Far { reference: PointSet, alpha: f64 },
    /// `r1·diam R ≤ dist(R, S) ≤ r2·diam R`.
    Whitney { reference: PointSet, r1: f64, r2: f64 },
    SideRange { min: f64, max: f64 },
    /// Cube contained in the closed box `[corner, corner + extent]`.
    WithinBox { corner: Vec<f64>, extent: Vec<f64> },
    And { all: Vec<CubePredicate> },
    Not { inner: Box<CubePredicate> },
}

impl CubePredicate {
    fn near(q: &Cube, reference: &PointSet, alpha: f64) -> Result<bool> {
        let d2 = dist_sq_cube_to_set(q, reference)?;
        Ok(d2 <= alpha * alpha * q.diam_sq())
    }

    pub fn eval(&self, q: &Cube) -> Result<bool> {
        Ok(match self {
            CubePredicate::All => true,
            CubePredicate::Near { reference, alpha } => Self::near(q, reference, *alpha)?,
            CubePredicate::Far { reference, alpha } => !Self::near(q, reference, *alpha)?,
            CubePredicate::Whitney { reference, r1, r2 } => {
                whitney_member_sq(dist_sq_cube_to_set(q, reference)?, q.diam_sq(), *r1, *r2)
            }
            CubePredicate::SideRange { min, max } => *min <= q.side() && q.side() <= *max,
            CubePredicate::WithinBox { corner, extent } => {
                (0..q.dim()).all(|i| corner[i] <= q.lower(i) && q.upper(i) <= corner[i] + extent[i])
            }
            CubePredicate::And { all } => {
                for p in all {
                    if !p.eval(q)? {
                        return Ok(false);
                    }
                }
                true
            }
            CubePredicate::Not { inner } => !inner.eval(q)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CubePredicate::Near { alpha, reference } | CubePredicate::Far { alpha, reference } => {
                if !(*alpha >= 0.0) {
                    return Err(invalid(format!("alpha must be nonnegative, got {alpha}")));
                }
                if reference.is_empty() {
                    return Err(Error::EmptyReferenceSet);
                }
            }
            CubePredicate::Whitney { reference, r1, r2 } => {
                check_whitney_radii(*r1, *r2)?;
                if reference.is_empty() {
                    return Err(Error::EmptyReferenceSet);
                }
            }
            CubePredicate::And { all } => all.iter().try_for_each(CubePredicate::validate)?,
            CubePredicate::Not { inner } => inner.validate()?,
            _ => {}
        }
        Ok(())
    }
}

/// Finite window in which a family is enumerated.
///
/// Grid-aligned kinds place cube corners on `corner + step·ℤⁿ` with sides in
/// `step·ℕ`, inside the closed box. Centered kinds use the side ladder
/// `step·2^{k/2}`, `k ≥ 0`, and centers inside the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub corner: Vec<f64>,
    pub extent: Vec<f64>,
    pub step: f64,
    pub min_side: f64,
    pub max_side: f64,
}

impl Truncation {
    /// Whole grid box, grid step, sides from one cell to the longest extent.
    pub fn for_grid(spec: &GridSpec) -> Self {
        let extent: Vec<f64> = (0..spec.dim()).map(|i| spec.extent(i)).collect();
        let max_side = extent.iter().cloned().fold(0.0, f64::max);
        Truncation { corner: spec.corner().to_vec(), extent, step: spec.h(), min_side: spec.h(), max_side }
    }

    pub fn with_sides(mut self, min_side: f64, max_side: f64) -> Self {
        self.min_side = min_side;
        self.max_side = max_side;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.corner.len() != self.extent.len() || self.corner.is_empty() {
            return Err(invalid("truncation box corner/extent dimension mismatch"));
        }
        if !(self.step > 0.0) || self.extent.iter().any(|e| !(*e > 0.0)) {
            return Err(invalid("truncation needs positive step and extents"));
        }
        if !(self.min_side > 0.0 && self.min_side <= self.max_side) {
            return Err(invalid(format!("truncation side range [{}, {}] is invalid", self.min_side, self.max_side)));
        }
        Ok(())
    }

    fn cells_per_axis(&self) -> Vec<i64> {
        self.extent.iter().map(|e| (e / self.step).round() as i64).collect()
    }

    fn in_side_range(&self, side: f64) -> bool {
        self.min_side <= side && side <= self.max_side
    }

    fn grid_sides(&self) -> Vec<i64> {
        let max_cells = self.cells_per_axis().into_iter().min().unwrap_or(0);
        (1..=max_cells).filter(|&k| self.in_side_range(k as f64 * self.step)).collect()
    }

    fn ladder(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0i32;
        loop {
            let s = self.step * 2f64.powi(k / 2) * if k % 2 == 1 { std::f64::consts::SQRT_2 } else { 1.0 };
            if s > self.max_side {
                return out;
            }
            if s >= self.min_side {
                out.push(s);
            }
            k += 1;
        }
    }

    fn point_inside(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(i, &c)| self.corner[i] <= c && c <= self.corner[i] + self.extent[i])
    }

    /// Grid-aligned cubes in the box (side ascending, then lexicographic lower corner).
    fn grid_cubes(&self) -> Vec<Cube> {
        let n = self.corner.len();
        let cells = self.cells_per_axis();
        let mut out = Vec::new();
        for k in self.grid_sides() {
            let side = k as f64 * self.step;
            let mut idx = vec![0i64; n];
            'outer: loop {
                let lower: Vec<f64> = (0..n).map(|i| self.corner[i] + idx[i] as f64 * self.step).collect();
                out.push(Cube::from_lower(&lower, side).expect("positive side"));
                let mut axis = n;
                loop {
                    if axis == 0 {
                        break 'outer;
                    }
                    axis -= 1;
                    if idx[axis] + k < cells[axis] {
                        idx[axis] += 1;
                        break;
                    }
                    idx[axis] = 0;
                }
            }
        }
        out
    }
}

/// Kind of a cube family; each kind is a membership predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// Every grid-aligned cube of the truncation box.
    AllCubes,
    /// Cubes centered at the given points (side ladder).
    CenteredAt { points: PointSet },
    /// Grid-aligned cubes in the Whitney band `𝒲_{r1,r2}` of the reference set.
    Whitney { reference: PointSet, r1: f64, r2: f64 },
    /// Cubes of a dyadic lattice meeting the grid that satisfy the predicate.
    DyadicRestricted { lattice: DyadicLattice, predicate: CubePredicate },
}

/// Predicate-defined family of cubes with an explicit truncation policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeFamily {
    pub kind: FamilyKind,
    pub truncation: Truncation,
}

impl CubeFamily {
    pub fn new(kind: FamilyKind, truncation: Truncation) -> Result<Self> {
        truncation.validate()?;
        let n = truncation.corner.len();
        match &kind {
            FamilyKind::AllCubes => {}
            FamilyKind::CenteredAt { points } => {
                if points.is_empty() {
                    return Err(Error::EmptyReferenceSet);
                }
                if points.dim() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: points.dim() });
                }
            }
            FamilyKind::Whitney { reference, r1, r2 } => {
                check_whitney_radii(*r1, *r2)?;
                if reference.is_empty() {
                    return Err(Error::EmptyReferenceSet);
                }
                if reference.dim() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: reference.dim() });
                }
            }
            FamilyKind::DyadicRestricted { lattice, predicate } => {
                if lattice.dim() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: lattice.dim() });
                }
                predicate.validate()?;
            }
        }
        Ok(CubeFamily { kind, truncation })
    }

    pub fn all_cubes(truncation: Truncation) -> Result<Self> {
        Self::new(FamilyKind::AllCubes, truncation)
    }

    pub fn centered_at(points: PointSet, truncation: Truncation) -> Result<Self> {
        Self::new(FamilyKind::CenteredAt { points }, truncation)
    }

    pub fn whitney(reference: PointSet, r1: f64, r2: f64, truncation: Truncation) -> Result<Self> {
        Self::new(FamilyKind::Whitney { reference, r1, r2 }, truncation)
    }

    pub fn dyadic(lattice: DyadicLattice, predicate: CubePredicate, truncation: Truncation) -> Result<Self> {
        Self::new(FamilyKind::DyadicRestricted { lattice, predicate }, truncation)
    }

    pub fn dim(&self) -> usize {
        self.truncation.corner.len()
    }

    /// True when the family is every grid-aligned cube of `spec`'s box.
    pub fn is_grid_cubes_of(&self, spec: &GridSpec) -> bool {
        let t = &self.truncation;
        matches!(self.kind, FamilyKind::AllCubes)
            && t.step == spec.h()
            && t.corner == spec.corner()
            && (0..spec.dim()).all(|i| (t.extent[i] / t.step).round() as usize == spec.cells()[i])
    }

    /// Deterministic enumeration; every returned cube satisfies the kind's predicate.
    pub fn enumerate(&self) -> Result<Vec<Cube>> {
        let t = &self.truncation;
        match &self.kind {
            FamilyKind::AllCubes => Ok(t.grid_cubes()),
            FamilyKind::CenteredAt { points } => {
                let ladder = t.ladder();
                let mut out = Vec::new();
                for p in points.iter().filter(|p| t.point_inside(p)) {
                    for &s in &ladder {
                        out.push(Cube::new(p.to_vec(), s)?);
                    }
                }
                Ok(out)
            }
            FamilyKind::Whitney { reference, r1, r2 } => {
                let mut out = Vec::new();
                for q in t.grid_cubes() {
                    if whitney_member_sq(dist_sq_cube_to_set(&q, reference)?, q.diam_sq(), *r1, *r2) {
                        out.push(q);
                    }
                }
                Ok(out)
            }
            FamilyKind::DyadicRestricted { lattice, predicate } => {
                let mut out = Vec::new();
                for g in 0..=lattice.top_generation() {
                    if !t.in_side_range(lattice.side(g)) {
                        continue;
                    }
                    for id in lattice.cubes_at(g) {
                        let q = lattice.cube(&id);
                        if predicate.eval(&q)? {
                            out.push(q);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Enumeration that fails on an empty result.
    pub fn enumerate_nonempty(&self) -> Result<Vec<Cube>> {
        let cubes = self.enumerate()?;
        if cubes.is_empty() {
            return Err(Error::EmptyFamily);
        }
        Ok(cubes)
    }
}
