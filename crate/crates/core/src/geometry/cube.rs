use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Closed axis-parallel cube given by its center and side length.
///
/// Diameter and volume are always derived from `side`; nothing else is
/// stored. Coordinates of grid-aligned cubes are dyadic rationals in all the
/// lab experiments, so `lower`/`upper` reproduce the grid corners exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCube", into = "RawCube")]
pub struct Cube {
    center: Vec<f64>,
    side: f64,
}

#[derive(Serialize, Deserialize)]
struct RawCube {
    center: Vec<f64>,
    side: f64,
}

impl TryFrom<RawCube> for Cube {
    type Error = Error;

    fn try_from(raw: RawCube) -> Result<Self> {
        Cube::new(raw.center, raw.side)
    }
}

impl From<Cube> for RawCube {
    fn from(c: Cube) -> Self {
        RawCube { center: c.center, side: c.side }
    }
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(invalid("cube dimension must be at least 1"));
        }
        if !(side > 0.0 && side.is_finite()) {
            return Err(invalid(format!("cube side must be positive and finite, got {side}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(invalid("cube center must be finite"));
        }
        Ok(Cube { center, side })
    }

    /// Cube with the given lower corner.
    pub fn from_lower(lower: &[f64], side: f64) -> Result<Self> {
        let half = side / 2.0;
        Cube::new(lower.iter().map(|l| l + half).collect(), side)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn diam(&self) -> f64 {
        self.diam_sq().sqrt()
    }

    /// Squared diameter `n·ℓ²`, used for exact comparisons.
    pub fn diam_sq(&self) -> f64 {
        self.dim() as f64 * self.side * self.side
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - self.side / 2.0
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.center[axis] + self.side / 2.0
    }

    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = (0..self.dim()).map(|i| self.lower(i)).collect();
        let hi = (0..self.dim()).map(|i| self.upper(i)).collect();
        (lo, hi)
    }

    /// Same center, side multiplied by `t`.
    pub fn dilate(&self, t: f64) -> Result<Cube> {
        if !(t > 0.0) {
            return Err(invalid(format!("dilation factor must be positive, got {t}")));
        }
        Cube::new(self.center.clone(), self.side * t)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        (0..self.dim()).all(|i| self.lower(i) <= x[i] && x[i] <= self.upper(i))
    }

    pub fn contains(&self, other: &Cube) -> bool {
        (0..self.dim()).all(|i| self.lower(i) <= other.lower(i) && other.upper(i) <= self.upper(i))
    }

    /// Closed intersection as a box `(lo, hi)`, or `None` when empty.
    pub fn intersect(&self, other: &Cube) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let a = self.lower(i).max(other.lower(i));
            let b = self.upper(i).min(other.upper(i));
            if a > b {
                return None;
            }
            lo.push(a);
            hi.push(b);
        }
        Some((lo, hi))
    }

    /// True when the open interiors do not meet (shared faces allowed).
    pub fn interiors_disjoint(&self, other: &Cube) -> bool {
        (0..self.dim()).any(|i| self.upper(i) <= other.lower(i) || other.upper(i) <= self.lower(i))
    }

    /// The `2ⁿ` congruent halves, ordered by the bitmask of upper/lower choice.
    pub fn children(&self) -> Vec<Cube> {
        let n = self.dim();
        let quarter = self.side / 4.0;
        (0..1usize << n)
            .map(|mask| {
                let c = (0..n)
                    .map(|i| if mask >> i & 1 == 1 { self.center[i] + quarter } else { self.center[i] - quarter })
                    .collect();
                Cube { center: c, side: self.side / 2.0 }
            })
            .collect()
    }

    /// Deterministic tie-break order: lexicographic by center, then side.
    pub fn tie_order(&self, other: &Cube) -> Ordering {
        for (a, b) in self.center.iter().zip(&other.center) {
            match a.total_cmp(b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.side.total_cmp(&other.side)
    }
}

/// Squared Euclidean distance from `x` to the closed cube (coordinatewise clamp).
pub fn point_cube_dist_sq(x: &[f64], q: &Cube) -> f64 {
    let mut acc = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let lo = q.lower(i);
        let hi = q.upper(i);
        let gap = if xi < lo {
            lo - xi
        } else if xi > hi {
            xi - hi
        } else {
            0.0
        };
        acc += gap * gap;
    }
    acc
}

/// Running maximum over `(value, cube)` pairs with the deterministic tie-break:
/// a larger value wins, equal values keep the cube that is smaller in
/// [`Cube::tie_order`]. The result does not depend on visiting order.
pub(crate) fn better(candidate: (f64, &Cube), incumbent: Option<(f64, &Cube)>) -> bool {
    match incumbent {
        None => true,
        Some((v, c)) => match candidate.0.total_cmp(&v) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => candidate.1.tie_order(c) == Ordering::Less,
        },
    }
}
