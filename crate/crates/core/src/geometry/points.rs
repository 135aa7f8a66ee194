use serde::{Deserialize, Serialize};

use super::cube::{point_cube_dist_sq, Cube};
use crate::error::{invalid, Error, Result};

/// Relative slack for the pairwise lacunary comparison. Consecutive points of
/// `{±γ^j}` sit exactly on the boundary `|x_{j+1}| = ν(|x_{j+1}| - |x_j|)`, and
/// rounding in `γ^j` moves them across it by an ulp or two.
pub const RCOND_REL_SLACK: f64 = 8.0 * f64::EPSILON;

/// Finite set of distinct points in ℝⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for PointSet {
    type Error = Error;

    fn try_from(points: Vec<Vec<f64>>) -> Result<Self> {
        PointSet::new(points)
    }
}

impl From<PointSet> for Vec<Vec<f64>> {
    fn from(p: PointSet) -> Self {
        p.points
    }
}

impl PointSet {
    /// Validates equal dimensions, finite coordinates and distinctness.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(invalid("point coordinates must be finite"));
            }
        }
        if !points.is_empty() && dim == 0 {
            return Err(invalid("points must have dimension at least 1"));
        }
        // sort indices lexicographically so duplicates become neighbours
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            points[a]
                .iter()
                .zip(&points[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                let (a, b) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
                return Err(Error::DuplicatePoint(a, b));
            }
        }
        Ok(PointSet { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.iter().map(Vec::as_slice)
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Squared distance from the cube to the nearest point of `set`.
pub fn dist_sq_cube_to_set(q: &Cube, set: &PointSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptyReferenceSet);
    }
    if set.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), got: set.dim() });
    }
    Ok(set.iter().map(|x| point_cube_dist_sq(x, q)).fold(f64::INFINITY, f64::min))
}

/// `dist(Q, S) = inf_{x∈Q, ξ∈S} |x − ξ|`.
pub fn dist_cube_to_set(q: &Cube, set: &PointSet) -> Result<f64> {
    dist_sq_cube_to_set(q, set).map(f64::sqrt)
}

pub(crate) fn check_whitney_radii(r1: f64, r2: f64) -> Result<()> {
    // r1 == r2 is admitted: the band 𝒲_{N/√n, N} degenerates to it when n = 1
    if !(r1 > 0.0 && r1 <= r2 && r2.is_finite()) {
        return Err(invalid(format!("Whitney radii need 0 < r1 <= r2 < inf, got r1={r1}, r2={r2}")));
    }
    Ok(())
}

/// Whitney band membership `r1·diam Q ≤ dist(Q,S) ≤ r2·diam Q`.
///
/// Compared in squared form, which keeps the comparison exact for the dyadic
/// coordinates used throughout the lab.
pub fn whitney_member(q: &Cube, set: &PointSet, r1: f64, r2: f64) -> Result<bool> {
    check_whitney_radii(r1, r2)?;
    let d2 = dist_sq_cube_to_set(q, set)?;
    Ok(whitney_member_sq(d2, q.diam_sq(), r1, r2))
}

#[inline]
pub(crate) fn whitney_member_sq(dist_sq: f64, diam_sq: f64, r1: f64, r2: f64) -> bool {
    r1 * r1 * diam_sq <= dist_sq && dist_sq <= r2 * r2 * diam_sq
}

/// Outcome of the pairwise lacunary check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcondCheck {
    pub holds: bool,
    /// First violating pair `(i, j)`, `i < j`, in index order.
    pub witness: Option<(usize, usize)>,
}

/// Checks `max(|x_i|, |x_j|) ≤ ν |x_i − x_j|` for all `i ≠ j`.
pub fn check_rcond(set: &PointSet, nu: f64) -> Result<RcondCheck> {
    if !(nu > 1.0) {
        return Err(invalid(format!("nu must exceed 1, got {nu}")));
    }
    let norms: Vec<f64> = set.iter().map(norm).collect();
    let pts = set.points();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let lhs = norms[i].max(norms[j]);
            if lhs > nu * dist(&pts[i], &pts[j]) * (1.0 + RCOND_REL_SLACK) {
                return Ok(RcondCheck { holds: false, witness: Some((i, j)) });
            }
        }
    }
    Ok(RcondCheck { holds: true, witness: None })
}

/// Largest pairwise ratio `max(|x_i|,|x_j|)/|x_i − x_j|`; the smallest ν for
/// which the set is lacunary. Returns 1 for fewer than two points.
pub fn effective_nu(set: &PointSet) -> f64 {
    let norms: Vec<f64> = set.iter().map(norm).collect();
    let pts = set.points();
    let mut best = 1.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(norms[i].max(norms[j]) / dist(&pts[i], &pts[j]));
        }
    }
    best
}

/// Ratio `γ = ν/(ν−1)` of the geometric lacunary sequence.
pub fn lacunary_ratio(nu: f64) -> Result<f64> {
    if !(nu > 1.0 && nu.is_finite()) {
        return Err(invalid(format!("nu must exceed 1, got {nu}")));
    }
    Ok(nu / (nu - 1.0))
}

/// `{0} ∪ {±γ^j : jmin ≤ j ≤ jmax}` on the real line, sorted ascending.
pub fn generate_lacunary_1d(nu: f64, jmin: i32, jmax: i32) -> Result<PointSet> {
    if jmin > jmax {
        return Err(invalid(format!("jmin={jmin} exceeds jmax={jmax}")));
    }
    let gamma = lacunary_ratio(nu)?;
    let mut pts: Vec<f64> = vec![0.0];
    for j in jmin..=jmax {
        let r = gamma.powi(j);
        pts.push(r);
        pts.push(-r);
    }
    pts.sort_by(f64::total_cmp);
    PointSet::new(pts.into_iter().map(|x| vec![x]).collect())
}

/// Lacunary set built from spheres of radius `γ^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePacking {
    pub points: PointSet,
    /// Points placed on each sphere, indexed from `jmin`.
    pub per_sphere: Vec<usize>,
    /// Smallest ν for which the generated set is lacunary.
    pub effective_nu: f64,
}

/// Fixed unit-sphere mesh the greedy packing draws candidates from.
fn sphere_mesh(n: usize, resolution: usize) -> Result<Vec<Vec<f64>>> {
    match n {
        2 => Ok((0..resolution)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / resolution as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        3 => {
            // Fibonacci spiral
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            Ok((0..resolution)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / resolution as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect())
        }
        _ => Err(invalid(format!("sphere packing supports n in {{2, 3}}, got {n}"))),
    }
}

/// Greedy farthest-point packing of each sphere `|y| = γ^j`.
///
/// Starting from the first mesh point, the candidate farthest from the points
/// already chosen is inserted while its distance is at least `γ^j/ν`.
/// `mesh_resolution` is the number of candidate directions.
pub fn generate_lacunary_sphere(nu: f64, n: usize, jmin: i32, jmax: i32, mesh_resolution: usize) -> Result<SpherePacking> {
    if n < 2 {
        return Err(invalid("sphere packing needs n >= 2"));
    }
    if jmin > jmax {
        return Err(invalid(format!("jmin={jmin} exceeds jmax={jmax}")));
    }
    if mesh_resolution == 0 {
        return Err(invalid("mesh resolution must be positive"));
    }
    let gamma = lacunary_ratio(nu)?;
    let mesh = sphere_mesh(n, mesh_resolution)?;
    let mut all = vec![vec![0.0; n]];
    let mut per_sphere = Vec::new();
    for j in jmin..=jmax {
        let radius = gamma.powi(j);
        let threshold = radius / nu;
        let cands: Vec<Vec<f64>> = mesh.iter().map(|u| u.iter().map(|c| c * radius).collect()).collect();
        let mut nearest = vec![f64::INFINITY; cands.len()];
        let mut chosen = 0usize;
        let mut next = Some(0usize);
        while let Some(k) = next {
            let p = cands[k].clone();
            for (c, d) in cands.iter().zip(nearest.iter_mut()) {
                *d = d.min(dist(c, &p));
            }
            all.push(p);
            chosen += 1;
            next = None;
            let mut best = -1.0;
            for (idx, &d) in nearest.iter().enumerate() {
                if d >= threshold && d > best {
                    best = d;
                    next = Some(idx);
                }
            }
        }
        per_sphere.push(chosen);
    }
    let points = PointSet::new(all)?;
    let effective_nu = effective_nu(&points);
    Ok(SpherePacking { points, per_sphere, effective_nu })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::new(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let q = Cube::from_lower(&[0.0], 1.0).unwrap();
        assert_eq!(dist_cube_to_set(&q, &line(&[2.0])).unwrap(), 1.0);
        let q2 = Cube::from_lower(&[0.0, 0.0], 1.0).unwrap();
        let inside = PointSet::new(vec![vec![0.5, 0.5]]).unwrap();
        assert_eq!(dist_cube_to_set(&q2, &inside).unwrap(), 0.0);
        let corner = PointSet::new(vec![vec![3.0, 1.0]]).unwrap();
        assert_eq!(dist_cube_to_set(&q2, &corner).unwrap(), 2.0);
    }

    #[test]
    fn empty_reference_set() {
        let q = Cube::from_lower(&[0.0], 1.0).unwrap();
        let empty = PointSet::new(vec![]).unwrap();
        let err = dist_cube_to_set(&q, &empty).unwrap_err();
        assert_eq!(err.to_string(), "empty reference set");
    }

    #[test]
    fn duplicates_rejected() {
        assert!(matches!(PointSet::new(vec![vec![1.0], vec![0.0], vec![1.0]]), Err(Error::DuplicatePoint(0, 2))));
    }

    #[test]
    fn whitney_examples() {
        let origin = line(&[0.0]);
        let q = Cube::from_lower(&[1.0], 1.0).unwrap();
        assert!(whitney_member(&q, &origin, 0.5, 2.0).unwrap());
        let far = Cube::from_lower(&[3.0], 1.0).unwrap();
        assert!(!whitney_member(&far, &origin, 0.5, 2.0).unwrap());
        let touching = Cube::from_lower(&[0.0], 1.0).unwrap();
        assert!(!whitney_member(&touching, &origin, 1e-6, 2.0).unwrap());
        assert!(whitney_member(&q, &origin, 2.0, 1.0).is_err());
    }

    #[test]
    fn rcond_examples() {
        assert!(check_rcond(&line(&[0.0, 1.0, 2.0, 4.0]), 2.0).unwrap().holds);
        let bad = check_rcond(&line(&[1.0, 1.1]), 2.0).unwrap();
        assert!(!bad.holds);
        assert_eq!(bad.witness, Some((0, 1)));
        assert!(check_rcond(&line(&[0.0, 3.7]), 1.01).unwrap().holds);
        assert!(check_rcond(&line(&[5.0]), 2.0).unwrap().holds);
        assert!(check_rcond(&line(&[0.0, 1.0]), 1.0).is_err());
    }

    #[test]
    fn lacunary_1d_examples() {
        let s = generate_lacunary_1d(2.0, 0, 1).unwrap();
        let xs: Vec<f64> = s.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(lacunary_ratio(3.0).unwrap(), 1.5);
        for nu in [1.5, 2.0, 3.0, 4.0] {
            let s = generate_lacunary_1d(nu, -6, 6).unwrap();
            assert!(check_rcond(&s, nu).unwrap().holds, "nu={nu}");
        }
    }

    #[test]
    fn twelve_points_on_circle_are_separated() {
        // chord of angle 2π/12 is 2 sin(π/12) ≈ 0.5176 ≥ 1/2
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 12.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let mut min = f64::INFINITY;
        for i in 0..12 {
            for j in i + 1..12 {
                min = min.min(dist(&pts[i], &pts[j]));
            }
        }
        assert!((min - 2.0 * (std::f64::consts::PI / 12.0).sin()).abs() < 1e-12);
        assert!(min >= 0.5);
    }

    #[test]
    fn sphere_packing_is_lacunary() {
        let pack = generate_lacunary_sphere(2.0, 2, -2, 2, 720).unwrap();
        assert_eq!(pack.per_sphere.len(), 5);
        assert!(pack.per_sphere.iter().all(|&c| c >= 2));
        assert!(pack.effective_nu <= 2.0 * (1.0 + 1e-12));
        assert!(check_rcond(&pack.points, pack.effective_nu.max(1.0 + 1e-9)).unwrap().holds);
        // within-sphere separation
        let pts = pack.points.points();
        for i in 1..pts.len() {
            for j in i + 1..pts.len() {
                let (ri, rj) = (norm(&pts[i]), norm(&pts[j]));
                if (ri - rj).abs() < 1e-9 * ri {
                    assert!(ri <= 2.0 * dist(&pts[i], &pts[j]) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn single_point_per_sphere() {
        // a coarse mesh of one direction degenerates to one point per sphere
        let pack = generate_lacunary_sphere(2.0, 2, 0, 3, 1).unwrap();
        assert_eq!(pack.per_sphere, vec![1, 1, 1, 1]);
        assert!(check_rcond(&pack.points, 2.0).unwrap().holds);
    }

    #[test]
    fn sphere_packing_3d() {
        let pack = generate_lacunary_sphere(2.0, 3, 0, 1, 400).unwrap();
        assert!(pack.per_sphere.iter().all(|&c| c > 4));
        assert!(check_rcond(&pack.points, pack.effective_nu.max(1.0 + 1e-9)).unwrap().holds);
    }
}
