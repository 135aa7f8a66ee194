//! Nearest-point property of the cubes `Q_{ν,x}` around a lacunary set.
//!
//! For `x ∈ Λ∖{0}` the cube `Q_{ν,x}` is centered at `x` with
//! `diam Q_{ν,x} = |x|/ν`. Every cube `R ⊆ Q_{ν,x}` must see `x` as its
//! nearest point of `Λ`, i.e. `dist(R, Λ) = dist(R, x)` with no tolerance.

use morrey_core::geometry::{check_rcond, dist_cube_to_set, point_cube_dist_sq, Cube, PointSet};
use morrey_core::Error as CoreError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::Result;
use crate::report::{cell, cube_value, Check, Relation, Report, Table};

/// `Q_{ν,x}`: centered at `x`, side `|x|/(ν√n)`.
pub(crate) fn key_cube(x: &[f64], nu: f64) -> Result<Cube> {
    let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(Cube::new(x.to_vec(), norm / (nu * (x.len() as f64).sqrt()))?)
}

/// Random subcube of `q`: side uniform in `(0, ℓ_q]`, position uniform.
fn random_subcube(q: &Cube, rng: &mut ChaCha8Rng) -> Result<Cube> {
    let side = q.side() * (1.0 - rng.gen::<f64>());
    let lower: Vec<f64> = (0..q.dim()).map(|i| q.lower(i) + (q.side() - side) * rng.gen::<f64>()).collect();
    Ok(Cube::from_lower(&lower, side)?)
}

pub fn verify_key_property(set: &PointSet, nu: f64, samples: usize, seed: u64) -> Result<Report> {
    let mut r = Report::new("verify_key_property", seed);
    r.param("points", set).param("nu", nu).param("samples", samples);
    let rc = check_rcond(set, nu)?;
    r.check(Check::flag("lacunary_condition", rc.holds));
    if !rc.holds {
        r.measure("rcond_witness", rc.witness);
        return Ok(r);
    }
    let centers: Vec<&[f64]> = set.iter().filter(|x| x.iter().any(|c| *c != 0.0)).collect();
    if centers.is_empty() {
        return Err(CoreError::InvalidParameter("the set has no nonzero point".into()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut first: Option<(Cube, usize)> = None;
    let mut per_point = vec![(0usize, 0usize); centers.len()];
    for s in 0..samples {
        // round-robin over the centers so every point is exercised
        let j = s % centers.len();
        let q = key_cube(centers[j], nu)?;
        let rc = random_subcube(&q, &mut rng)?;
        let to_set = dist_cube_to_set(&rc, set)?;
        let to_x = point_cube_dist_sq(centers[j], &rc).sqrt();
        per_point[j].0 += 1;
        if to_set != to_x {
            violations += 1;
            per_point[j].1 += 1;
            first.get_or_insert((rc, j));
        }
    }
    let mut t = Table::new("points", &["point", "key_cube_side", "samples", "violations"]);
    for (j, x) in centers.iter().enumerate() {
        let coords: Vec<String> = x.iter().map(|c| cell(*c)).collect();
        t.push(vec![coords.join(" "), cell(key_cube(x, nu)?.side()), per_point[j].0.to_string(), per_point[j].1.to_string()]);
    }
    r.table(t);
    r.measure("centers", centers.len());
    if let Some((rc, j)) = &first {
        r.measure("first_violation", json!({ "cube": cube_value(rc), "point": centers[*j] }));
    }
    r.check(Check::new("distance_violations", violations as f64, Relation::Eq, 0.0, 0.0));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> PointSet {
        PointSet::new([0.0, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0].iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn worked_example() {
        let set = catalog();
        let q = key_cube(&[2.0], 2.0).unwrap();
        assert_eq!(q.bounds(), (vec![1.5], vec![2.5]));
        let rc = Cube::new(vec![2.0], 0.5).unwrap();
        assert!(q.contains(&rc));
        assert_eq!(dist_cube_to_set(&rc, &set).unwrap(), 0.0);
        assert_eq!(point_cube_dist_sq(&[2.0], &rc), 0.0);
    }

    #[test]
    fn catalog_has_no_violations() {
        let r = verify_key_property(&catalog(), 2.0, 1000, 7).unwrap();
        assert!(r.passed, "{:#?}", r.measured);
    }

    #[test]
    fn singleton_is_trivial() {
        let set = PointSet::new(vec![vec![3.0]]).unwrap();
        assert!(verify_key_property(&set, 2.0, 50, 1).unwrap().passed);
    }

    #[test]
    fn non_lacunary_set_fails_the_precondition() {
        let set = PointSet::new(vec![vec![1.0], vec![1.1]]).unwrap();
        assert!(!verify_key_property(&set, 2.0, 10, 1).unwrap().passed);
    }
}
