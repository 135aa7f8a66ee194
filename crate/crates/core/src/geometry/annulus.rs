use super::cube::{point_cube_dist_sq, Cube};
use crate::error::{invalid, Result};

/// Number of cells in the boundary layer, `2ⁿ((N+1)ⁿ − Nⁿ)`.
pub fn annulus_count(n: usize, big_n: u64) -> u64 {
    (1u64 << n) * ((big_n + 1).pow(n as u32) - big_n.pow(n as u32))
}

/// Exact tiling of `(1+1/N)P ∖ P` by cubes of side `ℓ_P/(2N)`.
///
/// `(1+1/N)P` is cut into a `(2N+2)ⁿ` grid; the inner `(2N)ⁿ` block is `P`
/// and the boundary layer is returned in lexicographic cell order.
pub fn annulus_cover(p: &Cube, big_n: u64) -> Result<Vec<Cube>> {
    if big_n == 0 {
        return Err(invalid("annulus cover needs N >= 1"));
    }
    let n = p.dim();
    let per_side = 2 * big_n + 2;
    let cell = p.side() / (2 * big_n) as f64;
    let origin: Vec<f64> = (0..n).map(|i| p.lower(i) - cell).collect();
    let mut out = Vec::with_capacity(annulus_count(n, big_n) as usize);
    let mut idx = vec![0u64; n];
    loop {
        if idx.iter().any(|&k| k == 0 || k == per_side - 1) {
            let lower: Vec<f64> = idx.iter().zip(&origin).map(|(&k, &o)| o + k as f64 * cell).collect();
            out.push(Cube::from_lower(&lower, cell)?);
        }
        let mut axis = n;
        loop {
            if axis == 0 {
                return Ok(out);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < per_side {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// The two-sided bound `(N/√n)·diam L ≤ dist(L, c) ≤ N·diam L`.
///
/// Both bounds are attained with equality by some cells (the lower one next to
/// the faces of `P`, the upper one in dimension 1), and the stored cube bounds
/// carry rounding from `c ± ℓ/2`. Comparisons therefore allow an absolute
/// slack of a few ulps of the coordinate magnitudes involved.
pub fn annulus_distance_bounds(l: &Cube, center: &[f64], big_n: u64) -> (bool, bool) {
    let d = point_cube_dist_sq(center, l).sqrt();
    let nf = big_n as f64;
    let scale = (0..l.dim()).map(|i| center[i].abs() + l.center()[i].abs()).fold(0.0, f64::max) + l.side();
    let tol = COORD_SLACK * scale * nf.max(1.0);
    (nf * l.side() <= d + tol, d <= nf * l.diam() + tol)
}

const COORD_SLACK: f64 = 16.0 * f64::EPSILON;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_example() {
        let p = Cube::new(vec![0.0], 2.0).unwrap();
        let cover = annulus_cover(&p, 2).unwrap();
        assert_eq!(cover.len(), 2);
        assert_eq!(cover[0].bounds(), (vec![-1.5], vec![-1.0]));
        assert_eq!(cover[1].bounds(), (vec![1.0], vec![1.5]));
        assert_eq!(annulus_count(1, 2), 2);
    }

    #[test]
    fn planar_count() {
        let p = Cube::new(vec![0.3, -0.2], 1.0).unwrap();
        let cover = annulus_cover(&p, 1).unwrap();
        assert_eq!(cover.len(), 12);
        assert_eq!(annulus_count(2, 1), 12);
        for l in &cover {
            assert!((l.volume() - p.volume() / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_n_rejected() {
        assert!(annulus_cover(&Cube::new(vec![0.0], 1.0).unwrap(), 0).is_err());
    }
}
