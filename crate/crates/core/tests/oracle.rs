use morrey_core::geometry::{Cube, CubeFamily, Truncation};
use morrey_core::grid::{cube_average, cube_integral, weighted_p_mass, GridFunction, GridSpec, Weight};
use morrey_core::norms::{lp_norm, morrey_norm, restricted_norm, MorreyParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cell-by-cell overlap sum, independent of the summed table.
fn naive_integral(f: &GridFunction, q: &Cube) -> f64 {
    let spec = f.spec();
    let mut total = 0.0;
    for (k, &v) in f.values().iter().enumerate() {
        let idx = spec.multi_index(k);
        let lower = spec.cell_lower(&idx);
        let mut overlap = 1.0;
        for (a, &cell_lo) in lower.iter().enumerate() {
            let lo = cell_lo.max(q.lower(a));
            let hi = (cell_lo + spec.h()).min(q.upper(a));
            overlap *= (hi - lo).max(0.0);
        }
        total += v * overlap;
    }
    total
}

fn random_case(rng: &mut ChaCha8Rng, n: usize) -> (GridFunction, Weight, Cube) {
    let m = 1usize << rng.gen_range(3..=8);
    let h = rng.gen_range(0.01..0.2);
    let corner: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let spec = GridSpec::new(corner.clone(), h, vec![m; n]).unwrap();
    let f = GridFunction::new(spec.clone(), (0..spec.len()).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
    let w = Weight::new(GridFunction::new(spec.clone(), (0..spec.len()).map(|_| rng.gen_range(0.1..3.0)).collect()).unwrap())
        .unwrap();
    let extent = m as f64 * h;
    let center: Vec<f64> = corner.iter().map(|c| c + rng.gen_range(-0.1..1.1) * extent).collect();
    let side = rng.gen_range(0.3 * h..0.9 * extent);
    (f, w, Cube::new(center, side).unwrap())
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)
}

#[test]
fn cube_integrals_match_naive_overlap() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let n = 1 + case % 2;
        let (f, w, q) = random_case(&mut rng, n);
        let scale = naive_integral(&f.abs(), &q);
        assert!(close(cube_integral(&f, &q), naive_integral(&f, &q), scale), "case {case}");
        assert!(close(cube_average(&f, &q) * q.volume(), naive_integral(&f, &q), scale), "case {case}");
        let p = 1.0 + rng.gen_range(0.0..2.0);
        let fp = f.zip_with(&w, |a, b| a.abs().powf(p) * b).unwrap();
        let oracle = naive_integral(&fp, &q);
        assert!(close(weighted_p_mass(&f, &w, p, &q).unwrap(), oracle, oracle), "case {case}");
    }
}

#[test]
fn integer_corner_blocks_are_exact() {
    let spec = GridSpec::new(vec![0.0, 0.0], 1.0, vec![16, 16]).unwrap();
    let f = GridFunction::from_fn(spec.clone(), |x| (x[0] * 3.0 + x[1]).floor()).unwrap();
    for (lo, side) in [([0.0, 0.0], 16.0), ([3.0, 5.0], 4.0), ([7.0, 1.0], 9.0)] {
        let q = Cube::from_lower(&lo, side).unwrap();
        assert_eq!(cube_integral(&f, &q), naive_integral(&f, &q));
    }
}

#[test]
fn half_outside_cube_averages_to_half() {
    let spec = GridSpec::new(vec![0.0], 0.125, vec![8]).unwrap();
    let f = GridFunction::constant(spec, 1.0).unwrap();
    let q = Cube::new(vec![1.0], 0.5).unwrap();
    assert_eq!(cube_average(&f, &q), 0.5);
}

#[test]
fn lp_norm_matches_naive_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..20 {
        let (f, w, _) = random_case(&mut rng, 1 + case % 2);
        let p = rng.gen_range(1.1..4.0);
        let spec = f.spec();
        let naive: f64 = f.values().iter().zip(w.values()).map(|(a, b)| a.abs().powf(p) * b).sum::<f64>() * spec.cell_volume();
        let v = lp_norm(&f, &w, p).unwrap();
        assert!((v - naive.powf(1.0 / p)).abs() <= 1e-12 * v);
    }
}

#[test]
fn restricted_norm_matches_masked_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let spec = GridSpec::new(vec![0.0], 1.0 / 32.0, vec![32]).unwrap();
    let fam = CubeFamily::all_cubes(Truncation::for_grid(&spec)).unwrap();
    let params = MorreyParams::new(2.0, 0.4).unwrap();
    for _ in 0..20 {
        let f = GridFunction::new(spec.clone(), (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let w = Weight::new(GridFunction::new(spec.clone(), (0..32).map(|_| rng.gen_range(0.2..2.0)).collect()).unwrap()).unwrap();
        let a = rng.gen_range(0..32usize);
        let b = rng.gen_range(a..32usize) + 1;
        let k = Cube::from_lower(&[a as f64 / 32.0], (b - a) as f64 / 32.0).unwrap();
        let chi = GridFunction::indicator(spec.clone(), &k).unwrap();
        let masked = f.zip_with(&chi, |x, c| x * c).unwrap();
        let expected = morrey_norm(&masked, &w, params, &fam).unwrap().value;
        let got = restricted_norm(&f, &w, params, &fam, &k).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected.max(1e-300));
    }
}
