use morrey_core::geometry::{
    annulus_count, annulus_cover, annulus_distance_bounds, build_shifted_lattices, equa_lhs, solve_epsilon_n,
    solve_splitting_params, whitney_member, Cube, CubeFamily, CubePredicate, PointSet, Truncation,
};
use morrey_core::grid::{cube_integral, GridFunction, GridSpec, Weight};
use morrey_core::maximal::{maximal_dyadic, maximal_exact, maximal_family_dyadic, maximal_grid_cubes, three_lattice_bound};
use morrey_core::muckenhoupt::{ap_constant, ap_over_cubes, ax_estimate, dual_extremal};
use morrey_core::norms::{morrey_norm, FunctionSpace, MorreyEvaluator, MorreyParams};
use proptest::prelude::*;

fn grid(n: usize, m: usize) -> GridSpec {
    GridSpec::new(vec![0.0; n], 1.0 / m as f64, vec![m; n]).unwrap()
}

fn values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, len)
}

fn weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..4.0, len)
}

fn func(spec: &GridSpec, v: Vec<f64>) -> GridFunction {
    GridFunction::new(spec.clone(), v).unwrap()
}

fn weight(spec: &GridSpec, v: Vec<f64>) -> Weight {
    Weight::new(func(spec, v)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integral_is_additive_over_children(v in values(256), cx in 0.1f64..0.9, cy in 0.1f64..0.9, s in 0.05f64..0.8) {
        let spec = grid(2, 16);
        let f = func(&spec, v);
        let q = Cube::new(vec![cx, cy], s).unwrap();
        let whole = cube_integral(&f, &q);
        let parts: f64 = q.children().iter().map(|c| cube_integral(&f, c)).sum();
        let scale = cube_integral(&f.abs(), &q).max(1e-300);
        prop_assert!((whole - parts).abs() <= 1e-12 * scale);
    }

    #[test]
    fn family_monotonicity(v in values(32), w in weights(32), lo in 1usize..4, hi in 4usize..32) {
        let spec = grid(1, 32);
        let (f, w) = (func(&spec, v), weight(&spec, w));
        let pr = MorreyParams::new(2.0, 0.5).unwrap();
        let t = Truncation::for_grid(&spec);
        let small = CubeFamily::all_cubes(t.clone().with_sides(lo as f64 / 32.0, hi as f64 / 32.0)).unwrap();
        let big = CubeFamily::all_cubes(t).unwrap();
        prop_assert!(morrey_norm(&f, &w, pr, &small).unwrap().value <= morrey_norm(&f, &w, pr, &big).unwrap().value);
        prop_assert!(ap_constant(&w, 2.0, &small).unwrap().value <= ap_constant(&w, 2.0, &big).unwrap().value);
    }

    #[test]
    fn triangle_inequality(a in values(64), b in values(64), w in weights(64), p in 1.2f64..4.0, lambda in 0.05f64..0.95) {
        let spec = grid(2, 8);
        let (f, g, w) = (func(&spec, a), func(&spec, b), weight(&spec, w));
        let pr = MorreyParams::new(p, lambda).unwrap();
        let fam = CubeFamily::all_cubes(Truncation::for_grid(&spec)).unwrap();
        let sum = f.zip_with(&g, |x, y| x + y).unwrap();
        let lhs = morrey_norm(&sum, &w, pr, &fam).unwrap().value;
        let rhs = morrey_norm(&f, &w, pr, &fam).unwrap().value + morrey_norm(&g, &w, pr, &fam).unwrap().value;
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn maximal_sublinearity_and_fast_path(a in values(64), b in values(64)) {
        let spec = grid(2, 8);
        let (f, g) = (func(&spec, a), func(&spec, b));
        let fam = CubeFamily::all_cubes(Truncation::for_grid(&spec)).unwrap();
        let sum = f.zip_with(&g, |x, y| x + y).unwrap();
        let ms = maximal_exact(&sum, &fam).unwrap();
        let (mf, mg) = (maximal_exact(&f, &fam).unwrap(), maximal_exact(&g, &fam).unwrap());
        for k in 0..spec.len() {
            prop_assert!(ms.values()[k] <= (mf.values()[k] + mg.values()[k]) * (1.0 + 1e-12));
        }
        prop_assert_eq!(&maximal_grid_cubes(&f, &fam).unwrap().field, &mf.field);
        let lattice = &build_shifted_lattices(&spec).unwrap()[4];
        let (ds, df, dg) = (
            maximal_dyadic(&sum, lattice, None).unwrap(),
            maximal_dyadic(&f, lattice, None).unwrap(),
            maximal_dyadic(&g, lattice, None).unwrap(),
        );
        for k in 0..spec.len() {
            prop_assert!(ds.values()[k] <= (df.values()[k] + dg.values()[k]) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn restriction_monotonicity_and_split_identity(v in values(64), x in 0.0f64..1.0, alpha in 0.0f64..3.0) {
        let spec = grid(1, 64);
        let f = func(&spec, v);
        let lattice = &build_shifted_lattices(&spec).unwrap()[1];
        let omega = PointSet::new(vec![vec![x]]).unwrap();
        let near = CubePredicate::Near { reference: omega.clone(), alpha };
        let far = CubePredicate::Far { reference: omega, alpha };
        let narrower = CubePredicate::And { all: vec![near.clone(), CubePredicate::SideRange { min: 0.0, max: 0.25 }] };
        let full = maximal_dyadic(&f, lattice, None).unwrap();
        let g1 = maximal_dyadic(&f, lattice, Some(&near)).unwrap();
        let g2 = maximal_dyadic(&f, lattice, Some(&far)).unwrap();
        let g1n = maximal_dyadic(&f, lattice, Some(&narrower)).unwrap();
        for k in 0..spec.len() {
            prop_assert_eq!(full.values()[k], g1.values()[k].max(g2.values()[k]));
            prop_assert!(g1n.values()[k] <= g1.values()[k]);
        }
    }

    #[test]
    fn restricted_dyadic_equals_exact(v in values(64), x in 0.0f64..1.0, r1 in 0.1f64..1.0, extra in 0.5f64..4.0, j in 0usize..3) {
        let spec = grid(1, 64);
        let f = func(&spec, v);
        let lattice = build_shifted_lattices(&spec).unwrap().swap_remove(j);
        let predicate = CubePredicate::Whitney { reference: PointSet::new(vec![vec![x]]).unwrap(), r1, r2: r1 + extra };
        let t = Truncation::for_grid(&spec).with_sides(spec.h(), 64.0);
        let fam = CubeFamily::dyadic(lattice.clone(), predicate.clone(), t).unwrap();
        if fam.enumerate().unwrap().is_empty() {
            return Ok(());
        }
        let exact = maximal_exact(&f, &fam).unwrap();
        prop_assert_eq!(&maximal_dyadic(&f, &lattice, Some(&predicate)).unwrap().field, &exact.field);
        prop_assert_eq!(&maximal_family_dyadic(&f, &fam).unwrap().field, &exact.field);
    }

    #[test]
    fn three_lattice_domination(v in values(64)) {
        let spec = grid(2, 8);
        let f = func(&spec, v);
        let fam = CubeFamily::all_cubes(Truncation::for_grid(&spec)).unwrap();
        let bound = three_lattice_bound(&f, &build_shifted_lattices(&spec).unwrap()).unwrap();
        prop_assert!(bound.dominates(&maximal_exact(&f, &fam).unwrap()));
    }

    #[test]
    fn whitney_children_move_one_band_out(x in -1.0f64..1.0, y in -1.0f64..1.0, r1 in 0.05f64..2.0, extra in 0.1f64..5.0,
                                          cx in -4.0f64..4.0, cy in -4.0f64..4.0, s in 0.01f64..3.0) {
        let omega = PointSet::new(vec![vec![x, y]]).unwrap();
        let r2 = r1 + extra;
        let q = Cube::new(vec![cx, cy], s).unwrap();
        if whitney_member(&q, &omega, r1, r2).unwrap() {
            for c in q.children() {
                // exact up to the rounding of children's bounds
                let slack = 1.0 + 1e-12;
                prop_assert!(whitney_member(&c, &omega, 2.0 * r1 / slack, 2.0 * (r2 + 1.0) * slack).unwrap());
            }
        }
    }

    #[test]
    fn subdivision_step_per_cube(v in values(64), w in weights(64), p in 1.2f64..3.0, lambda in 0.05f64..0.95) {
        let spec = grid(2, 8);
        let (f, w) = (func(&spec, v), weight(&spec, w));
        let pr = MorreyParams::new(p, lambda).unwrap();
        let eval = MorreyEvaluator::new(&f, &w, pr).unwrap();
        let bound = 2f64.powf(2.0 * (1.0 - lambda) / p);
        for q in CubeFamily::all_cubes(Truncation::for_grid(&spec)).unwrap().enumerate().unwrap() {
            let kids = q.children().iter().map(|c| eval.term(c)).fold(0.0, f64::max);
            prop_assert!(eval.term(&q) <= bound * kids * (1.0 + 1e-9) + 1e-300);
        }
    }

    #[test]
    fn annulus_properties(n in 1usize..=3, big_n in 1u64..=4, side in 0.1f64..10.0, c in -5.0f64..5.0) {
        let p = Cube::new(vec![c; n], side).unwrap();
        let cover = annulus_cover(&p, big_n).unwrap();
        prop_assert_eq!(cover.len() as u64, annulus_count(n, big_n));
        let total: f64 = cover.iter().map(Cube::volume).sum();
        let expected = ((1.0 + 1.0 / big_n as f64).powi(n as i32) - 1.0) * p.volume();
        prop_assert!((total - expected).abs() <= 1e-12 * expected);
        // shared faces may overlap by an ulp when ℓ_P/(2N) is not dyadic
        let overlap = |a: &Cube, b: &Cube| a.intersect(b).map_or(0.0, |(lo, hi)| lo.iter().zip(&hi).map(|(l, h)| h - l).product::<f64>());
        let tiny = 1e-12 * cover[0].volume();
        for (i, a) in cover.iter().enumerate() {
            prop_assert!(overlap(&p, a) <= tiny);
            for b in &cover[i + 1..] {
                prop_assert!(overlap(a, b) <= tiny);
            }
        }
        for l in &cover {
            prop_assert!(p.dilate(1.0 + 1.0 / big_n as f64).unwrap().dilate(1.0 + 1e-12).unwrap().contains(l));
            prop_assert_eq!(annulus_distance_bounds(l, p.center(), big_n), (true, true));
        }
    }

    #[test]
    fn splitting_solver_invariants(r1 in 1.0001f64..20.0, extra in 0.001f64..50.0) {
        let r2 = r1 + extra;
        let s = solve_splitting_params(r1, r2).unwrap();
        prop_assert!(s.satisfies(r1));
        prop_assert!(s.mu < 1.5);
        prop_assert!(((s.mu - 1.0) - 2.0 * (r2 + 1.0) / (s.alpha - 1.0)).abs() <= 1e-12 * s.mu);
        prop_assert!(((s.gamma_split - 1.0) - 2.0 * (s.alpha + 1.0) / (r1 - 1.0)).abs() <= 1e-12 * s.gamma_split);
    }

    #[test]
    fn epsilon_n_solver_invariants(nu in 1.01f64..50.0, n in 1usize..=4) {
        let e = solve_epsilon_n(nu, n).unwrap();
        prop_assert!(e.epsilon > 0.0 && e.epsilon < 1.0);
        prop_assert!((equa_lhs(&e, n) - 1.0 / nu).abs() <= 1e-12 / nu);
    }

    #[test]
    fn ap_at_least_one_and_matches_lebesgue_extremal(w in weights(32), p in 1.2f64..4.0, a in 0usize..32, len in 1usize..32) {
        let spec = grid(1, 32);
        let w = weight(&spec, w);
        let fam = CubeFamily::all_cubes(Truncation::for_grid(&spec)).unwrap();
        prop_assert!(ap_constant(&w, p, &fam).unwrap().value >= 1.0 - 1e-12);
        let len = len.min(32 - a);
        let q = Cube::from_lower(&[a as f64 / 32.0], len as f64 / 32.0).unwrap();
        let ap = ap_over_cubes(&w, p, std::slice::from_ref(&q), false).unwrap().value;
        let space = FunctionSpace::Lebesgue { weight: &w, p };
        let est = ax_estimate(&space, std::slice::from_ref(&q), &[dual_extremal(&w, p, &q).unwrap()]).unwrap();
        prop_assert!((est.value - ap.powf(1.0 / p)).abs() <= 1e-10 * est.value);
    }
}

#[test]
fn lattice_containment_is_within_three() {
    for (n, m) in [(1usize, 64usize), (2, 16)] {
        let spec = grid(n, m);
        let lattices = build_shifted_lattices(&spec).unwrap();
        let mut lower = vec![0i64; n];
        for k in 1..=m as i64 {
            loop {
                let best = lattices
                    .iter()
                    .filter_map(|l| l.smallest_containing_grid_cube(&lower, k).map(|id| (l, id)))
                    .map(|(l, id)| {
                        let r = l.cube(&id);
                        let q = Cube::from_lower(&spec.cell_lower(&lower.iter().map(|&i| i as usize).collect::<Vec<_>>()), k as f64 * spec.h()).unwrap();
                        assert!(r.dilate(1.0 + 1e-12).unwrap().contains(&q));
                        r.side() / q.side()
                    })
                    .fold(f64::INFINITY, f64::min);
                assert!(best <= 3.0 + 1e-12, "n={n} side {k} at {lower:?}: ratio {best}");
                assert!(best <= 6.0);
                let mut axis = n;
                loop {
                    if axis == 0 {
                        break;
                    }
                    axis -= 1;
                    if lower[axis] + k < m as i64 {
                        lower[axis] += 1;
                        break;
                    }
                    lower[axis] = 0;
                    if axis == 0 {
                        axis = usize::MAX;
                        break;
                    }
                }
                if axis == usize::MAX || (axis == 0 && lower.iter().all(|&i| i == 0)) {
                    break;
                }
            }
            lower = vec![0; n];
        }
    }
}

#[test]
fn lattice_generations_tile_the_cells() {
    let spec = grid(2, 8);
    for lattice in build_shifted_lattices(&spec).unwrap() {
        for g in 0..=lattice.top_generation() {
            let mut hits = vec![0u32; spec.len()];
            for id in lattice.cubes_at(g) {
                if let Some(r) = lattice.cell_ranges(&id) {
                    morrey_core::grid::for_each_in_ranges(&r, |idx| hits[spec.flat_index(idx)] += 1);
                }
            }
            assert!(hits.iter().all(|&h| h == 1));
        }
        // any two cubes share the root as a common ancestor
        let roots = lattice.cubes_at(0);
        assert_eq!(roots.len(), 1);
    }
}
