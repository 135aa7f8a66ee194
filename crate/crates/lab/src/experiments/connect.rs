//! Comparison of the lacunary-centered family with Whitney bands.
//!
//! `(ε, N)` come from the explicit solver. The easy direction
//! `‖f‖_{𝒲_{εN/√n,N}} ≲ ‖f‖_ℱ` is checked cube by cube: each band cube `Q`
//! lies in the smallest cube `Q'` centered at its nearest point of `Λ`, with
//! `ℓ_{Q'} ≤ 2(N+1)√n·ℓ_Q`, so its term is at most `(ℓ_{Q'}/ℓ_Q)^{λn/p}`
//! times the term of `Q'`. The two-sided ratio `‖f‖_ℱ/‖f‖_𝒲` is reported
//! across refinements of the grid.

use morrey_core::geometry::{check_rcond, point_cube_dist_sq, solve_epsilon_n, Cube, CubeFamily, PointSet, Truncation};
use morrey_core::grid::{GridSpec, Weight};
use morrey_core::norms::{MorreyEvaluator, MorreyParams};
use morrey_core::Error as CoreError;
use serde_json::json;

use super::REL_HEADROOM;
use crate::config::FieldSpec;
use crate::error::Result;
use crate::report::{cell, cube_value, Check, Relation, Report, Table};

/// Everything `verify_connect` needs; the function and weight are resampled
/// on each refinement of `grid`.
#[derive(Debug, Clone)]
pub struct ConnectInput {
    pub function: FieldSpec,
    /// `None` means `w ≡ 1`.
    pub weight: Option<FieldSpec>,
    pub grid: GridSpec,
    pub params: MorreyParams,
    pub points: PointSet,
    pub nu: f64,
    /// Number of grids, each with twice the cells per axis of the previous one.
    pub levels: usize,
    pub seed: u64,
}

/// Smallest cube centered at `x` that contains `q`.
fn enclosing_centered(q: &Cube, x: &[f64]) -> Result<Cube> {
    let half = (0..q.dim()).map(|i| (q.lower(i) - x[i]).abs().max((q.upper(i) - x[i]).abs())).fold(0.0, f64::max);
    Ok(Cube::new(x.to_vec(), 2.0 * half)?)
}

fn nearest<'a>(q: &Cube, set: &'a PointSet) -> &'a [f64] {
    let mut best: Option<(f64, &[f64])> = None;
    for x in set.iter() {
        let d = point_cube_dist_sq(x, q);
        if best.is_none_or(|(b, _)| d < b) {
            best = Some((d, x));
        }
    }
    best.expect("reference set is nonempty").1
}

fn refine(grid: &GridSpec, level: usize) -> Result<GridSpec> {
    let k = 1usize << level;
    Ok(GridSpec::new(grid.corner().to_vec(), grid.h() / k as f64, grid.cells().iter().map(|m| m * k).collect())?)
}

fn empty_is_error(family: &CubeFamily, name: &str) -> Result<Vec<Cube>> {
    family.enumerate_nonempty().map_err(|e| match e {
        CoreError::EmptyFamily => CoreError::InvalidParameter(format!("family {name} is empty in the truncation box")).into(),
        e => e.into(),
    })
}

pub fn verify_connect(input: &ConnectInput) -> Result<Report> {
    let n = input.grid.dim();
    let sn = (n as f64).sqrt();
    let (p, lambda) = (input.params.p(), input.params.lambda());
    let mut r = Report::new("verify_connect", input.seed);
    r.param("grid", &input.grid).param("p", p).param("lambda", lambda).param("nu", input.nu);
    r.param("points", &input.points).param("levels", input.levels).param("function", &input.function);
    r.param("weight", &input.weight);
    if input.levels == 0 {
        return Err(CoreError::InvalidParameter("connect needs at least one level".into()).into());
    }
    let rc = check_rcond(&input.points, input.nu)?;
    r.check(Check::flag("lacunary_condition", rc.holds));
    if !rc.holds {
        r.measure("rcond_witness", rc.witness);
        return Ok(r);
    }
    let eq = solve_epsilon_n(input.nu, n)?;
    let big_n = eq.big_n as f64;
    let (r1, r2) = (eq.epsilon * big_n / sn, big_n);
    let r1_wide = big_n / sn;
    r.measure_f64("epsilon", eq.epsilon).measure("N", eq.big_n);
    r.measure_f64("band_r1", r1).measure_f64("band_r2", r2).measure_f64("narrow_band_r1", r1_wide);
    let side_bound = 2.0 * (r2 + 1.0) * sn;
    let term_bound = side_bound.powf(lambda * n as f64 / p);
    r.measure_f64("side_ratio_bound", side_bound).measure_f64("term_ratio_bound", term_bound);

    let mut table = Table::new("levels", &["level", "h", "norm_centered", "norm_band", "norm_narrow_band", "ratio", "measured_constant"]);
    let mut ratios = Vec::new();
    let mut worst_side = 0.0f64;
    let mut worst_term = 0.0f64;
    let mut witness = None;
    let mut all_zero = true;
    for level in 0..input.levels {
        let spec = refine(&input.grid, level)?;
        let f = input.function.sample(&spec, input.seed)?;
        let w = match &input.weight {
            Some(ws) => ws.sample_weight(&spec, input.seed.wrapping_add(1))?,
            None => Weight::uniform(spec.clone()),
        };
        let eval = MorreyEvaluator::new(&f, &w, input.params)?;
        let t = Truncation::for_grid(&spec);
        let centered = empty_is_error(&CubeFamily::centered_at(input.points.clone(), t.clone())?, "centered")?;
        let band = empty_is_error(&CubeFamily::whitney(input.points.clone(), r1, r2, t.clone())?, "band")?;
        let narrow = CubeFamily::whitney(input.points.clone(), r1_wide.min(r2), r2, t)?.enumerate()?;
        let nf = eval.norm_over(&centered)?.value;
        let nw = eval.norm_over(&band)?.value;
        let nn = if narrow.is_empty() { f64::NAN } else { eval.norm_over(&narrow)?.value };

        for q in &band {
            let big = enclosing_centered(q, nearest(q, &input.points))?;
            worst_side = worst_side.max(big.side() / q.side());
            let (tq, tb) = (eval.term(q), eval.term(&big));
            if tq > 0.0 {
                let ratio = tq / tb;
                if ratio > worst_term {
                    worst_term = ratio;
                    witness = Some((q.clone(), big));
                }
            }
        }
        let ratio = if nw > 0.0 { nf / nw } else { f64::NAN };
        if nf > 0.0 || nw > 0.0 {
            all_zero = false;
            ratios.push(ratio);
        }
        let measured = if nf > 0.0 { nw / nf } else { f64::NAN };
        table.push(vec![level.to_string(), cell(spec.h()), cell(nf), cell(nw), cell(nn), cell(ratio), cell(measured)]);
    }
    r.table(table);
    r.check(Check::new("enclosing_side_ratio", worst_side, Relation::Le, side_bound, 1e-12));
    r.check(Check::new("enclosing_term_ratio", worst_term, Relation::Le, term_bound, REL_HEADROOM));
    r.measure_f64("worst_enclosing_term_ratio", worst_term);
    if let Some((q, b)) = &witness {
        r.measure("witness", json!({ "cube": cube_value(q), "enclosing": cube_value(b) }));
    }
    if all_zero {
        r.measure("ratio_check", "skipped: zero function");
    } else {
        let finite: Vec<f64> = ratios.iter().copied().filter(|x| x.is_finite() && *x > 0.0).collect();
        let spread = if finite.len() == ratios.len() {
            finite.iter().cloned().fold(0.0, f64::max) / finite.iter().cloned().fold(f64::INFINITY, f64::min)
        } else {
            f64::INFINITY
        };
        r.measure_f64("ratio_spread", spread);
        r.check(Check::new("ratio_stability", spread, Relation::Lt, 2.0, 0.0));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use morrey_core::geometry::generate_lacunary_1d;

    fn input(function: FieldSpec) -> ConnectInput {
        ConnectInput {
            function,
            weight: None,
            grid: GridSpec::centered(1, 1.0, 32).unwrap(),
            params: MorreyParams::new(2.0, 0.5).unwrap(),
            points: generate_lacunary_1d(2.0, -4, 0).unwrap(),
            nu: 2.0,
            levels: 3,
            seed: 11,
        }
    }

    #[test]
    fn random_function_is_stable() {
        let r = verify_connect(&input(FieldSpec::RandomCells { base_cells: 8, low: -1.0, high: 1.0, stream: 0 })).unwrap();
        assert!(r.passed, "{:#?}", r.failed_checks().collect::<Vec<_>>());
        assert_eq!(r.measured["N"], 8);
    }

    #[test]
    fn zero_function_skips_the_ratio() {
        let r = verify_connect(&input(FieldSpec::Constant { value: 0.0 })).unwrap();
        assert!(r.passed);
        assert!(r.measured.contains_key("ratio_check"));
    }

    #[test]
    fn function_in_one_key_cube() {
        let r = verify_connect(&input(FieldSpec::Indicator { center: vec![0.5], side: 0.25 })).unwrap();
        assert!(r.passed, "{:#?}", r.failed_checks().collect::<Vec<_>>());
    }
}
