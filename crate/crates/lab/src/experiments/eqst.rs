//! Equivalence of Morrey norms over two Whitney bands.
//!
//! (a) Splitting each cube of `𝒲_{r1,r2}` into its `2ⁿ` children lands in
//! `𝒲_{2r1,2(r2+1)}` and costs at most `2^{n(1−λ)/p}`.
//! (b) Every cube of a far band `𝒲_{α1,α2}` with `α1 > max(1, r1)` sits in a
//! concentric dilate `Q̃ ∈ 𝒲_{r1,r2}` with `diam Q̃ ≤ (α2/r1)·diam Q`, which
//! costs at most `(α2/r1)^{λn/p}`.

use morrey_core::geometry::{dist_cube_to_set, dist_sq_cube_to_set, whitney_member, Cube, CubeFamily, PointSet, Truncation};
use morrey_core::grid::{GridFunction, Weight};
use morrey_core::norms::{MorreyEvaluator, MorreyParams};
use morrey_core::Error as CoreError;
use serde_json::json;

use super::REL_HEADROOM;
use crate::error::Result;
use crate::report::{cell, cube_value, num, Check, Relation, Report, Table};

/// `(k, α1, α2)`: iterate `(r1, r2) ↦ (2r1, 2(r2+1))` at least once until `α1 > 1`.
pub(crate) fn far_band(r1: f64, r2: f64) -> (u32, f64, f64) {
    let (mut a1, mut a2, mut k) = (2.0 * r1, 2.0 * (r2 + 1.0), 1);
    while a1 <= 1.0 {
        a1 *= 2.0;
        a2 = 2.0 * (a2 + 1.0);
        k += 1;
    }
    (k, a1, a2)
}

fn ratio_g(q: &Cube, omega: &PointSet) -> Result<f64> {
    Ok(dist_cube_to_set(q, omega)? / q.diam())
}

/// `dist(Q, Ω) ≥ r1·diam Q` in the squared form used by [`whitney_member`].
fn above_lower_radius(q: &Cube, omega: &PointSet, r1: f64) -> Result<bool> {
    Ok(r1 * r1 * q.diam_sq() <= dist_sq_cube_to_set(q, omega)?)
}

/// Concentric dilate `tQ`, `t ≥ 1`, with `dist/diam` as close to `r1` from above
/// as bisection allows. Bisecting on the membership comparison itself keeps
/// the result inside the band despite rounding at the boundary.
fn enclosing_dilate(q: &Cube, omega: &PointSet, r1: f64) -> Result<Cube> {
    let mut lo = 1.0;
    let mut hi = 2.0;
    while above_lower_radius(&q.dilate(hi)?, omega, r1)? {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above_lower_radius(&q.dilate(mid)?, omega, r1)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(q.dilate(lo)?)
}

pub fn verify_eqst(f: &GridFunction, w: &Weight, params: MorreyParams, omega: &PointSet, r1: f64, r2: f64) -> Result<Report> {
    let spec = f.spec();
    let n = spec.dim() as f64;
    let (p, lambda) = (params.p(), params.lambda());
    let mut r = Report::new("verify_eqst", 0);
    r.param("r1", r1).param("r2", r2).param("p", p).param("lambda", lambda).param("grid", spec).param("omega", omega);

    let eval = MorreyEvaluator::new(f, w, params)?;
    let coarse_t = Truncation::for_grid(spec);
    let coarse = CubeFamily::whitney(omega.clone(), r1, r2, coarse_t.clone())?.enumerate_nonempty()?;
    // half-step lattice so that the children of every coarse cube are enumerated
    let fine_t = coarse_t.clone().with_step(spec.h() / 2.0).with_sides(spec.h() / 2.0, coarse_t.max_side);
    let fine_r1 = 2.0 * r1;
    let fine_r2 = 2.0 * (r2 + 1.0);
    let fine = CubeFamily::whitney(omega.clone(), fine_r1, fine_r2, fine_t)?.enumerate_nonempty()?;
    let norm_coarse = eval.norm_over(&coarse)?;
    let norm_fine = eval.norm_over(&fine)?;
    let const_a = 2f64.powf(n * (1.0 - lambda) / p);

    r.measure("coarse_cubes", coarse.len()).measure("fine_cubes", fine.len());
    r.measure_f64("norm_band", norm_coarse.value).measure_f64("norm_finer_band", norm_fine.value);
    r.measure_f64("constant_a", const_a);
    let ratio_a = if norm_fine.value > 0.0 { norm_coarse.value / norm_fine.value } else { f64::NAN };
    r.measure_f64("ratio_a", ratio_a);
    if norm_fine.value > 0.0 {
        r.check(Check::new("one_step_norm_inequality", norm_coarse.value, Relation::Le, const_a * norm_fine.value, REL_HEADROOM));
    } else {
        r.check(Check::new("one_step_norm_inequality", norm_coarse.value, Relation::Eq, 0.0, 0.0));
    }

    // cube by cube: each child is in the finer band, and the parent term is
    // at most the constant times the largest child term
    let mut outside = 0usize;
    let mut worst = (0.0f64, None::<(Cube, Cube)>);
    for q in &coarse {
        let kids = q.children();
        let mut best_kid: Option<(f64, &Cube)> = None;
        for c in &kids {
            if !whitney_member(c, omega, fine_r1, fine_r2)? {
                outside += 1;
            }
            let t = eval.term(c);
            if best_kid.is_none_or(|(b, _)| t > b) {
                best_kid = Some((t, c));
            }
        }
        let (kt, kc) = best_kid.expect("2^n children");
        let tq = eval.term(q);
        if tq > 0.0 {
            let ratio = if kt > 0.0 { tq / kt } else { f64::INFINITY };
            if ratio > worst.0 {
                worst = (ratio, Some((q.clone(), kc.clone())));
            }
        }
    }
    r.check(Check::new("children_outside_finer_band", outside as f64, Relation::Eq, 0.0, 0.0));
    r.measure_f64("worst_subdivision_ratio", worst.0);
    if let Some((q, c)) = &worst.1 {
        r.measure("witness_a", json!({ "cube": cube_value(q), "child": cube_value(c) }));
    }
    r.check(Check::new("subdivision_ratio", worst.0, Relation::Le, const_a, REL_HEADROOM));

    // (b): far band and enclosing dilates
    let (k, a1, a2) = far_band(r1, r2);
    r.measure("iterations", k).measure_f64("alpha1", a1).measure_f64("alpha2", a2);
    let const_b = (a2 / r1).powf(lambda * n / p);
    r.measure_f64("constant_b", const_b);
    let far = match CubeFamily::whitney(omega.clone(), a1, a2, coarse_t)?.enumerate_nonempty() {
        Ok(c) => c,
        Err(CoreError::EmptyFamily) => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    r.measure("far_band_cubes", far.len());
    let mut not_member = 0usize;
    let mut worst_dilation = 0.0f64;
    let mut worst_b = (0.0f64, None::<(Cube, Cube)>);
    let mut t = Table::new("enclosing", &["center", "side", "enclosing_side", "dist_over_diam", "term", "enclosing_term"]);
    for q in &far {
        let big = enclosing_dilate(q, omega, r1)?;
        if !whitney_member(&big, omega, r1, r2)? {
            not_member += 1;
        }
        worst_dilation = worst_dilation.max(big.diam() / q.diam());
        let (tq, tb) = (eval.term(q), eval.term(&big));
        if tq > 0.0 {
            let ratio = if tb > 0.0 { tq / tb } else { f64::INFINITY };
            if ratio > worst_b.0 {
                worst_b = (ratio, Some((q.clone(), big.clone())));
            }
        }
        let center: Vec<String> = q.center().iter().map(|c| cell(*c)).collect();
        t.push(vec![center.join(" "), cell(q.side()), cell(big.side()), cell(ratio_g(&big, omega)?), cell(tq), cell(tb)]);
    }
    r.table(t);
    r.check(Check::new("enclosing_cubes_outside_band", not_member as f64, Relation::Eq, 0.0, 0.0));
    r.check(Check::new("enclosing_dilation", worst_dilation, Relation::Le, a2 / r1, 1e-12));
    r.check(Check::new("enclosing_term_ratio", worst_b.0, Relation::Le, const_b, REL_HEADROOM));
    r.measure_f64("worst_enclosing_ratio", worst_b.0);
    if let Some((q, b)) = &worst_b.1 {
        r.measure("witness_b", json!({ "cube": cube_value(q), "enclosing": cube_value(b) }));
    }
    if !far.is_empty() {
        let nf = eval.norm_over(&far)?.value;
        r.measure_f64("norm_far_band", nf);
        r.measure("norm_far_over_band", if norm_coarse.value > 0.0 { num(nf / norm_coarse.value) } else { num(f64::NAN) });
    }
    Ok(r)
}
