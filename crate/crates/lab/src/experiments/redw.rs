//! Nested cubic annuli inside a cube and the resulting norm domination.
//!
//! With `γ̃ = N/(N+1)`, the annulus `γ̃^k Q ∖ γ̃^{k+1} Q` is tiled by
//! `2ⁿ((N+1)ⁿ − Nⁿ)` cubes of side `γ̃^k ℓ/(2(N+1))`. Annuli are laid down
//! while their cells are at least one grid cell wide; the remaining core
//! `γ̃^K Q` is kept as one more piece so the pieces tile `Q`.

use morrey_core::geometry::{annulus_count, annulus_cover, annulus_distance_bounds, Cube};
use morrey_core::grid::{GridFunction, Weight};
use morrey_core::norms::{MorreyEvaluator, MorreyParams};
use morrey_core::Error as CoreError;
use serde_json::json;

use super::REL_HEADROOM;
use crate::error::Result;
use crate::report::{cell, cube_value, Check, Relation, Report, Table};

/// `|P|^{−λ} ∫_P |f|^p w`, the Morrey term raised to the power `p`.
fn pth_term(eval: &MorreyEvaluator, q: &Cube) -> f64 {
    eval.mass(q) / q.volume().powf(eval.params().lambda())
}

fn overlap_volume(a: &Cube, b: &Cube) -> f64 {
    match a.intersect(b) {
        Some((lo, hi)) => lo.iter().zip(&hi).map(|(l, h)| h - l).product(),
        None => 0.0,
    }
}

pub fn verify_redw(q: &Cube, big_n: u64, f: &GridFunction, w: &Weight, params: MorreyParams) -> Result<Report> {
    if big_n == 0 {
        return Err(CoreError::InvalidParameter("N must be at least 1".into()).into());
    }
    let spec = f.spec();
    if q.dim() != spec.dim() {
        return Err(CoreError::DimensionMismatch { expected: spec.dim(), got: q.dim() }.into());
    }
    let n = q.dim();
    let nf = big_n as f64;
    let gamma = nf / (nf + 1.0);
    let lambda = params.lambda();
    let h = spec.h();
    let first_cell = q.side() / (2.0 * (nf + 1.0));
    if first_cell < h {
        return Err(CoreError::Resolution { needed: first_cell, resolution: h }.into());
    }

    let mut r = Report::new("verify_redw", 0);
    r.param("cube", cube_value(q)).param("N", big_n).param("p", params.p()).param("lambda", lambda).param("grid", spec);
    let expected = annulus_count(n, big_n);
    r.measure("count_per_annulus", expected).measure_f64("gamma", gamma);

    let eval = MorreyEvaluator::new(f, w, params)?;
    let mut annuli: Vec<Vec<Cube>> = Vec::new();
    let mut k = 0i32;
    let mut miscount = 0usize;
    let mut volume_error = 0.0f64;
    let mut lower_fail = 0usize;
    let mut upper_fail = 0usize;
    let mut table = Table::new("annuli", &["k", "cells", "cell_side", "volume", "expected_volume", "max_term"]);
    while q.side() * gamma.powi(k) / (2.0 * (nf + 1.0)) >= h {
        let p = q.dilate(gamma.powi(k + 1))?;
        let cover = annulus_cover(&p, big_n)?;
        if cover.len() as u64 != expected {
            miscount += 1;
        }
        let vol: f64 = cover.iter().map(Cube::volume).sum();
        let want = ((1.0 + 1.0 / nf).powi(n as i32) - 1.0) * p.volume();
        volume_error = volume_error.max((vol - want).abs() / want);
        for l in &cover {
            let (lo, hi) = annulus_distance_bounds(l, q.center(), big_n);
            lower_fail += usize::from(!lo);
            upper_fail += usize::from(!hi);
        }
        let max_term = cover.iter().map(|l| pth_term(&eval, l)).fold(0.0, f64::max);
        table.push(vec![k.to_string(), cover.len().to_string(), cell(cover[0].side()), cell(vol), cell(want), cell(max_term)]);
        annuli.push(cover);
        k += 1;
    }
    let core = q.dilate(gamma.powi(k))?;
    r.table(table);
    r.measure("annuli", annuli.len());
    r.check(Check::new("annuli_with_wrong_count", miscount as f64, Relation::Eq, 0.0, 0.0));
    r.check(Check::new("annulus_volume_relative_error", volume_error, Relation::Le, 1e-12, 0.0));
    r.check(Check::new("lower_distance_violations", lower_fail as f64, Relation::Eq, 0.0, 0.0));
    r.check(Check::new("upper_distance_violations", upper_fail as f64, Relation::Eq, 0.0, 0.0));

    // pieces: every annulus cell plus the core; they tile Q
    let mut pieces: Vec<Cube> = annuli.iter().flatten().cloned().collect();
    pieces.push(core.clone());
    let mut overlap = 0.0f64;
    for (i, a) in pieces.iter().enumerate() {
        for b in &pieces[i + 1..] {
            overlap = overlap.max(overlap_volume(a, b));
        }
    }
    r.check(Check::new("max_pairwise_overlap_over_volume", overlap / q.volume(), Relation::Le, 1e-12, 0.0));
    let tiled: f64 = pieces.iter().map(Cube::volume).sum();
    r.check(Check::new("pieces_volume_over_cube", tiled / q.volume(), Relation::Eq, 1.0, 1e-12));

    let lhs = pth_term(&eval, q);
    let mass_sum: f64 = pieces.iter().map(|l| eval.mass(l)).sum();
    r.measure_f64("lhs", lhs);
    r.check(Check::new("pieces_mass_sum", mass_sum, Relation::Eq, eval.mass(q), 1e-10));

    let count = expected as f64;
    let c_series = count * (2.0 * (nf + 1.0)).powf(-lambda * n as f64) / (1.0 - gamma.powf(lambda * n as f64));
    let c_construct: f64 = pieces.iter().map(|l| (l.volume() / q.volume()).powf(lambda)).sum();
    r.measure_f64("c_series", c_series).measure_f64("c_construct", c_construct);
    r.check(Check::new("construction_constant", c_construct, Relation::Le, c_series, REL_HEADROOM));

    let mut best: Option<(f64, &Cube)> = None;
    for l in &pieces {
        let t = pth_term(&eval, l);
        if best.is_none_or(|(b, _)| t > b) {
            best = Some((t, l));
        }
    }
    let (max_piece, arg) = best.expect("core is always a piece");
    r.measure_f64("max_piece_term", max_piece).measure("max_piece", cube_value(arg));
    if max_piece > 0.0 {
        r.check(Check::new("norm_domination", lhs, Relation::Le, c_series * max_piece, REL_HEADROOM));
    } else {
        r.check(Check::new("norm_domination", lhs, Relation::Eq, 0.0, 0.0));
    }
    let annulus_max = annuli.iter().flatten().map(|l| pth_term(&eval, l)).fold(0.0, f64::max);
    if annulus_max > 0.0 {
        r.measure_f64("empirical_c", lhs / annulus_max);
    }
    r.measure("core", json!({ "cube": cube_value(&core), "term": pth_term(&eval, &core) }));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use morrey_core::grid::GridSpec;

    fn run(n: usize, big_n: u64) -> Report {
        let spec = GridSpec::centered(n, 1.0, 32).unwrap();
        let f = GridFunction::constant(spec.clone(), 1.0).unwrap();
        let q = Cube::new(vec![0.0; n], 2.0).unwrap();
        verify_redw(&q, big_n, &f, &Weight::uniform(spec), MorreyParams::new(2.0, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn planar_count_is_twelve() {
        let r = run(2, 1);
        assert!(r.passed, "{:#?}", r.failed_checks().collect::<Vec<_>>());
        assert_eq!(r.measured["count_per_annulus"], 12);
    }

    #[test]
    fn line_count_is_two() {
        let r = run(1, 2);
        assert!(r.passed, "{:#?}", r.failed_checks().collect::<Vec<_>>());
        assert_eq!(r.measured["count_per_annulus"], 2);
        let c = r.measured["empirical_c"].as_f64().unwrap();
        assert!(c <= r.measured["c_series"].as_f64().unwrap());
    }

    #[test]
    fn too_fine_is_a_resolution_error() {
        let spec = GridSpec::centered(1, 1.0, 8).unwrap();
        let f = GridFunction::constant(spec.clone(), 1.0).unwrap();
        let q = Cube::new(vec![0.0], 0.5).unwrap();
        let e = verify_redw(&q, 3, &f, &Weight::uniform(spec), MorreyParams::new(2.0, 0.5).unwrap()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
