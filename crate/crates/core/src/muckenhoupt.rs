//! Muckenhoupt `A_{p,ℱ}` constants and corpus estimators of the `A_X` condition.
//!
//! `[w]_{A_{p,ℱ}} = max_Q ⟨w⟩_Q ⟨σ⟩_Q^{p−1}` with `σ = w^{−1/(p−1)}`, both
//! averages over the full cube volume. The `A_X` estimator evaluates the
//! primal ratio `⟨|f|⟩_Q ‖χ_Q‖_X / ‖fχ_Q‖_X` on a finite corpus and is only a
//! lower bound for the true constant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{better, Cube, CubeFamily};
use crate::grid::{GridFunction, Weight};
use crate::norms::{FunctionSpace, MorreyParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    pub value: f64,
    pub argmax: Cube,
    /// Per-cube terms in enumeration order, when requested.
    pub terms: Option<Vec<(Cube, f64)>>,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("A_p exponent must exceed 1, got {p}")));
    }
    Ok(())
}

/// `σ = w^{−1/(p−1)}` cellwise; cells where `w = 0` get `0`.
pub fn dual_weight(w: &Weight, p: f64) -> Result<GridFunction> {
    check_p(p)?;
    let e = -1.0 / (p - 1.0);
    w.map(|v| if v > 0.0 { v.powf(e) } else { 0.0 })
}

/// The extremal `σχ_Q` sampled on the grid (cells whose centers lie in `Q`).
pub fn dual_extremal(w: &Weight, p: f64, q: &Cube) -> Result<GridFunction> {
    let sigma = dual_weight(w, p)?;
    let chi = GridFunction::indicator(w.spec().clone(), q)?;
    sigma.zip_with(&chi, |a, b| a * b)
}

pub fn ap_constant(w: &Weight, p: f64, family: &CubeFamily) -> Result<ApReport> {
    ap_over_cubes(w, p, &family.enumerate_nonempty()?, false)
}

/// `A_p` constant over an explicit cube list, optionally keeping every term.
pub fn ap_over_cubes(w: &Weight, p: f64, cubes: &[Cube], keep_terms: bool) -> Result<ApReport> {
    check_p(p)?;
    if cubes.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let w_table = w.table();
    let s_table = dual_weight(w, p)?.table();
    let zeros = w.map(|v| if v > 0.0 { 0.0 } else { 1.0 })?;
    let z_table = if zeros.is_zero() { None } else { Some(zeros.table()) };
    let terms: Vec<f64> = cubes
        .par_iter()
        .map(|q| {
            if let Some(z) = &z_table {
                if z.cube_integral(q) > 0.0 {
                    return Err(Error::DualWeightUndefined(format!(
                        "weight vanishes on a cell meeting the cube centered at {:?} with side {}",
                        q.center(),
                        q.side()
                    )));
                }
            }
            Ok(w_table.cube_average(q) * s_table.cube_average(q).powf(p - 1.0))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, &Cube)> = None;
    for (v, q) in terms.iter().zip(cubes) {
        if better((*v, q), best) {
            best = Some((*v, q));
        }
    }
    let (value, argmax) = best.expect("nonempty");
    Ok(ApReport {
        value,
        argmax: argmax.clone(),
        terms: keep_terms.then(|| cubes.iter().cloned().zip(terms.iter().copied()).collect()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxEstimate {
    /// Largest ratio found; a lower bound for the `A_X` constant.
    pub value: f64,
    pub argmax_cube: Cube,
    pub argmax_function: usize,
    /// `(Q, f)` pairs skipped because `‖fχ_Q‖ = 0`.
    pub skipped: usize,
}

/// `max ⟨|f|⟩_Q ‖χ_Q‖_X / ‖fχ_Q‖_X` over `test_cubes × corpus`.
pub fn ax_estimate(space: &FunctionSpace, test_cubes: &[Cube], corpus: &[GridFunction]) -> Result<AxEstimate> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if test_cubes.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let chi_norms: Vec<f64> = test_cubes.par_iter().map(|q| space.indicator_norm(q)).collect::<Result<_>>()?;
    let per_function: Vec<(Option<(f64, usize)>, usize)> = corpus
        .par_iter()
        .map(|f| {
            let eval = space.restricted_evaluator(f)?;
            let abs_table = f.abs().table();
            let mut best: Option<(f64, usize)> = None;
            let mut skipped = 0;
            for (qi, q) in test_cubes.iter().enumerate() {
                let denom = eval.norm(q)?;
                if denom == 0.0 {
                    skipped += 1;
                    continue;
                }
                let r = abs_table.cube_average(q) * chi_norms[qi] / denom;
                if best.is_none_or(|(b, bi)| r > b || (r == b && q.tie_order(&test_cubes[bi]).is_lt())) {
                    best = Some((r, qi));
                }
            }
            Ok((best, skipped))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, usize, usize)> = None;
    let mut skipped = 0;
    for (fi, (b, s)) in per_function.into_iter().enumerate() {
        skipped += s;
        if let Some((v, qi)) = b {
            if best.is_none_or(|(bv, _, _)| v > bv) {
                best = Some((v, qi, fi));
            }
        }
    }
    let (value, qi, fi) = best.ok_or(Error::EmptyCorpus)?;
    Ok(AxEstimate { value, argmax_cube: test_cubes[qi].clone(), argmax_function: fi, skipped })
}

/// `A_X` estimate for `X = ℳ^p_{λ,ℱ}(w)`, testing on the cubes of `ℱ` itself.
pub fn ax_constant_estimate(w: &Weight, params: MorreyParams, family: &CubeFamily, corpus: &[GridFunction]) -> Result<AxEstimate> {
    let cubes = family.enumerate_nonempty()?;
    let space = FunctionSpace::Morrey { weight: w, params, cubes: &cubes };
    ax_estimate(&space, &cubes, corpus)
}

/// Expected `A_p(ℝⁿ)` membership of `|x|^a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerWeightClass {
    InRange,
    Boundary,
    OutOfRange,
}

/// `|x|^a ∈ A_p(ℝⁿ)` exactly when `−n < a < n(p−1)`.
pub fn classify_power_weight(a: f64, p: f64, n: usize) -> PowerWeightClass {
    let lo = -(n as f64);
    let hi = n as f64 * (p - 1.0);
    if a == lo || a == hi {
        PowerWeightClass::Boundary
    } else if lo < a && a < hi {
        PowerWeightClass::InRange
    } else {
        PowerWeightClass::OutOfRange
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Truncation;
    use crate::grid::GridSpec;

    fn line(m: usize, len: f64) -> GridSpec {
        GridSpec::new(vec![0.0], len / m as f64, vec![m]).unwrap()
    }

    #[test]
    fn uniform_weight_is_one() {
        let spec = line(8, 1.0);
        let fam = CubeFamily::all_cubes(Truncation::for_grid(&spec)).unwrap();
        let r = ap_constant(&Weight::uniform(spec), 3.0, &fam).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn two_level_weight() {
        let spec = line(4, 2.0);
        let w = Weight::new(GridFunction::from_fn(spec.clone(), |x| if x[0] < 1.0 { 1.0 } else { 4.0 }).unwrap()).unwrap();
        let q = Cube::from_lower(&[0.0], 2.0).unwrap();
        let r = ap_over_cubes(&w, 2.0, &[q], true).unwrap();
        assert!((r.value - 1.5625).abs() < 1e-15);
        assert_eq!(r.terms.unwrap().len(), 1);
    }

    #[test]
    fn zero_weight_rejected() {
        let spec = line(4, 1.0);
        let w = Weight::new(GridFunction::from_fn(spec.clone(), |x| if x[0] < 0.5 { 0.0 } else { 1.0 }).unwrap()).unwrap();
        let fam = CubeFamily::all_cubes(Truncation::for_grid(&spec)).unwrap();
        assert!(matches!(ap_constant(&w, 2.0, &fam), Err(Error::DualWeightUndefined(_))));
        let right = Cube::from_lower(&[0.5], 0.5).unwrap();
        assert_eq!(ap_over_cubes(&w, 2.0, &[right], false).unwrap().value, 1.0);
    }

    #[test]
    fn indicator_corpus_gives_at_least_one() {
        let spec = line(8, 1.0);
        let w = Weight::new(GridFunction::from_fn(spec.clone(), |x| 1.0 + x[0] * x[0]).unwrap()).unwrap();
        let fam = CubeFamily::all_cubes(Truncation::for_grid(&spec)).unwrap();
        let cubes = fam.enumerate().unwrap();
        let corpus: Vec<GridFunction> = cubes.iter().map(|q| GridFunction::indicator(spec.clone(), q).unwrap()).collect();
        let est = ax_constant_estimate(&w, MorreyParams::new(2.0, 0.5).unwrap(), &fam, &corpus).unwrap();
        assert!(est.value >= 1.0 - 1e-12);
    }

    #[test]
    fn lebesgue_extremal_matches_ap() {
        let spec = line(16, 1.0);
        let w = Weight::new(GridFunction::from_fn(spec.clone(), |x| (x[0] + 0.1).powf(0.7)).unwrap()).unwrap();
        let space = FunctionSpace::Lebesgue { weight: &w, p: 2.5 };
        let q = Cube::from_lower(&[0.25], 0.5).unwrap();
        let est = ax_estimate(&space, std::slice::from_ref(&q), &[dual_extremal(&w, 2.5, &q).unwrap()]).unwrap();
        let ap = ap_over_cubes(&w, 2.5, &[q], false).unwrap().value;
        assert!((est.value - ap.powf(1.0 / 2.5)).abs() < 1e-12 * est.value);
    }

    #[test]
    fn classification() {
        assert_eq!(classify_power_weight(0.0, 1.5, 3), PowerWeightClass::InRange);
        assert_eq!(classify_power_weight(1.0, 2.0, 1), PowerWeightClass::Boundary);
        assert_eq!(classify_power_weight(0.5, 2.0, 1), PowerWeightClass::InRange);
        assert_eq!(classify_power_weight(2.0, 2.0, 1), PowerWeightClass::OutOfRange);
        assert_eq!(classify_power_weight(-1.0, 2.0, 1), PowerWeightClass::Boundary);
    }
}
