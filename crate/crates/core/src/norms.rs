//! Morrey and weighted Lebesgue norms over cube families.
//!
//! The Morrey term of a cube is `(|Q|^{-λ} ∫_Q |f|^p w)^{1/p}`; the norm is the
//! maximum over a family's finite enumeration, with the maximizing cube
//! reported under the deterministic tie-break of [`Cube::tie_order`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{better, Cube, CubeFamily};
use crate::grid::{weighted_power, GridFunction, SummedTable, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct MorreyParams {
    p: f64,
    lambda: f64,
}

#[derive(Deserialize)]
struct RawParams {
    p: f64,
    lambda: f64,
}

impl TryFrom<RawParams> for MorreyParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        MorreyParams::new(r.p, r.lambda)
    }
}

impl MorreyParams {
    pub fn new(p: f64, lambda: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(invalid(format!("Morrey exponent p must exceed 1, got {p}")));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(invalid(format!("Morrey scaling λ must lie in (0,1), got {lambda}")));
        }
        Ok(MorreyParams { p, lambda })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `(mass / |Q|^λ)^{1/p}`.
    pub fn term(&self, mass: f64, q: &Cube) -> f64 {
        (mass / q.volume().powf(self.lambda)).powf(1.0 / self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub argmax: Cube,
    pub cubes_examined: usize,
}

/// Precomputed `|f|^p w` table for evaluating many Morrey terms of one function.
#[derive(Debug, Clone)]
pub struct MorreyEvaluator {
    params: MorreyParams,
    table: SummedTable,
}

impl MorreyEvaluator {
    pub fn new(f: &GridFunction, w: &Weight, params: MorreyParams) -> Result<Self> {
        let table = weighted_power(f, w, params.p)?.table();
        Ok(MorreyEvaluator { params, table })
    }

    pub fn params(&self) -> MorreyParams {
        self.params
    }

    /// `∫_Q |f|^p w`.
    pub fn mass(&self, q: &Cube) -> f64 {
        self.table.cube_integral(q)
    }

    /// `∫_{Q∩K} |f|^p w`.
    pub fn restricted_mass(&self, q: &Cube, k: &Cube) -> f64 {
        match q.intersect(k) {
            Some((lo, hi)) => self.table.box_integral(&lo, &hi),
            None => 0.0,
        }
    }

    pub fn term(&self, q: &Cube) -> f64 {
        self.params.term(self.mass(q), q)
    }

    pub fn restricted_term(&self, q: &Cube, k: &Cube) -> f64 {
        self.params.term(self.restricted_mass(q, k), q)
    }

    /// Maximum term over `cubes`.
    pub fn norm_over(&self, cubes: &[Cube]) -> Result<NormResult> {
        max_over(cubes, |q| self.term(q))
    }

    /// Maximum over `cubes` of the terms of `f·χ_K`.
    pub fn restricted_norm_over(&self, cubes: &[Cube], k: &Cube) -> Result<NormResult> {
        max_over(cubes, |q| self.restricted_term(q, k))
    }
}

/// Parallel evaluation followed by an order-independent argmax.
pub(crate) fn max_over(cubes: &[Cube], term: impl Fn(&Cube) -> f64 + Sync) -> Result<NormResult> {
    if cubes.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let values: Vec<f64> = cubes.par_iter().map(&term).collect();
    let mut best: Option<(f64, &Cube)> = None;
    for (v, q) in values.iter().zip(cubes) {
        if better((*v, q), best) {
            best = Some((*v, q));
        }
    }
    let (value, argmax) = best.expect("nonempty");
    Ok(NormResult { value, argmax: argmax.clone(), cubes_examined: cubes.len() })
}

pub fn morrey_norm(f: &GridFunction, w: &Weight, params: MorreyParams, family: &CubeFamily) -> Result<NormResult> {
    let cubes = family.enumerate_nonempty()?;
    MorreyEvaluator::new(f, w, params)?.norm_over(&cubes)
}

/// `(∫_box |f|^p w)^{1/p}`.
pub fn lp_norm(f: &GridFunction, w: &Weight, p: f64) -> Result<f64> {
    let spec = f.spec();
    let table = weighted_power(f, w, p)?.table();
    let mass = table.block_sum(&vec![0; spec.dim()], spec.cells()) * spec.cell_volume();
    Ok(mass.powf(1.0 / p))
}

/// `‖χ_Q‖ = max_R (w(R∩Q) / |R|^λ)^{1/p}`.
pub fn indicator_norm(q: &Cube, w: &Weight, params: MorreyParams, family: &CubeFamily) -> Result<f64> {
    let one = GridFunction::constant(w.spec().clone(), 1.0)?;
    restricted_norm(&one, w, params, family, q)
}

/// Morrey norm of `f·χ_K`, integrating each family cube over `R∩K`.
pub fn restricted_norm(f: &GridFunction, w: &Weight, params: MorreyParams, family: &CubeFamily, k: &Cube) -> Result<f64> {
    let cubes = family.enumerate_nonempty()?;
    Ok(MorreyEvaluator::new(f, w, params)?.restricted_norm_over(&cubes, k)?.value)
}

/// A function space `X` realized on the grid, either a Morrey space over an
/// explicit cube list or a weighted Lebesgue space.
#[derive(Debug, Clone, Copy)]
pub enum FunctionSpace<'a> {
    Morrey { weight: &'a Weight, params: MorreyParams, cubes: &'a [Cube] },
    Lebesgue { weight: &'a Weight, p: f64 },
}

impl FunctionSpace<'_> {
    pub fn weight(&self) -> &Weight {
        match self {
            FunctionSpace::Morrey { weight, .. } | FunctionSpace::Lebesgue { weight, .. } => weight,
        }
    }

    pub fn p(&self) -> f64 {
        match self {
            FunctionSpace::Morrey { params, .. } => params.p(),
            FunctionSpace::Lebesgue { p, .. } => *p,
        }
    }

    pub fn norm(&self, f: &GridFunction) -> Result<f64> {
        match self {
            FunctionSpace::Morrey { weight, params, cubes } => {
                Ok(MorreyEvaluator::new(f, weight, *params)?.norm_over(cubes)?.value)
            }
            FunctionSpace::Lebesgue { weight, p } => lp_norm(f, weight, *p),
        }
    }

    /// Norm of `f·χ_K`.
    pub fn restricted_norm(&self, f: &GridFunction, k: &Cube) -> Result<f64> {
        self.restricted_evaluator(f)?.norm(k)
    }

    /// `‖χ_Q‖`.
    pub fn indicator_norm(&self, q: &Cube) -> Result<f64> {
        let one = GridFunction::constant(self.weight().spec().clone(), 1.0)?;
        self.restricted_norm(&one, q)
    }

    /// Reusable evaluator of `‖f·χ_K‖` for a fixed `f` and varying `K`.
    pub fn restricted_evaluator(&self, f: &GridFunction) -> Result<RestrictedEvaluator<'_>> {
        let p = self.p();
        let table = weighted_power(f, self.weight(), p)?.table();
        Ok(RestrictedEvaluator { space: *self, table })
    }
}

pub struct RestrictedEvaluator<'a> {
    space: FunctionSpace<'a>,
    table: SummedTable,
}

impl RestrictedEvaluator<'_> {
    pub fn norm(&self, k: &Cube) -> Result<f64> {
        match self.space {
            FunctionSpace::Morrey { params, cubes, .. } => {
                if cubes.is_empty() {
                    return Err(Error::EmptyFamily);
                }
                let mut best = 0.0f64;
                for r in cubes {
                    if let Some((lo, hi)) = r.intersect(k) {
                        best = best.max(params.term(self.table.box_integral(&lo, &hi), r));
                    }
                }
                Ok(best)
            }
            FunctionSpace::Lebesgue { p, .. } => Ok(self.table.cube_integral(k).powf(1.0 / p)),
        }
    }
}
