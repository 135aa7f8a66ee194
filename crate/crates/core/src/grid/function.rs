use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::spec::GridSpec;
use super::table::SummedTable;
use crate::error::{invalid, Error, Result};
use crate::geometry::Cube;

/// Piecewise-constant function: `values[k]` is its value on cell `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridMismatch(format!("{} values for a grid of {} cells", values.len(), spec.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("grid values must be finite"));
        }
        Ok(GridFunction { spec, values })
    }

    pub fn constant(spec: GridSpec, c: f64) -> Result<Self> {
        let len = spec.len();
        GridFunction::new(spec, vec![c; len])
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..spec.len()).map(|k| f(&spec.cell_center(&spec.multi_index(k)))).collect();
        GridFunction::new(spec, values)
    }

    /// Indicator of the cells whose centers lie in the closed cube.
    pub fn indicator(spec: GridSpec, q: &Cube) -> Result<Self> {
        GridFunction::from_fn(spec, |x| if q.contains_point(x) { 1.0 } else { 0.0 })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(self.spec.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> GridFunction {
        GridFunction { spec: self.spec.clone(), values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction { spec: self.spec.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        GridFunction::new(self.spec.clone(), self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch("functions live on different grids".into()));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn table(&self) -> SummedTable {
        SummedTable::new(&self.spec, &self.values)
    }
}

/// Nonnegative grid function that is not identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFunction", into = "GridFunction")]
pub struct Weight(GridFunction);

impl TryFrom<GridFunction> for Weight {
    type Error = Error;

    fn try_from(f: GridFunction) -> Result<Self> {
        Weight::new(f)
    }
}

impl From<Weight> for GridFunction {
    fn from(w: Weight) -> Self {
        w.0
    }
}

impl Weight {
    pub fn new(f: GridFunction) -> Result<Self> {
        if f.values.iter().any(|&v| v < 0.0) {
            return Err(invalid("weight must be nonnegative"));
        }
        if f.is_zero() {
            return Err(invalid("weight must not vanish identically"));
        }
        Ok(Weight(f))
    }

    pub fn uniform(spec: GridSpec) -> Self {
        Weight(GridFunction::constant(spec, 1.0).expect("constant is finite"))
    }

    pub fn function(&self) -> &GridFunction {
        &self.0
    }
}

impl Deref for Weight {
    type Target = GridFunction;

    fn deref(&self) -> &GridFunction {
        &self.0
    }
}

/// Cellwise `|f|^p · w`, the integrand of the weighted `L^p` and Morrey norms.
pub fn weighted_power(f: &GridFunction, w: &Weight, p: f64) -> Result<GridFunction> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("exponent p must be at least 1, got {p}")));
    }
    f.check_same_grid(w)?;
    f.zip_with(w, |a, b| if a == 0.0 { 0.0 } else { a.abs().powf(p) * b })
}

/// `∫_Q f` for the piecewise-constant extension of `f` (zero outside the box).
pub fn cube_integral(f: &GridFunction, q: &Cube) -> f64 {
    f.table().cube_integral(q)
}

/// `⟨f⟩_Q = |Q|⁻¹ ∫_Q f` with the full cube volume.
pub fn cube_average(f: &GridFunction, q: &Cube) -> f64 {
    f.table().cube_average(q)
}

/// `∫_Q |f|^p w`.
pub fn weighted_p_mass(f: &GridFunction, w: &Weight, p: f64, q: &Cube) -> Result<f64> {
    Ok(weighted_power(f, w, p)?.table().cube_integral(q))
}

/// `w(x) = |x − center|^a` sampled at cell centers.
pub fn sample_power_weight(a: f64, center: &[f64], spec: &GridSpec) -> Result<Weight> {
    if center.len() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: center.len() });
    }
    if !a.is_finite() {
        return Err(invalid("power exponent must be finite"));
    }
    let mut values = Vec::with_capacity(spec.len());
    for k in 0..spec.len() {
        let idx = spec.multi_index(k);
        let x = spec.cell_center(&idx);
        let r = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if r == 0.0 && a != 0.0 {
            return Err(Error::SingularSample(idx));
        }
        values.push(if a == 0.0 { 1.0 } else { r.powf(a) });
    }
    Weight::new(GridFunction::new(spec.clone(), values)?)
}
