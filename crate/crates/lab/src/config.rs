//! TOML run configuration.
//!
//! Every subcommand reads the same file layout; each experiment uses the
//! sections it needs and reports a configuration error when one is missing.

use std::path::{Path, PathBuf};

use morrey_core::geometry::{
    generate_lacunary_1d, generate_lacunary_sphere, CubeFamily, CubePredicate, DyadicLattice, PointSet, Truncation,
};
use morrey_core::grid::{io, sample_power_weight, GridFunction, GridSpec, Weight};
use morrey_core::norms::MorreyParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub grid: Option<GridConfig>,
    pub params: Option<ParamsConfig>,
    pub function: Option<FieldSpec>,
    pub weight: Option<FieldSpec>,
    pub family: Option<FamilySpec>,
    pub maximal: Option<MaximalConfig>,
    pub eqst: Option<EqstConfig>,
    pub redw: Option<RedwConfig>,
    pub key_property: Option<KeyPropertyConfig>,
    pub connect: Option<ConnectConfig>,
    pub scan: Option<ScanConfig>,
}

fn missing(section: &str) -> LabError {
    LabError::config(format!("missing [{section}] section"))
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        self.grid.as_ref().ok_or_else(|| missing("grid"))?.spec()
    }

    pub fn params(&self) -> Result<MorreyParams> {
        let p = self.params.as_ref().ok_or_else(|| missing("params"))?;
        Ok(MorreyParams::new(p.p, p.lambda)?)
    }

    /// `p` alone, for experiments that do not need `λ`.
    pub fn p(&self) -> Result<f64> {
        Ok(self.params.as_ref().ok_or_else(|| missing("params"))?.p)
    }

    pub fn function(&self, spec: &GridSpec) -> Result<GridFunction> {
        self.function.as_ref().ok_or_else(|| missing("function"))?.sample(spec, self.seed)
    }

    /// The `[weight]` section, or the uniform weight when it is absent.
    pub fn weight(&self, spec: &GridSpec) -> Result<Weight> {
        match &self.weight {
            Some(w) => w.sample_weight(spec, self.seed.wrapping_add(1)),
            None => Ok(Weight::uniform(spec.clone())),
        }
    }

    pub fn family(&self, spec: &GridSpec) -> Result<CubeFamily> {
        self.family.as_ref().ok_or_else(|| missing("family"))?.build(spec)
    }

    pub fn section<'a, T>(&self, value: &'a Option<T>, name: &str) -> Result<&'a T> {
        value.as_ref().ok_or_else(|| missing(name))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub corner: Vec<f64>,
    pub h: f64,
    pub cells: Vec<usize>,
}

impl GridConfig {
    pub fn spec(&self) -> Result<GridSpec> {
        Ok(GridSpec::new(self.corner.clone(), self.h, self.cells.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub p: f64,
    #[serde(default = "half")]
    pub lambda: f64,
}

fn half() -> f64 {
    0.5
}

/// A grid function description that can be sampled on any grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant {
        value: f64,
    },
    /// Indicator of the cells whose centers lie in the cube.
    Indicator {
        center: Vec<f64>,
        side: f64,
    },
    /// `|x − center|^a`, center defaulting to the origin.
    Power {
        a: f64,
        center: Option<Vec<f64>>,
    },
    /// `direction·x + offset`.
    Ramp {
        direction: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// Seeded uniform values on a coarse `base_cells`-per-axis partition of the
    /// grid box, so the same function is reproduced on every refinement.
    RandomCells {
        base_cells: usize,
        #[serde(default = "minus_one")]
        low: f64,
        #[serde(default = "one")]
        high: f64,
        #[serde(default)]
        stream: u64,
    },
    /// Grid file in the binary (`.mgrd`) or CSV format; its grid must match.
    GridFile {
        path: PathBuf,
    },
}

fn minus_one() -> f64 {
    -1.0
}

fn one() -> f64 {
    1.0
}

impl FieldSpec {
    pub fn sample(&self, spec: &GridSpec, seed: u64) -> Result<GridFunction> {
        let n = spec.dim();
        let dim_check = |v: &[f64], what: &str| {
            if v.len() != n {
                return Err(LabError::config(format!("{what} has {} coordinates, grid dimension is {n}", v.len())));
            }
            Ok(())
        };
        Ok(match self {
            FieldSpec::Constant { value } => GridFunction::constant(spec.clone(), *value)?,
            FieldSpec::Indicator { center, side } => {
                dim_check(center, "indicator center")?;
                let q = morrey_core::geometry::Cube::new(center.clone(), *side)?;
                GridFunction::indicator(spec.clone(), &q)?
            }
            FieldSpec::Power { a, center } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; n]);
                dim_check(&c, "power center")?;
                let c2 = c.clone();
                let a = *a;
                GridFunction::from_fn(spec.clone(), move |x| {
                    let r = x.iter().zip(&c2).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
                    if a == 0.0 { 1.0 } else { r.powf(a) }
                })?
            }
            FieldSpec::Ramp { direction, offset } => {
                dim_check(direction, "ramp direction")?;
                GridFunction::from_fn(spec.clone(), |x| x.iter().zip(direction).map(|(u, d)| u * d).sum::<f64>() + offset)?
            }
            FieldSpec::RandomCells { base_cells, low, high, stream } => random_cells(spec, *base_cells, *low, *high, seed, *stream)?,
            FieldSpec::GridFile { path } => {
                let (f, _) = read_grid_file(path)?;
                if f.spec() != spec {
                    return Err(LabError::config(format!("grid file {} does not match the configured grid", path.display())));
                }
                f
            }
        })
    }

    pub fn sample_weight(&self, spec: &GridSpec, seed: u64) -> Result<Weight> {
        match self {
            FieldSpec::Power { a, center } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; spec.dim()]);
                Ok(sample_power_weight(*a, &c, spec)?)
            }
            other => Ok(Weight::new(other.sample(spec, seed)?)?),
        }
    }
}

pub fn read_grid_file(path: &Path) -> Result<(GridFunction, String)> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    Ok(if is_csv { io::read_csv(reader)? } else { io::read_binary(reader)? })
}

fn random_cells(spec: &GridSpec, base: usize, low: f64, high: f64, seed: u64, stream: u64) -> Result<GridFunction> {
    if base == 0 || spec.cells().iter().any(|&m| m % base != 0) {
        return Err(LabError::config(format!("base_cells={base} must divide every grid axis {:?}", spec.cells())));
    }
    if !(low < high) {
        return Err(LabError::config("random_cells needs low < high"));
    }
    let n = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let base_values: Vec<f64> = (0..base.pow(n as u32)).map(|_| rng.gen_range(low..high)).collect();
    let values = (0..spec.len())
        .map(|k| {
            let idx = spec.multi_index(k);
            let flat = idx.iter().enumerate().fold(0, |acc, (a, &i)| acc * base + i * base / spec.cells()[a]);
            base_values[flat]
        })
        .collect();
    Ok(GridFunction::new(spec.clone(), values)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointsSpec {
    Explicit {
        points: Vec<Vec<f64>>,
    },
    /// `{0} ∪ {±γ^j}` on the line, `γ = ν/(ν−1)`.
    Lacunary {
        nu: f64,
        jmin: i32,
        jmax: i32,
    },
    /// Greedy packings of the spheres of radius `γ^j`.
    LacunarySphere {
        nu: f64,
        n: usize,
        jmin: i32,
        jmax: i32,
        #[serde(default = "default_mesh")]
        mesh_resolution: usize,
    },
}

fn default_mesh() -> usize {
    720
}

impl PointsSpec {
    pub fn build(&self) -> Result<PointSet> {
        Ok(match self {
            PointsSpec::Explicit { points } => PointSet::new(points.clone())?,
            PointsSpec::Lacunary { nu, jmin, jmax } => generate_lacunary_1d(*nu, *jmin, *jmax)?,
            PointsSpec::LacunarySphere { nu, n, jmin, jmax, mesh_resolution } => {
                generate_lacunary_sphere(*nu, *n, *jmin, *jmax, *mesh_resolution)?.points
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    AllCubes {
        min_side: Option<f64>,
        max_side: Option<f64>,
    },
    CenteredAt {
        points: PointsSpec,
    },
    Whitney {
        points: PointsSpec,
        r1: f64,
        r2: f64,
    },
    Dyadic {
        shift: Vec<u8>,
        #[serde(default = "all_predicate")]
        predicate: CubePredicate,
    },
}

fn all_predicate() -> CubePredicate {
    CubePredicate::All
}

impl FamilySpec {
    pub fn build(&self, spec: &GridSpec) -> Result<CubeFamily> {
        let t = Truncation::for_grid(spec);
        Ok(match self {
            FamilySpec::AllCubes { min_side, max_side } => {
                let (lo, hi) = (min_side.unwrap_or(t.min_side), max_side.unwrap_or(t.max_side));
                CubeFamily::all_cubes(t.with_sides(lo, hi))?
            }
            FamilySpec::CenteredAt { points } => CubeFamily::centered_at(points.build()?, t)?,
            FamilySpec::Whitney { points, r1, r2 } => CubeFamily::whitney(points.build()?, *r1, *r2, t)?,
            FamilySpec::Dyadic { shift, predicate } => {
                let lattice = DyadicLattice::new(shift.clone(), spec)?;
                let root = lattice.side(0);
                CubeFamily::dyadic(lattice, predicate.clone(), t.with_sides(spec.h(), root))?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Exact,
    GridCubes,
    Dyadic,
    ThreeLattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaximalConfig {
    pub operator: OperatorKind,
    /// Lattice shift digits for the dyadic operator (default unshifted).
    pub shift: Option<Vec<u8>>,
    pub restriction: Option<CubePredicate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EqstConfig {
    pub omega: PointsSpec,
    pub r1: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedwConfig {
    pub center: Vec<f64>,
    pub side: f64,
    pub big_n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyPropertyConfig {
    pub points: PointsSpec,
    pub nu: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectConfig {
    pub points: PointsSpec,
    pub nu: f64,
    /// Number of grids, each doubling the resolution of `[grid]`.
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_levels() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Power-weight exponents `a` of the catalog `|x|^a`.
    #[serde(default = "default_exponents")]
    pub exponents: Vec<f64>,
    /// Window half-widths `W₀·2^k`, `k < levels`, at fixed resolution.
    #[serde(default = "default_scan_levels")]
    pub levels: usize,
    #[serde(default = "one")]
    pub base_half_width: f64,
    /// Cells of the first window; must be a power of two.
    #[serde(default = "default_scan_cells")]
    pub base_cells: usize,
    #[serde(default = "default_stability")]
    pub stability: f64,
    #[serde(default = "default_growth")]
    pub growth: f64,
    #[serde(default = "default_random_fields")]
    pub random_fields: usize,
}

fn default_exponents() -> Vec<f64> {
    vec![-0.5, 0.0, 0.5, 1.5, 2.0]
}

fn default_scan_levels() -> usize {
    4
}

fn default_scan_cells() -> usize {
    256
}

fn default_stability() -> f64 {
    1.05
}

fn default_growth() -> f64 {
    1.2
}

fn default_random_fields() -> usize {
    4
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            exponents: default_exponents(),
            levels: default_scan_levels(),
            base_half_width: 1.0,
            base_cells: default_scan_cells(),
            stability: default_stability(),
            growth: default_growth(),
            random_fields: default_random_fields(),
        }
    }
}
