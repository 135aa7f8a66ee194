//! Characterization scan over a catalog of power weights `|x|^a` on the line.
//!
//! For each weight the window `[−W, W]` doubles at fixed resolution, which by
//! the scale invariance of power weights is the same as refining a fixed
//! window. At every scale the scan records:
//!
//! * `ap_all`: the `A_p` constant over all grid cubes;
//! * `ap_dyadic`: the `A_p` constant over the dyadic cubes `𝒟` inside the window;
//! * `opnorm_lp`: an estimate of `‖M^𝒟‖` on `L^p(w)`;
//! * `ax`: the `A_X` estimate for `X = ℳ^p_{λ,ℱ}(w)`, `ℱ` centered at `{0, ±2^j}`;
//! * `opnorm_morrey`: an estimate of `‖M‖` on the same `X`.
//!
//! Trends are classified from successive ratios of each series. The
//! consistency flags pair each A-constant with the operator it characterizes
//! and require equal flags. A series growing only logarithmically, as at the
//! edge of the Morrey range `a = p − 1 + λ`, is neither stable nor growing
//! by a fixed factor and is reported as indeterminate.

use morrey_core::geometry::{generate_lacunary_1d, Cube, CubeFamily, CubePredicate, DyadicLattice, Truncation};
use morrey_core::grid::{sample_power_weight, GridFunction, GridSpec, Weight};
use morrey_core::maximal::{operator_norm_estimate, MaximalOperator};
use morrey_core::muckenhoupt::{ap_constant, ax_estimate, classify_power_weight, dual_extremal, PowerWeightClass};
use morrey_core::norms::{FunctionSpace, MorreyParams};
use morrey_core::Error as CoreError;
use serde::Serialize;

use crate::config::{FieldSpec, ScanConfig};
use crate::error::Result;
use crate::report::{cell, Check, Report, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Stable,
    Growing,
    Indeterminate,
}

impl Trend {
    fn as_str(self) -> &'static str {
        match self {
            Trend::Stable => "stable",
            Trend::Growing => "growing",
            Trend::Indeterminate => "indeterminate",
        }
    }
}

/// Stable when the last successive ratio is at most `stability`, growing
/// when every ratio is at least `growth`. A non-finite value counts as
/// growth; fewer than two values are indeterminate.
pub fn classify_trend(values: &[f64], stability: f64, growth: f64) -> Trend {
    if values.iter().any(|v| v.is_infinite()) {
        return Trend::Growing;
    }
    if values.len() < 2 || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Trend::Indeterminate;
    }
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    if *ratios.last().expect("two values") <= stability {
        Trend::Stable
    } else if ratios.iter().all(|r| *r >= growth) {
        Trend::Growing
    } else {
        Trend::Indeterminate
    }
}

const QUANTITIES: [&str; 5] = ["ap_all", "ap_dyadic", "opnorm_lp", "ax", "opnorm_morrey"];

fn class_name(c: PowerWeightClass) -> &'static str {
    match c {
        PowerWeightClass::InRange => "in_range",
        PowerWeightClass::Boundary => "boundary",
        PowerWeightClass::OutOfRange => "out_of_range",
    }
}

/// Cubes `[−s/2, s/2]` and `[0, t]`, `[−t, 0]` on dyadic scales of the window.
fn origin_cubes(spec: &GridSpec, half_width: f64) -> Result<Vec<Cube>> {
    let h = spec.h();
    let mut out = Vec::new();
    let mut t = h;
    while t <= half_width {
        out.push(Cube::new(vec![0.0], 2.0 * t)?);
        out.push(Cube::from_lower(&[0.0], t)?);
        out.push(Cube::from_lower(&[-t], t)?);
        t *= 2.0;
    }
    Ok(out)
}

/// `w^{−1/p}|x|^{−n(1−λ)/p}` sampled at cell centers (never at the origin).
fn morrey_extremal(spec: &GridSpec, w: &Weight, params: MorreyParams) -> Result<GridFunction> {
    let b = (1.0 - params.lambda()) / params.p();
    let radial = GridFunction::from_fn(spec.clone(), |x| x[0].abs().powf(-b))?;
    Ok(radial.zip_with(w.function(), |r, wv| r * wv.powf(-1.0 / params.p()))?)
}

fn restrict(f: &GridFunction, q: &Cube) -> Result<GridFunction> {
    Ok(f.zip_with(&GridFunction::indicator(f.spec().clone(), q)?, |a, b| a * b)?)
}

/// Five scan quantities and the corpus members realizing the three estimates.
type ScaleValues = ([f64; 5], [String; 3]);

fn scale_values(spec: &GridSpec, w: &Weight, p: f64, params: MorreyParams, cfg: &ScanConfig, seed: u64) -> Result<ScaleValues> {
    let half_width = spec.extent(0) / 2.0;
    let trunc = Truncation::for_grid(spec);

    let all = CubeFamily::all_cubes(trunc.clone())?;
    let ap_all = ap_constant(w, p, &all)?.value;

    let lattice = DyadicLattice::new(vec![0], spec)?;
    let inside = CubePredicate::WithinBox { corner: spec.corner().to_vec(), extent: vec![spec.extent(0)] };
    let dyadic = CubeFamily::dyadic(lattice, inside, trunc.clone())?;

    // L^p(w): dual extremals and indicators of the dyadic cubes within one
    // side length of the origin (the scale-invariant extremals of a power
    // weight) and of the A_p maximizer, plus random fields
    let ap_dyadic_report = ap_constant(w, p, &dyadic)?;
    let mut lp_cubes: Vec<Cube> = dyadic
        .enumerate_nonempty()?
        .into_iter()
        .filter(|q| q.lower(0).abs().min(q.upper(0).abs()) <= q.side() || q.contains_point(&[0.0]))
        .collect();
    if !lp_cubes.contains(&ap_dyadic_report.argmax) {
        lp_cubes.push(ap_dyadic_report.argmax.clone());
    }
    let mut lp_corpus = Vec::new();
    let mut lp_names = Vec::new();
    for q in &lp_cubes {
        let tag = format!("[{}, {}]", cell(q.lower(0)), cell(q.upper(0)));
        lp_corpus.push(dual_extremal(w, p, q)?);
        lp_names.push(format!("dual extremal {tag}"));
        lp_corpus.push(GridFunction::indicator(spec.clone(), q)?);
        lp_names.push(format!("indicator {tag}"));
    }
    let random = |stream: u64| FieldSpec::RandomCells { base_cells: 8, low: 0.0, high: 1.0, stream }.sample(spec, seed);
    for s in 0..cfg.random_fields as u64 {
        lp_corpus.push(random(200 + s)?);
        lp_names.push(format!("random {s}"));
    }
    let lebesgue = FunctionSpace::Lebesgue { weight: w, p };
    let lp_op = operator_norm_estimate(&MaximalOperator::FamilyDyadic { family: dyadic }, &lebesgue, &lp_corpus)?;
    let opnorm_lp = lp_op.value;
    let ap_dyadic = ap_dyadic_report.value;

    // Morrey space over the lacunary-centered family
    let jmin = spec.h().log2().floor() as i32;
    let jmax = half_width.log2().ceil() as i32;
    let points = generate_lacunary_1d(2.0, jmin, jmax)?;
    let centered = CubeFamily::centered_at(points, trunc)?.enumerate_nonempty()?;
    let morrey = FunctionSpace::Morrey { weight: w, params, cubes: &centered };
    // scale-invariant extremal: |f|^p w = |x|^{-n(1-λ)} has Morrey terms equal on every centered cube
    let extremal = morrey_extremal(spec, w, params)?;
    let mut corpus = Vec::new();
    let mut names = Vec::new();
    for q in origin_cubes(spec, half_width)? {
        let tag = format!("[{}, {}]", cell(q.lower(0)), cell(q.upper(0)));
        corpus.push(dual_extremal(w, p, &q)?);
        names.push(format!("dual extremal {tag}"));
        corpus.push(GridFunction::indicator(spec.clone(), &q)?);
        names.push(format!("indicator {tag}"));
        corpus.push(restrict(&extremal, &q)?);
        names.push(format!("Morrey extremal {tag}"));
    }
    for sign in [1.0, -1.0] {
        corpus.push(FieldSpec::Ramp { direction: vec![sign / half_width], offset: 0.0 }.sample(spec, seed)?);
        names.push(format!("ramp {sign}"));
    }
    for s in 0..cfg.random_fields as u64 {
        corpus.push(random(300 + s)?);
        names.push(format!("random {s}"));
    }
    let ax_est = ax_estimate(&morrey, &centered, &corpus)?;
    let ax = ax_est.value;
    let grid_cubes = CubeFamily::all_cubes(Truncation::for_grid(spec))?;
    let op = operator_norm_estimate(&MaximalOperator::GridCubes { family: grid_cubes }, &morrey, &corpus)?;
    let opnorm_morrey = op.value;
    let extremals = [lp_names[lp_op.argmax].clone(), names[ax_est.argmax_function].clone(), names[op.argmax].clone()];
    Ok(([ap_all, ap_dyadic, opnorm_lp, ax, opnorm_morrey], extremals))
}

fn scan_weight(a: f64, params: MorreyParams, cfg: &ScanConfig, seed: u64) -> Result<Vec<(GridSpec, ScaleValues)>> {
    let h = 2.0 * cfg.base_half_width / cfg.base_cells as f64;
    let mut rows = Vec::with_capacity(cfg.levels);
    for level in 0..cfg.levels {
        let k = 1usize << level;
        let half_width = cfg.base_half_width * k as f64;
        let spec = GridSpec::new(vec![-half_width], h, vec![cfg.base_cells * k])?;
        let w = sample_power_weight(a, &[0.0], &spec)?;
        rows.push((spec.clone(), scale_values(&spec, &w, params.p(), params, cfg, seed)?));
    }
    Ok(rows)
}

pub fn scan_characterization(cfg: &ScanConfig, params: MorreyParams, seed: u64) -> Result<Report> {
    if cfg.levels < 2 || !cfg.base_cells.is_power_of_two() || !(cfg.base_half_width > 0.0) {
        return Err(CoreError::InvalidParameter(
            "scan needs at least two levels, a power-of-two base cell count and a positive half-width".into(),
        )
        .into());
    }
    let p = params.p();
    let mut r = Report::new("scan", seed);
    r.param("scan", cfg).param("p", p).param("lambda", params.lambda()).param("n", 1);
    let mut columns = vec!["a", "label", "level", "half_width", "cells"];
    columns.extend(QUANTITIES);
    columns.extend(["opnorm_lp_extremal", "ax_extremal", "opnorm_morrey_extremal"]);
    let mut constants = Table::new("constants", &columns);
    let mut tcols = vec!["a", "label"];
    tcols.extend(QUANTITIES);
    tcols.extend(["lp_consistent", "morrey_consistent", "label_consistent"]);
    let mut trends = Table::new("trends", &tcols);
    let mut errors = serde_json::Map::new();

    for &a in &cfg.exponents {
        let class = classify_power_weight(a, p, 1);
        let label = class_name(class);
        let key = format!("a={a}");
        let rows = match scan_weight(a, params, cfg, seed) {
            Ok(rows) => rows,
            Err(e) => {
                errors.insert(key.clone(), e.to_string().into());
                r.check(Check::flag(format!("{key}: scan completed"), false));
                continue;
            }
        };
        for (level, (spec, (v, ext))) in rows.iter().enumerate() {
            let mut row = vec![cell(a), label.to_string(), level.to_string(), cell(spec.extent(0) / 2.0), spec.cells()[0].to_string()];
            row.extend(v.iter().map(|x| cell(*x)));
            row.extend(ext.iter().cloned());
            constants.push(row);
        }
        let flags: Vec<Trend> = (0..QUANTITIES.len())
            .map(|i| {
                let series: Vec<f64> = rows.iter().map(|(_, (v, _))| v[i]).collect();
                classify_trend(&series, cfg.stability, cfg.growth)
            })
            .collect();
        let lp_ok = flags[1] == flags[2];
        let morrey_ok = flags[3] == flags[4];
        let expected = match class {
            PowerWeightClass::InRange => Some(Trend::Stable),
            PowerWeightClass::OutOfRange => Some(Trend::Growing),
            PowerWeightClass::Boundary => None,
        };
        let label_ok = expected.is_none_or(|t| t == flags[0]);
        let mut row = vec![cell(a), label.to_string()];
        row.extend(flags.iter().map(|t| t.as_str().to_string()));
        row.extend([lp_ok, morrey_ok, label_ok].map(|b| b.to_string()));
        trends.push(row);
        r.check(Check::flag(format!("{key}: A_p and L^p operator trends agree"), lp_ok));
        r.check(Check::flag(format!("{key}: A_X and Morrey operator trends agree"), morrey_ok));
        r.check(Check::flag(format!("{key}: A_p trend matches the power-weight label"), label_ok));
    }
    if !errors.is_empty() {
        r.measure("errors", errors);
    }
    r.table(constants).table(trends);
    Ok(r)
}
