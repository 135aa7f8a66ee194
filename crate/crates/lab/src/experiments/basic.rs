use morrey_core::geometry::{build_shifted_lattices, CubeFamily, DyadicLattice, Truncation};
use morrey_core::maximal::{maximal_dyadic, maximal_exact, maximal_grid_cubes, three_lattice_bound};
use morrey_core::muckenhoupt::{ap_constant, ax_constant_estimate};
use morrey_core::norms::{lp_norm, morrey_norm};

use super::{generic_corpus, subsample};
use crate::config::{Config, OperatorKind};
use crate::error::Result;
use crate::report::{cell, cube_value, num, Check, Relation, Report, Table};

fn base_report(name: &str, cfg: &Config) -> Result<Report> {
    let mut r = Report::new(name, cfg.seed);
    r.param("grid", cfg.section(&cfg.grid, "grid")?);
    if let Some(p) = &cfg.params {
        r.param("params", p);
    }
    if let Some(f) = &cfg.function {
        r.param("function", f);
    }
    if let Some(w) = &cfg.weight {
        r.param("weight", w);
    }
    if let Some(fam) = &cfg.family {
        r.param("family", fam);
    }
    Ok(r)
}

pub fn run_norm(cfg: &Config) -> Result<Report> {
    let spec = cfg.grid()?;
    let params = cfg.params()?;
    let f = cfg.function(&spec)?;
    let w = cfg.weight(&spec)?;
    let family = cfg.family(&spec)?;
    let res = morrey_norm(&f, &w, params, &family)?;
    let mut r = base_report("norm", cfg)?;
    r.measure_f64("morrey_norm", res.value)
        .measure("argmax", cube_value(&res.argmax))
        .measure("cubes_examined", res.cubes_examined)
        .measure_f64("lp_norm", lp_norm(&f, &w, params.p())?);
    Ok(r)
}

pub fn run_maximal(cfg: &Config) -> Result<Report> {
    let spec = cfg.grid()?;
    let f = cfg.function(&spec)?;
    let mc = cfg.section(&cfg.maximal, "maximal")?;
    let field = match mc.operator {
        OperatorKind::Exact => maximal_exact(&f, &cfg.family(&spec)?)?,
        OperatorKind::GridCubes => maximal_grid_cubes(&f, &CubeFamily::all_cubes(Truncation::for_grid(&spec))?)?,
        OperatorKind::Dyadic => {
            let shift = mc.shift.clone().unwrap_or_else(|| vec![0; spec.dim()]);
            maximal_dyadic(&f, &DyadicLattice::new(shift, &spec)?, mc.restriction.as_ref())?
        }
        OperatorKind::ThreeLattice => three_lattice_bound(&f, &build_shifted_lattices(&spec)?)?,
    };
    let mut r = base_report("maximal", cfg)?;
    r.param("maximal", mc);
    r.measure("provenance", &field.provenance);
    let max = field.values().iter().copied().fold(0.0, f64::max);
    r.measure_f64("max_value", max);
    r.check(Check::flag("values_nonnegative", field.values().iter().all(|&v| v >= 0.0)));
    let mut cols: Vec<String> = (0..spec.dim()).map(|a| format!("x{a}")).collect();
    cols.push("f".into());
    cols.push("maximal".into());
    let mut t = Table { name: "field".into(), columns: cols, rows: Vec::new() };
    for k in 0..spec.len() {
        let mut row: Vec<String> = spec.cell_center(&spec.multi_index(k)).into_iter().map(cell).collect();
        row.push(cell(f.values()[k]));
        row.push(cell(field.values()[k]));
        t.push(row);
    }
    r.table(t);
    Ok(r)
}

pub fn run_ap_constant(cfg: &Config) -> Result<Report> {
    let spec = cfg.grid()?;
    let p = cfg.p()?;
    let w = cfg.weight(&spec)?;
    let family = cfg.family(&spec)?;
    let rep = ap_constant(&w, p, &family)?;
    let mut r = base_report("ap_constant", cfg)?;
    r.measure_f64("ap_constant", rep.value).measure("argmax", cube_value(&rep.argmax));
    // cellwise Jensen: at least 1 whenever the argmax lies inside the box
    let inside = (0..spec.dim()).all(|a| {
        spec.corner()[a] <= rep.argmax.lower(a) && rep.argmax.upper(a) <= spec.corner()[a] + spec.extent(a)
    });
    if inside {
        r.check(Check::new("ap_at_least_one", rep.value, Relation::Ge, 1.0, 1e-12));
    }
    Ok(r)
}

pub fn run_ax_estimate(cfg: &Config) -> Result<Report> {
    let spec = cfg.grid()?;
    let params = cfg.params()?;
    let w = cfg.weight(&spec)?;
    let family = cfg.family(&spec)?;
    let cubes = family.enumerate_nonempty()?;
    let corpus = generic_corpus(&spec, &subsample(&cubes, 64), 4, cfg.seed)?;
    let est = ax_constant_estimate(&w, params, &family, &corpus)?;
    let mut r = base_report("ax_estimate", cfg)?;
    r.measure_f64("ax_lower_bound", est.value)
        .measure("argmax_cube", cube_value(&est.argmax_cube))
        .measure("argmax_function", est.argmax_function)
        .measure("corpus_size", corpus.len())
        .measure("skipped_pairs", est.skipped)
        .measure("estimator", "lower bound: maximum of the primal ratio over the corpus");
    Ok(r)
}

/// Builds the shifted lattices and checks the containment property
/// exhaustively over the grid-aligned cubes of the box.
pub fn run_lattices(cfg: &Config) -> Result<Report> {
    let spec = cfg.grid()?;
    let n = spec.dim();
    let lattices = build_shifted_lattices(&spec)?;
    let mut r = base_report("lattices", cfg)?;
    r.check(Check::new("lattice_count", lattices.len() as f64, Relation::Eq, 3f64.powi(n as i32), 0.0));
    let mut t = Table::new("lattices", &["index", "shift", "top_generation", "root_side"]);
    for (j, l) in lattices.iter().enumerate() {
        let digits: Vec<String> = l.shift().iter().map(|d| d.to_string()).collect();
        t.push(vec![j.to_string(), digits.join(" "), l.top_generation().to_string(), cell(l.side(0))]);
    }
    r.table(t);
    let side_cells = *spec.cells().iter().min().expect("nonempty grid") as i64;
    let mut worst = 0.0f64;
    let mut uncovered = 0usize;
    let mut total = 0usize;
    for k in 1..=side_cells {
        let ranges: Vec<(usize, usize)> = spec.cells().iter().map(|&m| (0, m - k as usize)).collect();
        morrey_core::grid::for_each_in_ranges(&ranges, |idx| {
            total += 1;
            let lower: Vec<i64> = idx.iter().map(|&i| i as i64).collect();
            let best = lattices
                .iter()
                .filter_map(|l| l.smallest_containing_grid_cube(&lower, k).map(|id| l.side(id.generation)))
                .fold(f64::INFINITY, f64::min);
            if best.is_finite() {
                worst = worst.max(best / (k as f64 * spec.h()));
            } else {
                uncovered += 1;
            }
        });
    }
    r.measure("grid_cubes_checked", total).measure_f64("worst_side_ratio", worst).measure("uncovered", uncovered);
    r.check(Check::new("uncovered_cubes", uncovered as f64, Relation::Eq, 0.0, 0.0));
    r.check(Check::new("containment_side_ratio", worst, Relation::Le, 6.0, 0.0));
    r.measure("side_ratio_reference", num(6.0));
    Ok(r)
}
