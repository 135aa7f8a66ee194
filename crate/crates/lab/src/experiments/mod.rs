//! Experiments behind the CLI subcommands. Each returns a [`Report`].

mod basic;
mod connect;
mod eqst;
mod keyprop;
mod redw;
mod scan;

pub use basic::{run_ap_constant, run_ax_estimate, run_lattices, run_maximal, run_norm};
pub use connect::{verify_connect, ConnectInput};
pub use eqst::verify_eqst;
pub use keyprop::verify_key_property;
pub use redw::verify_redw;
pub use scan::{classify_trend, scan_characterization, Trend};

use morrey_core::geometry::Cube;
use morrey_core::grid::{GridFunction, GridSpec};

use crate::config::FieldSpec;
use crate::error::Result;

/// Headroom for inequalities whose constants are explicit.
pub const REL_HEADROOM: f64 = 1e-9;

/// Evenly spaced subsample of at most `cap` items, keeping the order.
pub(crate) fn subsample<T: Clone>(items: &[T], cap: usize) -> Vec<T> {
    if items.len() <= cap {
        return items.to_vec();
    }
    (0..cap).map(|i| items[i * items.len() / cap].clone()).collect()
}

/// Test functions: indicators of the given cubes, signed coordinate ramps and
/// seeded random step functions.
pub(crate) fn generic_corpus(spec: &GridSpec, cubes: &[Cube], random: usize, seed: u64) -> Result<Vec<GridFunction>> {
    let mut corpus = Vec::new();
    for q in cubes {
        corpus.push(GridFunction::indicator(spec.clone(), q)?);
    }
    for axis in 0..spec.dim() {
        for sign in [1.0, -1.0] {
            let mut direction = vec![0.0; spec.dim()];
            direction[axis] = sign;
            corpus.push(FieldSpec::Ramp { direction, offset: 0.0 }.sample(spec, seed)?);
        }
    }
    let base = spec.cells().iter().copied().min().unwrap_or(1).min(8);
    let base = if spec.cells().iter().all(|m| m % base == 0) { base } else { 1 };
    for stream in 0..random as u64 {
        corpus.push(FieldSpec::RandomCells { base_cells: base, low: 0.0, high: 1.0, stream: 100 + stream }.sample(spec, seed)?);
    }
    Ok(corpus)
}
