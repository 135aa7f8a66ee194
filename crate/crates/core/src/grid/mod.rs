//! Piecewise-constant grid functions, weights and summed-table integration.
//!
//! A [`GridFunction`] is the step function equal to `values[k]` on cell `k`;
//! all cube integrals are exact for this class. Portions of a cube outside
//! the grid box contribute zero, while averages divide by the full `|Q|`.

mod function;
pub mod io;
mod spec;
mod table;

pub use function::{
    cube_average, cube_integral, sample_power_weight, weighted_p_mass, weighted_power, GridFunction, Weight,
};
pub use spec::{for_each_in_ranges, GridSpec};
pub use table::SummedTable;
