//! Cubes, point sets, cube families, shifted dyadic lattices, lacunary
//! generators, annulus coverings and parameter solvers.

mod annulus;
mod cube;
mod family;
mod lattice;
mod params;
mod points;

pub use annulus::{annulus_count, annulus_cover, annulus_distance_bounds};
pub use cube::{point_cube_dist_sq, Cube};
pub(crate) use cube::better;
pub use family::{CubeFamily, CubePredicate, FamilyKind, Truncation};
pub use lattice::{build_shifted_lattices, DyadicLattice, LatticeCubeId};
pub use params::{equa_lhs, solve_epsilon_n, solve_splitting_params, EquaParams, SplittingParams};
pub use points::{
    check_rcond, dist_cube_to_set, dist_sq_cube_to_set, effective_nu, generate_lacunary_1d, generate_lacunary_sphere,
    lacunary_ratio, whitney_member, PointSet, RcondCheck, SpherePacking, RCOND_REL_SLACK,
};
