//! Numerical laboratory for weighted Morrey spaces.
//!
//! Everything is evaluated on piecewise-constant grid functions, so every
//! integral over a cube is an exact finite sum. The crate is split into:
//!
//! * [`geometry`]: cubes, point sets, cube families (all cubes, centered,
//!   Whitney-type, dyadic), shifted dyadic lattices, lacunary generators,
//!   annulus coverings and the explicit parameter solvers.
//! * [`grid`]: grid functions and weights with summed-table cube integration,
//!   plus binary/CSV import and export.
//! * [`norms`]: Morrey and weighted Lebesgue norms over cube families.
//! * [`maximal`]: Hardy–Littlewood, dyadic and family-restricted maximal
//!   operators and operator-norm estimates.
//! * [`muckenhoupt`]: `A_p` constants over families and `A_X` estimators.
//!
//! Morrey norms use the `|Q|^λ` normalization with `0 < λ < 1`:
//! `‖f‖ = sup_{Q ∈ F} (|Q|^{-λ} ∫_Q |f|^p w)^{1/p}`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod grid;
pub mod maximal;
pub mod muckenhoupt;
pub mod norms;

pub use error::{Error, Result};
