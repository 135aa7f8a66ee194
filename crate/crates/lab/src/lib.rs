//! Verification harness and command-line front end for `morrey-core`.
//!
//! Each experiment reads a TOML [`config::Config`], runs one computation and
//! returns a [`report::Report`]: a JSON document with the parameters, the
//! measured quantities and every pass/fail check with its tolerance, plus
//! flat CSV tables. Reports contain no timestamps or timings, so identical
//! configs give byte-identical files.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use error::{LabError, Result};
