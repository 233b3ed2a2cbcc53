//! Numerical laboratory for nonlocal p-Laplace equations with general
//! kernel order φ.
//!
//! The crate discretizes the Dirichlet problem on uniform grids, minimizes
//! the nonlocal energy, evaluates nonlocal tails and Gagliardo-type
//! seminorms, and measures the constants in the regularity estimates
//! (Sobolev–Poincaré, Caccioppoli, logarithmic, local boundedness, Hölder
//! decay, Harnack) together with their behavior as `s ↗ 1`.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod energy;
pub mod error;
pub mod kernel;
pub mod profiles;
pub mod quad;
pub mod solver;
pub mod stability;
pub mod tail;
pub mod verify;

pub use domain::{DiscreteDomain, GridFunction, Shape};
pub use error::{Error, Result};
pub use kernel::{KernelSpec, PhiTable, PhiVariant};
