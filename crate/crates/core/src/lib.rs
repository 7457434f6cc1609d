//! Numerical checks for maps that preserve parallelogram areas or norms of
//! commutators, and recovery of their canonical forms.
//!
//! * [`geometry`]: areas, cross products, the linear area-preservation test.
//! * [`gauge`]: unitarily invariant norms and commutator norms.
//! * [`pauli`]: the Pauli correspondence between `R³` and traceless 2×2
//!   Hermitian matrices, and the `SO(3)`/`SU(2)` lift.
//! * [`check`]: randomized black-box property checks with witnesses.
//! * [`canon`]: canonical form recovery.
//! * [`harness`]: map specifications, reports, the identity suite and the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canon;
pub mod check;
pub mod error;
pub mod exec;
pub mod gauge;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod maps;
pub mod pauli;
pub mod random;

pub use error::{Error, Result};
