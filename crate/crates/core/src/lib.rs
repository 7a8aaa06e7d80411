//! Left-invariant Riemannian geometry on four-dimensional Lie algebras and
//! the Einstein-Maxwell equations `Ric_0 = -[F∘F]_0`, `dF = 0`, `d⋆F = 0`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod error;
pub mod expr;
pub mod forms;
pub mod kahler;
pub mod lie_algebra;
pub mod linalg;
pub mod maxwell;
pub mod metric;
pub mod scalar;
pub mod solver;
pub mod tolerances;

pub use catalog::{load_catalog, Catalog, CatalogEntry, Verdict};
pub use error::{Error, Result};
pub use forms::{Orientation, ThreeForm, TwoForm};
pub use lie_algebra::LieAlgebra;
pub use scalar::{Rational, Scalar};

#[cfg(test)]
mod proptests;
