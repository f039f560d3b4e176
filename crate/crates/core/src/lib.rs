//! Invariant calculus for Calabi graph hypersurfaces `x_{n+1} = f(x)`.
//!
//! Given a smooth strictly convex `f`, the crate computes fourth-order jets,
//! the Calabi metric `G = Hess f`, the cubic form, Levi-Civita connection,
//! curvature and the Pick and Tchebychev invariants, reduces the cubic form
//! to its normal form, and checks the classification of hypersurfaces with
//! parallel cubic form on a catalog of canonical examples.

// `!(x > 0.0)` is used on purpose: it also rejects NaN. Tensor code reads
// best with explicit index loops.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod affine;
pub mod catalog;
pub mod cli;
pub mod commute;
pub mod error;
pub mod expr;
pub mod function;
pub mod geometry;
pub mod jet;
pub mod normal_form;
pub mod reconstruct;
pub mod tensor;

pub use affine::{act_on_function, check_equivalence_invariants, AffineMap, InvarianceReport};
pub use catalog::{CatalogSurface, ExpectedInvariants};
pub use commute::{simultaneous_diagonalize, Diagonalization, SymFamily};
pub use error::{Error, Result};
pub use expr::{parse_expr, Expr};
pub use function::{eval_jet, FunctionSpec};
pub use geometry::{extremal_residual, TensorBundle};
pub use jet::{Jet4, Taylor};
pub use normal_form::{classify_case, normal_form, CaseLabel, NormalForm};
pub use reconstruct::{closed_form, integrate_frames, FlatParallelData};
pub use tensor::Tensor;

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
