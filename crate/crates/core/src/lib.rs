//! Finite and unique completability of two-view low-rank matrices.
//!
//! A partially observed matrix `U = [U1 | U2]` with `rank(U) = r`,
//! `rank(U1) = r1` and `rank(U2) = r2` is finitely completable when only
//! finitely many completions respect all three ranks. This crate builds the
//! binary constraint matrix of a sampling pattern, decides the combinatorial
//! completability conditions on it, cross-checks them against the generic
//! rank of the Jacobian of the sampled polynomial system, and evaluates the
//! closed-form sampling bounds.

pub mod basis;
pub mod bounds;
pub mod checker;
pub mod constraint;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod linalg;
pub mod oracle;
pub mod pattern;
pub mod ranks;

pub use checker::{check_finite, check_unique, count_bound, CheckConfig, Status, Verdict};
pub use constraint::{build_constraint, ColumnSubset, ConstraintMatrix};
pub use bounds::{bound_report, BoundReport, LogBase};
pub use error::{Error, Result};
pub use exec::Exec;
pub use oracle::{finiteness_oracle, OracleConfig};
pub use pattern::{load_pattern, seeded_rng, SamplingPattern};
pub use ranks::{basis_dof, ProblemShape, RankTriple, View};
