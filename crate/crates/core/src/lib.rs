//! Existence certificates and numerical solutions for the nonlocal
//! boundary value problem
//!
//! ```text
//! -A( ∫₀¹ b(1-s) u(s)^{p(s)} ds ) u''(t) = λ f(t, u(t)),   t ∈ (0, 1)
//! ```
//!
//! with boundary data encoded by a Green's function `G`.
//!
//! * [`expr`] parses the user-supplied coefficient functions.
//! * [`kernel`] owns the convolution weight `b` and the nonlocal functional.
//! * [`green`] provides `G` and its cone constants.
//! * [`varexp`] holds the variable-exponent bounds on `‖u‖∞`.
//! * [`certify`] checks the hypothesis inequalities and the admissible λ range.
//! * [`solve`] computes positive solutions by collocation.
//! * [`config`] and [`report`] back the `kvge` command-line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod config;
pub mod expr;
pub mod green;
pub mod grid;
pub mod kernel;
pub mod par;
pub mod quad;
pub mod report;
pub mod solve;
pub mod varexp;

pub use expr::Expression;
pub use grid::GridFunction;
pub use kernel::{HolderNorm, Kernel};
pub use par::Execution;
