//! Alternating direction method of multipliers for
//! `min_X f(X) - g(X) + h(A(X))` subject to `X^T X = I`.
//!
//! The crate provides Stiefel manifold primitives, proximal operators and
//! Moreau envelopes, the composite problem model with a sparse PCA instance,
//! the solver in a projection and a retraction flavor, diagnostics, and
//! baseline methods. Everything is generic over `f32` and `f64`.
//!
//! ```
//! use oadmm_core::data::{load_or_synthesize_data, Centering, DatasetDescriptor};
//! use oadmm_core::{make_sparse_pca, solve, SolverConfig, StiefelPoint, Variant};
//!
//! # fn main() -> oadmm_core::Result<()> {
//! let d = load_or_synthesize_data(&DatasetDescriptor::randn(60, 20, 42), Centering::Mean)?;
//! let prob = make_sparse_pca(d, 5.0, 8, 4)?; // rho_dot, k, r
//! let x0 = StiefelPoint::identity(prob.n(), prob.r())?;
//! let y0 = prob.a.apply(x0.matrix());
//! let z0 = nalgebra::DVector::zeros(prob.m());
//! let mut cfg = SolverConfig::defaults(Variant::RiemannianRetraction, 50.0); // beta0
//! cfg.max_iters = 100;
//! let out = solve(&prob, &cfg, x0, y0, z0)?;
//! assert!(out.state.x.feasibility() < 1e-10);
//! # Ok(())
//! # }
//! ```

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod oadmm;
pub mod problem;
pub mod prox;
pub mod scalar;
pub mod stiefel;

pub use error::{Error, Result};
pub use oadmm::{solve, solve_with_observer, SolveOutput, SolverConfig, SolverState, StepRule, Variant};
pub use problem::{make_sparse_pca, CompositeProblem};
pub use scalar::Real;
pub use stiefel::{StiefelPoint, TangentVector};

pub type StiefelPointF64 = StiefelPoint<f64>;
pub type StiefelPointF32 = StiefelPoint<f32>;
pub type SolverConfigF64 = SolverConfig<f64>;
pub type SolverConfigF32 = SolverConfig<f32>;
pub type CompositeProblemF64 = CompositeProblem<f64>;
pub type CompositeProblemF32 = CompositeProblem<f32>;
