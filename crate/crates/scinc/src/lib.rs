//! Path-following generalized Newton solver for monotone inclusions over
//! barrier domains.
//!
//! The library solves problems of the form: find `z` with `0 ∈ A(z) + N_Z(z)`,
//! where `A` is a maximally monotone operator and `N_Z` is the normal cone of a
//! convex set `Z` equipped with a self-concordant barrier `F`. The interior
//! smoothing `0 ∈ t·∇F(z) + A(z)` is driven to `t → 0` along the central path
//! by inexact generalized Newton steps whose subproblem accuracy is certified
//! in the local dual norm.
//!
//! # Features
//!
//! - Dense metric toolkit: local norms, Cholesky-backed metric solves, and
//!   vectorized symmetric-matrix helpers ([`linalg`]).
//! - Barrier oracles for the nonnegative orthant, positive definite cone
//!   (log-determinant), boxes, second-order cone, products, Legendre
//!   conjugates, and dual-feasibility compositions ([`barrier`]).
//! - Scaled proximal operators with exact closed forms where available and a
//!   certified accelerated proximal-gradient subsolver otherwise ([`prox`]).
//! - Monotone operator oracles: constants, subdifferentials, and coupled
//!   saddle operators with exact KKT resolvents for affine parts ([`oper`]).
//! - The full-step, damped-step, and path-following step engines, the
//!   two-phase driver, and their schedule constants ([`newton`]).
//! - Specializations: convex-concave saddle problems, composite primal
//!   problems, and dual conic problems with primal recovery ([`instances`]).
//! - Seeded generators for three benchmark families ([`problems`]) and a
//!   stable documented random number generator ([`rng`]).
//! - File formats for problems, solutions, and iteration traces ([`io`]).
//!
//! # Example
//!
//! ```
//! use scinc::barrier::BarrierFn;
//! use scinc::newton::{Schedule, two_phase_solve, Phase1Strategy};
//! use scinc::oper::Operator;
//! use nalgebra::DVector;
//!
//! // Minimize x over x ≥ 0 smoothed by the log barrier: the central path is
//! // x(t) = t, and the solver follows it to a small residual.
//! let barrier = BarrierFn::orthant(1);
//! let operator = Operator::constant(DVector::from_element(1, 1.0));
//! let sched = Schedule::with_defaults(barrier.nu(), barrier.kappa()).unwrap();
//! let start = DVector::from_element(1, 2.0);
//! let out = two_phase_solve(
//!     &barrier,
//!     &operator,
//!     &start,
//!     &sched,
//!     1e-6,
//!     Phase1Strategy::AuxiliaryPath,
//!     None,
//! )
//! .unwrap();
//! assert!(out.final_t <= 1e-6 / sched.m0 * 1.0000001);
//! ```

#![warn(clippy::all)]
#![warn(missing_docs)]

pub mod barrier;
pub mod error;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod newton;
pub mod oper;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{Metric, SymMat};
