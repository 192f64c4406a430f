//! Gradient-flow limit points of diagonal linear networks.
//!
//! A diagonal linear network of depth `D` reparameterizes a regression
//! vector as `x = u^{⊙D} − v^{⊙D}`. Gradient flow from the symmetric
//! initialization `u₀ = v₀ = α^{1/D}·1` converges, over the solution set of
//! `Ax = y`, to the minimizer of a Bregman divergence whose potential is the
//! hypentropy `H_α` for `D = 2` and the power-law potential `Q^D_α` for
//! `D ≥ 3`. This crate computes those limit points, the null-space constants
//! that control how fast they approach the minimum-`ℓ¹` solution as
//! `α ↓ 0`, closed-form upper/lower bounds on the approximation error, and
//! the one-dimensional-kernel constructions on which the bounds are tight.
//!
//! Modules:
//! - [`numerics`]: dense matrices/vectors, kernel bases, Brent root finding,
//!   adaptive Simpson quadrature.
//! - [`potentials`]: the two Bregman geometries with gradients and mirror
//!   maps.
//! - [`lp`]: an embedded dense interior-point LP solver, basis pursuit,
//!   support/sign/uniqueness detection.
//! - [`solvers`]: mirror descent, factored gradient descent, a 1-D-kernel
//!   first-order-condition oracle, and Frank–Wolfe minimizer selection.
//! - [`nullspace`]: exact computation of the constants ϱ, ϱ⁻, ϱ̃, κ*.
//! - [`bounds`]: evaluators for the four error-bound theorems.
//! - [`sharpness`]: explicit instances with prescribed constants and their
//!   scalar fixed-point solves.
//! - [`experiments`]: instance generation, α sweeps, rate fits, CSV/SVG
//!   emission.

pub mod bounds;
pub mod experiments;
pub mod lp;
pub mod nullspace;
pub mod numerics;
pub mod potentials;
pub mod sharpness;
pub mod solvers;

pub use bounds::{BoundInput, BoundRegime, BoundReport};
pub use experiments::{Instance, SweepResult, SweepRow};
pub use lp::{L1Certificate, LpProblem, LpSolution};
pub use nullspace::{Decomposition, NspConstants};
pub use numerics::{Matrix, SubspaceBasis, Vector};
pub use potentials::Potential;
pub use sharpness::{SharpInstance, SharpVariant};
pub use solvers::{SolveConfig, SolveTrace};
