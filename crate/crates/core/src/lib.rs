//! Numerical workbench for fractional evolution equations of order
//! q ∈ (1, 2) with nonlocal conditions and feedback control.
//!
//! The machinery follows the constructive side of the theory: q-order
//! cosine/sine/Riemann-Liouville solution families realized through the
//! Mittag-Leffler function on a diagonal (Dirichlet sine) spectrum, the
//! controllability Grammian with its resolvent regularization  R(β,K) =
//! (βI+K)⁻¹, the mild-solution fixed point z = G₁z + G₂z solved by Picard
//! iteration with product-integration convolution, and the β → 0 sweep that
//! exhibits approximate controllability numerically.
//!
//! Modules mirror that decomposition:
//!
//! * [`mittag_leffler`] — scalar E_{α,β} on the negative real axis.
//! * [`spectral_basis`] — truncated Dirichlet sine basis of L²(0, L).
//! * [`solution_families`] — C_q, S_q, P_q as diagonal operators plus the
//!   mode-wise Duhamel propagator used as a solver oracle.
//! * [`control_operators`] — the input operator B, Grammian K₀ᵃ, resolvent
//!   solves, and the linear approximate-controllability indicator.
//! * [`nonlocal_problem`] — problem instances (f, g, φ, ψ), declared
//!   constants, and the empirical hypothesis checks.
//! * [`mild_solver`] — trajectory discretization, feedback control u_β,
//!   and the Picard fixed-point solver.
//! * [`experiment`] — config ingestion, hypothesis reporting, β-sweeps and
//!   CSV emission behind the CLI.

// Validation guards use negated comparisons (`!(x > 0.0)`) on purpose:
// unlike `x <= 0.0`, they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod dd;
mod gamma;

pub mod control_operators;
pub mod experiment;
pub mod mild_solver;
pub mod mittag_leffler;
pub mod nonlocal_problem;
pub mod solution_families;
pub mod spectral_basis;

pub use mittag_leffler::{ml, ml_reference, MlError, MlParams};
