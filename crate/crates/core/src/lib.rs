//! Numerical laboratory for inverse σ_k-type equations in their
//! torus-invariant reduction.
//!
//! The crate is organized around five subsystems:
//!
//! * [`symfunc`] — exact elementary-symmetric-function kernel: values,
//!   deleted symmetric functions, first and second derivatives of the
//!   inverse σ_k operators at diagonal matrices, and the convexity
//!   quadratic form.
//! * [`operators`] — operator families F(A) = Σ c_k S_k(A⁻¹) with
//!   Laplacian (κ) and Monge–Ampère (ε, d) modifications, structural
//!   condition verification and subsolution margins.
//! * [`toric`] — lattice-rational polytopes, Minkowski sums, mixed
//!   volumes, and the face-wise numerical stability criterion for
//!   toric Kähler classes.
//! * [`flow`] — J-flow type parabolic integration on periodic grids,
//!   energy functional evaluation and change-of-background identities.
//! * [`pde`] — damped-Newton solvers for the reduced convex Dirichlet
//!   problems, the Legendre transform, continuity paths in the
//!   determinant weight, and supersolution/Hessian-bound diagnostics.
//!
//! [`suite`] drives the full verification battery with a fixed seed and
//! produces a machine-readable report.

pub mod error;
pub mod flow;
pub mod linalg;
pub mod operators;
pub mod pde;
pub mod suite;
pub mod symfunc;
pub mod toric;

pub use error::Error;
pub use operators::{OperatorSpec, Region, StructuralReport};
pub use symfunc::{DeletionIndexSet, SigmaWeights, Spectrum};
pub use toric::{Polytope, StabilityReport, Verdict};
