//! Non-unitary discrete-time quantum walks with gain and loss.
//!
//! The walk acts on a ring of `N` sites with a two-level internal state
//! (`L`, `R`). One time step is `U = S G₂ Φ₂ C(θ₂) S G₁ Φ₁ C(θ₁)`.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod linalg;
pub mod momentum;
pub mod operators;
pub mod spectral;
pub mod symmetry;

pub use error::{Result, WalkError};
pub use linalg::{CMatrix, Spinor, SpinorMatrix};
pub use operators::{Chirality, Frame, HomogeneousParams, ParamField, WalkConfig};
