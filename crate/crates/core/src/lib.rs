//! Weighted partial-trace operators `M_a(X) = sum_i a_i lambda_i(X)` on
//! symmetric matrices and the numerical machinery around them: eigenvalue
//! decomposition tuned for small dense matrices, radial barrier functions
//! with certified structural properties, the explicit Holder exponent and
//! constant ledger they feed, a monotone wide-stencil solver for the 2D
//! prototype equation `a1 l1(D^2 u) + a2 l2(D^2 u) + H(grad u) = f`, and a
//! suite around the logarithmic profile that escapes every Holder class.
//!
//! All randomized routines take explicit seeds and are bit-reproducible.

pub mod barrier;
pub mod counterexample;
pub mod error;
pub mod grid;
pub mod holder;
pub mod operators;
pub mod regularity;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
