//! Numerical laboratory for Hilbert-type operators acting between weighted
//! Fock spaces.
//!
//! Operators are realised as truncated matrices in orthonormal coordinates
//! (see [`hilbert_ops`]); the surrounding modules provide special functions,
//! the coefficient model of the spaces, radial measures and their moments,
//! and the experiment harness that turns the boundedness and compactness
//! characterisations into measurable trends.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod experiments;
pub mod fock_space;
pub mod hilbert_ops;
pub mod io;
pub mod linalg;
pub mod quadrature;
pub mod radial_measure;
pub mod report;
pub mod special_fn;

pub use error::{Error, Result};
