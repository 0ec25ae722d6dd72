//! Complex eigenvalues of the three-dimensional magnetic Schroedinger operator
//! `H = (-i grad - A)^2 + epsilon exp(i alpha) V` near its Landau levels.
//!
//! The crate locates eigenvalues as zeros of a regularized Birman-Schwinger determinant,
//! cross-checks them against a dense Galerkin discretization of `H`, and compares their
//! distribution with the spectra of the Toeplitz operators `P_q W P_q`.

// Negated comparisons deliberately reject NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod birman_schwinger;
pub mod error;
pub mod landau;
pub mod oracle;
pub mod potentials;
pub mod quadrature;
pub mod special;
pub mod toeplitz;
pub mod zero_finder;

pub use error::{Error, Result};
pub use num_complex::Complex64;
