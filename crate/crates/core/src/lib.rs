//! Resolvent kernels, Birman–Schwinger norm sweeps, finite-box spectra,
//! lattice dynamics and counterexample families for `H0 + V` on `Z^d`,
//! where `H0` is the negative discrete Laplacian with symbol
//! `h0(xi) = 4 sum_j sin^2(pi xi_j)`.

pub mod birman_schwinger;
pub mod counterexamples;
pub mod dynamics;
pub mod error;
pub mod fft;
pub mod fit;
pub mod lattice;
pub mod linalg;
pub mod quad;
pub mod resolvent;
pub mod special;
pub mod spectral_box;

pub use error::{Error, Result};
pub use num_complex::Complex64;
