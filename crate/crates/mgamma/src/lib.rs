//! Infinitely divisible multivariate gamma distributions defined by Laplace
//! transforms of affine polynomials.
//!
//! - [`combinat`]: subsets, set partitions, multi-indices.
//! - [`affine_poly`]: polynomial algebra, dual tables, infinite divisibility, Markov chains.
//! - [`specfun`]: hypergeometric series and densities.
//! - [`samplers`]: exact Poisson-gamma mixture samplers.
//! - [`validate`]: statistical checks and the fixture suite.
//! - [`cli`]: the `mgamma` command-line front end.

pub mod affine_poly;
pub mod cli;
pub mod combinat;
mod error;
pub mod quadrature;
pub mod samplers;
pub mod specfun;
pub mod validate;

pub use error::{Error, Result};
