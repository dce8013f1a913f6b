//! Steklov neural network operators on a bounded interval.
//!
//! The crate builds density kernels from sigmoidal activations, evaluates
//! Steklov integral means through a one-dimensional Irwin–Hall reduction,
//! and assembles them into the normalized operators
//!
//! ```text
//! F_n^r(f; x) = Σ_k f_{r,1/n}(k/n) φ(nx − k) / Σ_k φ(nx − k),   k = ⌈na⌉ ..= ⌊nb⌋ − r
//! ```
//!
//! together with tools that measure their errors against the known bounds.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod kernels;
pub mod moments;
pub mod operators;
pub mod quadrature;
pub mod steklov;
pub mod target;

pub use error::{Error, Result};
pub use kernels::{
    density_of, make_logistic, make_tanh_sigmoidal, DensityFunction, SigmoidalFunction,
};
pub use operators::{OperatorConfig, SteklovOperator};
pub use target::{Interval, TargetFunction};
