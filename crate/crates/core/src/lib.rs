//! Random Hamiltonian ensembles, Chernoff product iterations and operator
//! limit theorems, computed exactly on finite-dimensional truncations.
//!
//! * [`operator`]: Hermitian and unitary matrices, spectral exponentials,
//!   powers and the sup-over-time seminorm.
//! * [`ensemble`]: laws on Hermitian matrices and their averaged propagators.
//! * [`chernoff`]: operator-valued functions, Chernoff powers and
//!   equivalence reports.
//! * [`lln`]: Monte Carlo tail probabilities for random compositions.
//! * [`measure`]: shift operators on a periodic grid and the heat limit.
//! * [`quantizer`]: Weyl and Born–Jordan quantization of polynomial symbols.
//! * [`runner`]: TOML-configured batch experiments.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chernoff;
pub mod ensemble;
pub mod error;
pub mod lln;
pub mod measure;
pub mod operator;
pub mod quantizer;
pub mod rng;
pub mod runner;

pub use error::{LabError, Result};
