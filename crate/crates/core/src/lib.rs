//! Averaged self-distance of probability measures on the unit ball of a
//! finite-dimensional normed space.
//!
//! For a norm `|·|` on `R^n` with unit ball `K` and a probability measure `ν`
//! supported on `K`, the averaged self-distance is
//!
//! ```text
//! Δ(ν) = ∫∫ |x − y| dν(x) dν(y)
//! ```
//!
//! The crate evaluates `Δ` exactly for finitely supported measures and by
//! Monte Carlo for sampled ones, evaluates the known covering-based upper
//! bounds on `Δ`, certifies bounds from explicit coverings of `K` by
//! homothets, and searches numerically for `Δ`-maximizing discrete measures.

pub mod bounds;
pub mod cli;
pub mod covering;
pub mod delta;
mod error;
pub mod measures;
pub mod norms;
pub mod optimize;
pub mod scalar;
pub mod sum;

pub use bounds::{BoundReport, Ratio, Theorem, ThetaVariant};
pub use covering::{Covering, Homothet, VerifyMode, VerifyReport};
pub use delta::DeltaEstimate;
pub use error::{Error, Result};
pub use measures::{DiscreteMeasure, SamplerMethod, SamplerSpec};
pub use norms::{NormKind, NormSpec};
pub use optimize::OptimizationResult;

/// Default absolute tolerance on the gauge value for unit-ball membership.
pub const DEFAULT_TOL: f64 = 1e-9;
