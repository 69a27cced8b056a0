//! Exact computational toolkit for additive energy on `ℤ^d` and `𝔽₂^d`.
//!
//! The crate revolves around three layers:
//!
//! * **Exact ground types** ([`lattice`]): points of `ℤ^d` with unbounded
//!   integer coordinates, canonically ordered finite point sets, and finitely
//!   supported nonnegative rational mass functions. All norms use counting
//!   measure.
//! * **Energy machinery**: the representation matrix `R(a,b)` and the `U²`/`U³`
//!   energies ([`energy`]), mod-2 mass profiles and sparse Gowers norms over
//!   `𝔽₂^d` ([`mod2`]), universal Freiman models through Smith normal form
//!   ([`freiman`]), and Ruzsa covering certificates ([`covering`]).
//! * **The increment engine** ([`increment`]): an iteration that, given a set
//!   with large normalized `U³` energy, repeatedly passes to a denser subset
//!   (discarding light mod-2 mass, restricting to a fiber, or splitting along
//!   a near-coset hyperplane) until the Freiman dimension falls below
//!   `8·log₂K + 32`. Every per-step guarantee is recomputed from scratch in
//!   exact arithmetic rather than trusted from the derivation.
//!
//! [`checks`] packages each inequality the iteration rests on as a reusable,
//! seedable checker; [`naive`] holds independent brute-force references used
//! to cross-validate the production paths.
//!
//! Start with the runnable demos under `examples/`, or the `additive-energy`
//! binary (`gen`, `energy`, `dim`, `increment`, `verify`, `cover`).

pub mod checks;
pub mod cli;
pub mod covering;
pub mod energy;
pub mod freiman;
pub mod gen;
pub mod increment;
pub mod lattice;
pub mod mod2;
pub mod naive;
pub mod snf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("empty set not allowed: {0}")]
    EmptySet(&'static str),
    #[error("zero function not allowed: {0}")]
    ZeroFunction(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("set too small: need at least {need} points, got {got}")]
    TooSmall { need: usize, got: usize },
    #[error("model verification failed: {reason} (rank {rank}, elementary divisors {divisors:?})")]
    ModelVerification {
        reason: String,
        rank: usize,
        divisors: Vec<num_bigint::BigInt>,
    },
    #[error("increment engine: {0}")]
    Increment(String),
    #[error("iteration limit {0} exhausted")]
    MaxIters(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use energy::{additive_energy, energy_report, normalized_energy, rep_matrix, u3_energy};
pub use freiman::{freiman_dimension, universal_model, verify_freiman_iso};
pub use increment::{run_increment, CaseParams};
pub use lattice::{LatticePoint, MassFunction, ParityClass, PointSet};
