//! Two-weight dyadic Haar analysis on a finite-depth dyadic tree over `[0, 1)`.
//!
//! Everything lives on a [`dyadic::DyadicModel`] of depth `N`: functions are
//! constant on the `2^N` leaves, weights are strictly positive leaf functions
//! with cached interval averages.
//!
//! - [`dyadic`]: interval addressing, averages, Haar and disbalanced Haar bases.
//! - [`operators`]: Haar multipliers `T_σ`, the positive operator `T₀`, the
//!   square function and the four-sum bilinear decomposition.
//! - [`conditions`]: best constants of the testing and necessary conditions.
//! - [`norms`]: weighted operator norms, sign-pattern extremization.
//! - [`bellman`]: numeric certificates for the Bellman functions.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bellman;
pub mod conditions;
pub mod dyadic;
mod error;
pub mod linalg;
pub mod norms;
pub mod operators;
mod rng;

pub use error::{Error, Result};
pub use rng::{derive_seed, Rng64};

/// Crate version, recorded in report metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
