//! Shared transform learning for matching across two imaging domains.
//!
//! One square transform `T` maps features from either domain to sparse codes.
//! Training alternates closed-form updates of `T` with per-domain hard
//! thresholding, where each domain's codes are pulled toward their mates in the
//! other domain. Identification encodes probe and gallery features with the same
//! `T` and ranks gallery identities by squared Euclidean distance between codes.

pub mod cli;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod identification;
pub mod io;
pub mod model_core;
pub mod shared_transform;

#[cfg(test)]
mod test_util;

pub use error::{Error, Result};
