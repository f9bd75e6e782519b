//! Texture classification toolkit built on three complementary descriptors:
//! local binary patterns, local ternary patterns, and gray-level
//! co-occurrence matrices in eight directions. Each image patch maps to an
//! 808-dimensional vector — a 256-bin LBP histogram, 256-bin LTP upper and
//! lower histograms, and five statistics (energy, contrast, homogeneity,
//! entropy, variance) for each of the eight GLCM directions — which feeds
//! KNN or Gaussian naive-Bayes classifiers over a seeded stratified split.
//!
//! The pipeline is deterministic end to end: decoding, tiling, extraction
//! order, shuffling, and every tie-break rule are fixed, so identical inputs
//! and seeds reproduce identical feature files, models, and reports.

pub mod cli;
pub mod classify;
pub mod error;
pub mod features;
pub mod fixture;
pub mod glcm;
pub mod imageio;
pub mod patterns;

pub use error::{Error, Result};
