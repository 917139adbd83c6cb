//! Toolkit for evaluating open-domain dialogue responses: corpus handling,
//! crowd-label aggregation, word-overlap and embedding metrics, trainable
//! reference-based and reference-free evaluators, and correlation studies.

pub mod analysis;
pub mod annotation;
pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod evaluators;
pub mod linalg;
pub mod metrics;
pub mod synth;
pub mod trainer;

pub(crate) mod io_util;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Derive an independent stream seed from a run seed and a path of tags
/// (splitmix64 over the sequence).
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    tags.iter().fold(mix(seed), |acc, &t| mix(acc ^ mix(t)))
}
