//! Screening for mild cognitive impairment from voice-assistant commands.
//!
//! Sessions of assistant commands are ingested from JSON manifests and VAEF
//! embedding files, turned into intent features (how many commands fall on
//! each intent anchor and how close they sit to it) and pooled embedding
//! features, fused into one of seven feature modes, and evaluated with
//! participant-grouped nested cross-validation over a small set of
//! from-scratch learners.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.

// `!(x >= 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod ingest;
pub mod intent;
pub mod learners;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Scalar;

pub type Dataset = learners::Dataset<f64>;
pub type Targets = learners::Targets<f64>;
pub type TrainedModel = learners::TrainedModel<f64>;
pub type FeatureVector = fusion::FeatureVector<f64>;
pub type IntentFeatureVector = intent::IntentFeatureVector<f64>;
