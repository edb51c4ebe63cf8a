//! Synthetic multi-annotator data.
//!
//! Each annotation is a function of the true shape, a per-annotator bias and
//! a random drawing error. Shapes are star-convex: a disk or ellipse whose
//! boundary radius along direction θ is scaled by
//! `scale_bias · (1 + noise_sigma · η(θ))`, with `η` a random zero-mean sum of
//! sinusoids bounded by 1. An annotator may also leave the mask empty with
//! probability `empty_rate`, which models disagreement on whether the object
//! is there at all.
//!
//! All randomness comes from [`SplitMix64`](crate::rng::SplitMix64)
//! substreams keyed by `(seed, family, image, annotator/sample)`.

mod annotator;
mod predictor;
mod scenario;
mod shape;

pub use annotator::{annotate, AnnotatorProfile};
pub use predictor::{synthetic_predictor, PredictorSpec, PredictorStyle};
pub use scenario::{generate, image_id, SynthImage, SynthScenario, TruthKind, TruthParams};
pub use shape::{rasterize, ShapeKind, TrueShape};
