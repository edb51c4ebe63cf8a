//! Evaluation of segmentation uncertainty from sets of binary masks.
//!
//! The central quantity is the generalized energy distance between the
//! annotation distribution and a model's prediction distribution, computed
//! with `1 - IoU` as the pairwise distance. Because a non-empty mask is always
//! at distance 1 from an empty one, that number mixes two tasks: deciding
//! whether there is an object (detection) and drawing it (segmentation).
//! [`metrics::ged_triple`] reports the full distance together with a
//! detection-only distance (emptiness disagreement) and a segmentation-only
//! distance (IoU over non-empty masks).
//!
//! Around it:
//! - [`entropy`]: pixel-wise entropy of the mean segmentation and histograms.
//! - [`stats`]: one-sided Wilcoxon signed-rank tests and model rankings.
//! - [`synth`]: a seeded multi-annotator generator with bias, ambiguity and
//!   drawing-error knobs.
//! - [`io`]: PGM masks and probability maps, CSV reports, dataset layout.

pub mod entropy;
pub mod error;
pub mod io;
pub mod mask;
pub mod metrics;
pub mod rng;
pub mod stats;
pub mod sum;
pub mod synth;

pub use entropy::{
    entropy_histogram, entropy_map, mean_map, EntropyMap, HistogramBin, LogBase, ProbMap,
};
pub use error::{Error, Result};
pub use mask::{detection_distance, iou, iou_distance, BinaryMask, Distance, GridShape, SampleSet};
pub use metrics::{
    det_closed_form, ged, ged_triple, CrossTermSummary, EstimatorKind, GedReport, Metric,
};
pub use stats::{rank_models, wilcoxon_one_sided, Alternative, PairedSeries, WilcoxonResult};
pub use synth::{generate, SynthScenario};
