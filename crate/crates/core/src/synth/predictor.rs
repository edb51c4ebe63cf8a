use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, SampleSet};
use crate::rng::SplitMix64;

use super::annotator::{annotate, AnnotatorProfile};
use super::scenario::{stream, SynthScenario};
use super::shape::{rasterize, TrueShape};

/// Archetypes of uncertain segmentation models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorStyle {
    /// Gets the detection rate right, draws poor boundaries.
    MatchEmptinessSloppy,
    /// Always segments, always exactly the true shape.
    AlwaysSegmentPerfect,
    /// Resamples from the annotator model itself.
    Oracle,
}

impl PredictorStyle {
    /// Relative boundary jitter of the sloppy style.
    pub const SLOPPY_SIGMA: f64 = 0.3;
    /// Radius inflation of the sloppy style.
    pub const SLOPPY_SCALE: f64 = 1.3;

    fn code(self) -> u64 {
        match self {
            PredictorStyle::MatchEmptinessSloppy => 0,
            PredictorStyle::AlwaysSegmentPerfect => 1,
            PredictorStyle::Oracle => 2,
        }
    }

    fn sloppy_profile(scenario: &SynthScenario) -> AnnotatorProfile {
        AnnotatorProfile::neutral()
            .with_empty_rate(scenario.mean_empty_rate())
            .with_bias(Self::SLOPPY_SCALE, [0.0, 0.0])
            .with_noise(Self::SLOPPY_SIGMA, 3)
    }
}

/// A named synthetic model in a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorSpec {
    pub name: String,
    pub style: PredictorStyle,
    pub n_samples: usize,
}

impl PredictorSpec {
    pub fn new(name: impl Into<String>, style: PredictorStyle, n_samples: usize) -> Self {
        PredictorSpec {
            name: name.into(),
            style,
            n_samples,
        }
    }

    pub(crate) fn validate(&self, path: &str) -> Result<()> {
        let valid_name = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
            && !self.name.starts_with('.');
        if !valid_name {
            return Err(Error::invalid(
                format!("{path}.name"),
                format!("`{}` is not a valid model directory name", self.name),
            ));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid(
                format!("{path}.n_samples"),
                "must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Prediction samples for every image of `scenario`, one [`SampleSet`] of
/// `n_samples` masks per entry of `truths`.
///
/// `model_key` separates the random streams of different models that share a
/// style.
pub fn synthetic_predictor(
    scenario: &SynthScenario,
    truths: &[TrueShape],
    style: PredictorStyle,
    n_samples: usize,
    model_key: u64,
) -> Result<Vec<SampleSet>> {
    scenario.validate()?;
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    let sloppy = PredictorStyle::sloppy_profile(scenario);
    truths
        .par_iter()
        .enumerate()
        .map(|(image, truth)| {
            let masks: Vec<BinaryMask> = (0..n_samples)
                .map(|s| {
                    let mut rng = SplitMix64::substream(
                        scenario.seed,
                        &[
                            stream::PREDICTION,
                            model_key,
                            style.code(),
                            image as u64,
                            s as u64,
                        ],
                    );
                    match style {
                        PredictorStyle::AlwaysSegmentPerfect => rasterize(truth, scenario.grid),
                        PredictorStyle::MatchEmptinessSloppy => {
                            annotate(truth, &sloppy, scenario.grid, &mut rng)
                        }
                        PredictorStyle::Oracle => {
                            let pick = rng.below(scenario.annotators.len() as u64) as usize;
                            annotate(truth, &scenario.annotators[pick], scenario.grid, &mut rng)
                        }
                    }
                })
                .collect();
            SampleSet::new(masks)
        })
        .collect()
}
