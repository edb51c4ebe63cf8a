use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{GridShape, SampleSet};
use crate::rng::SplitMix64;

use super::annotator::{annotate, AnnotatorProfile};
use super::predictor::{PredictorSpec, PredictorStyle};
use super::shape::TrueShape;

/// First key of every substream path, separating the draw families.
pub(crate) mod stream {
    pub const TRUTH: u64 = 0;
    pub const ANNOTATION: u64 = 1;
    pub const PREDICTION: u64 = 2;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthKind {
    Disk,
    Ellipse,
}

/// How the true shape of each image is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthParams {
    pub kind: TruthKind,
    pub radius_min: f64,
    pub radius_max: f64,
    /// Probability that an object is present at all.
    #[serde(default = "one")]
    pub presence_prob: f64,
}

fn one() -> f64 {
    1.0
}

impl TruthParams {
    fn validate(&self, path: &str) -> Result<()> {
        if !(self.radius_min.is_finite() && self.radius_min > 0.0) {
            return Err(Error::invalid(
                format!("{path}.radius_min"),
                format!("must be positive, got {}", self.radius_min),
            ));
        }
        if !(self.radius_max.is_finite() && self.radius_max >= self.radius_min) {
            return Err(Error::invalid(
                format!("{path}.radius_max"),
                format!(
                    "must be at least radius_min ({}), got {}",
                    self.radius_min, self.radius_max
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.presence_prob) {
            return Err(Error::invalid(
                format!("{path}.presence_prob"),
                format!("must be in [0, 1], got {}", self.presence_prob),
            ));
        }
        Ok(())
    }

    /// Draws one true shape. Uses a fixed number of draws from `rng`.
    fn draw(&self, grid: GridShape, rng: &mut SplitMix64) -> TrueShape {
        let present = rng.bernoulli(self.presence_prob);
        let rx = rng.uniform(self.radius_min, self.radius_max);
        let ry = rng.uniform(self.radius_min, self.radius_max);
        let ux = rng.next_f64();
        let uy = rng.next_f64();
        if !present {
            return TrueShape::absent();
        }
        let (rx, ry) = match self.kind {
            TruthKind::Disk => (rx, rx),
            TruthKind::Ellipse => (rx, ry),
        };
        // Keep the object inside the grid when it fits.
        let place = |u: f64, r: f64, len: usize| {
            let len = len as f64;
            if 2.0 * r >= len {
                len / 2.0
            } else {
                r + u * (len - 2.0 * r)
            }
        };
        let cx = place(ux, rx, grid.width());
        let cy = place(uy, ry, grid.height());
        match self.kind {
            TruthKind::Disk => TrueShape::disk(cx, cy, rx),
            TruthKind::Ellipse => TrueShape::ellipse(cx, cy, rx, ry),
        }
        .expect("radii validated positive")
    }
}

/// Full parameterization of a synthetic multi-annotator dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthScenario {
    pub grid: GridShape,
    pub n_images: usize,
    pub truth: TruthParams,
    pub annotators: Vec<AnnotatorProfile>,
    pub seed: u64,
    /// Synthetic models whose samples are written next to the annotations.
    #[serde(default)]
    pub predictors: Vec<PredictorSpec>,
}

/// One generated image: its true shape and one mask per annotator.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthImage {
    pub image_id: String,
    pub truth: TrueShape,
    pub annotations: SampleSet,
}

pub fn image_id(index: usize) -> String {
    format!("img{index:05}")
}

impl SynthScenario {
    /// Near-identical annotations: no bias, no ambiguity, a thin drawing
    /// error along the boundary. Six annotators.
    pub fn prostate_like(n_images: usize, seed: u64) -> Self {
        SynthScenario {
            grid: GridShape::new(128, 128).expect("non-zero"),
            n_images,
            truth: TruthParams {
                kind: TruthKind::Ellipse,
                radius_min: 18.0,
                radius_max: 36.0,
                presence_prob: 1.0,
            },
            annotators: vec![AnnotatorProfile::neutral().with_noise(0.04, 5); 6],
            seed,
            predictors: vec![
                PredictorSpec::new("oracle", PredictorStyle::Oracle, 16),
                PredictorSpec::new("perfect", PredictorStyle::AlwaysSegmentPerfect, 16),
            ],
        }
    }

    /// Ambiguous small lesions: four annotators who each skip the lesion half
    /// of the time and differ systematically in how large they draw it.
    pub fn lidc_like(n_images: usize, seed: u64) -> Self {
        let base = AnnotatorProfile::neutral()
            .with_noise(0.08, 4)
            .with_empty_rate(0.5);
        SynthScenario {
            grid: GridShape::new(128, 128).expect("non-zero"),
            n_images,
            truth: TruthParams {
                kind: TruthKind::Ellipse,
                radius_min: 6.0,
                radius_max: 16.0,
                presence_prob: 1.0,
            },
            annotators: vec![
                base.clone().with_bias(0.9, [0.0, 0.0]),
                base.clone().with_bias(1.0, [0.5, 0.0]),
                base.clone().with_bias(1.05, [0.0, -0.5]),
                base.with_bias(1.15, [0.0, 0.0]),
            ],
            seed,
            predictors: vec![
                PredictorSpec::new("sloppy", PredictorStyle::MatchEmptinessSloppy, 16),
                PredictorSpec::new("perfect", PredictorStyle::AlwaysSegmentPerfect, 16),
                PredictorSpec::new("oracle", PredictorStyle::Oracle, 16),
            ],
        }
    }

    pub fn preset(name: &str, n_images: usize, seed: u64) -> Option<Self> {
        match name {
            "prostate_like" => Some(Self::prostate_like(n_images, seed)),
            "lidc_like" => Some(Self::lidc_like(n_images, seed)),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 2] = ["prostate_like", "lidc_like"];

    pub fn validate(&self) -> Result<()> {
        self.truth.validate("truth")?;
        if self.annotators.is_empty() {
            return Err(Error::invalid(
                "annotators",
                "at least one annotator is required",
            ));
        }
        for (i, a) in self.annotators.iter().enumerate() {
            a.validate(&format!("annotators[{i}]"))?;
        }
        for (i, p) in self.predictors.iter().enumerate() {
            p.validate(&format!("predictors[{i}]"))?;
            if self.predictors[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::invalid(
                    format!("predictors[{i}].name"),
                    format!("duplicate name `{}`", p.name),
                ));
            }
        }
        Ok(())
    }

    /// Mean of the annotators' empty rates.
    pub fn mean_empty_rate(&self) -> f64 {
        self.annotators.iter().map(|a| a.empty_rate).sum::<f64>() / self.annotators.len() as f64
    }

    /// The true shape of image `index`.
    pub fn truth_for(&self, index: usize) -> TrueShape {
        let mut rng = SplitMix64::substream(self.seed, &[stream::TRUTH, index as u64]);
        self.truth.draw(self.grid, &mut rng)
    }

    /// The annotations of image `index` given its true shape.
    pub fn annotations_for(&self, index: usize, truth: &TrueShape) -> SampleSet {
        let masks = self
            .annotators
            .iter()
            .enumerate()
            .map(|(a, profile)| {
                let mut rng =
                    SplitMix64::substream(self.seed, &[stream::ANNOTATION, index as u64, a as u64]);
                annotate(truth, profile, self.grid, &mut rng)
            })
            .collect();
        SampleSet::new(masks).expect("at least one annotator, shared grid")
    }
}

/// Generates every image of the scenario. Each image and annotator draws from
/// its own substream, so the result does not depend on thread count.
pub fn generate(scenario: &SynthScenario) -> Result<Vec<SynthImage>> {
    scenario.validate()?;
    Ok((0..scenario.n_images)
        .into_par_iter()
        .map(|i| {
            let truth = scenario.truth_for(i);
            SynthImage {
                image_id: image_id(i),
                annotations: scenario.annotations_for(i, &truth),
                truth,
            }
        })
        .collect())
}
