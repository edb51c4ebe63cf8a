//! Scenario documents for `segunc synth`.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "preset": "lidc_like",
//!   "n_images": 200,
//!   "seed": 7
//! }
//! ```
//!
//! With a preset, every other field is optional and overrides the preset's
//! value. Without one, `grid`, `n_images`, `truth` and `annotators` are
//! required.

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use segunc_core::mask::GridShape;
use segunc_core::synth::{AnnotatorProfile, PredictorSpec, SynthScenario, TruthParams};

use crate::SCHEMA_VERSION;

const DEFAULT_PRESET_IMAGES: usize = 100;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridShape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_images: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotators: Option<Vec<AnnotatorProfile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictors: Option<Vec<PredictorSpec>>,
}

impl ScenarioDoc {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow!("{path}: {}", e.into_inner())
        })
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid scenario {}", path.display()))
    }

    /// Fills in the preset, applies overrides and validates.
    pub fn resolve(&self) -> anyhow::Result<SynthScenario> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "schema_version: unsupported version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            );
        }
        let seed = self.seed.unwrap_or(0);
        let mut scenario = match &self.preset {
            Some(name) => {
                let n = self.n_images.unwrap_or(DEFAULT_PRESET_IMAGES);
                SynthScenario::preset(name, n, seed).ok_or_else(|| {
                    anyhow!(
                        "preset: unknown preset `{name}` (expected one of {})",
                        SynthScenario::PRESETS.join(", ")
                    )
                })?
            }
            None => {
                let missing = |field: &str| anyhow!("{field}: required when no preset is given");
                SynthScenario {
                    grid: self.grid.ok_or_else(|| missing("grid"))?,
                    n_images: self.n_images.ok_or_else(|| missing("n_images"))?,
                    truth: self.truth.clone().ok_or_else(|| missing("truth"))?,
                    annotators: self
                        .annotators
                        .clone()
                        .ok_or_else(|| missing("annotators"))?,
                    seed,
                    predictors: Vec::new(),
                }
            }
        };
        if let Some(grid) = self.grid {
            scenario.grid = grid;
        }
        if let Some(truth) = &self.truth {
            scenario.truth = truth.clone();
        }
        if let Some(annotators) = &self.annotators {
            scenario.annotators = annotators.clone();
        }
        if let Some(predictors) = &self.predictors {
            scenario.predictors = predictors.clone();
        }
        scenario.validate()?;
        Ok(scenario)
    }
}
