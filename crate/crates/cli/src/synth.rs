//! `segunc synth`: write a synthetic dataset to disk.

use std::path::PathBuf;

use anyhow::{bail, Context};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use segunc_core::io::{write_mask, DatasetLayout};
use segunc_core::synth::{generate, rasterize, synthetic_predictor, SynthScenario, TrueShape};

use crate::scenario::ScenarioDoc;
use crate::{with_workers, write_json, SCHEMA_VERSION};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub scenario: PathBuf,
    pub out: PathBuf,
    /// Overrides the scenario's seed.
    pub seed: Option<u64>,
    pub workers: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub schema_version: u32,
    pub preset: Option<&'a str>,
    pub seed: u64,
    pub n_images: usize,
    pub scenario: &'a SynthScenario,
    pub image_ids: Vec<String>,
}

pub fn annotation_file(index: usize) -> String {
    format!("a{index:03}.pgm")
}

pub fn sample_file(index: usize) -> String {
    format!("s{index:04}.pgm")
}

pub fn cmd_synth(config: &SynthConfig) -> anyhow::Result<SynthScenario> {
    let mut doc = ScenarioDoc::load(&config.scenario)?;
    if let Some(seed) = config.seed {
        doc.seed = Some(seed);
    }
    let scenario = doc
        .resolve()
        .with_context(|| format!("invalid scenario {}", config.scenario.display()))?;
    write_dataset(&scenario, doc.preset.as_deref(), config)?;
    Ok(scenario)
}

fn write_dataset(
    scenario: &SynthScenario,
    preset: Option<&str>,
    config: &SynthConfig,
) -> anyhow::Result<()> {
    if config.out.exists() && std::fs::read_dir(&config.out)?.next().is_some() {
        bail!("output directory {} is not empty", config.out.display());
    }
    let layout = DatasetLayout::new(&config.out);
    info!(
        "synthesizing {} images with {} annotators into {}",
        scenario.n_images,
        scenario.annotators.len(),
        config.out.display()
    );

    with_workers(config.workers, || -> anyhow::Result<()> {
        let images = generate(scenario)?;
        let truths: Vec<TrueShape> = images.iter().map(|img| img.truth).collect();
        let predictions = scenario
            .predictors
            .iter()
            .enumerate()
            .map(|(key, spec)| {
                synthetic_predictor(scenario, &truths, spec.style, spec.n_samples, key as u64)
            })
            .collect::<Result<Vec<_>, _>>()?;

        images
            .par_iter()
            .enumerate()
            .try_for_each(|(i, img)| -> anyhow::Result<()> {
                let id = &img.image_id;
                for (a, mask) in img.annotations.iter().enumerate() {
                    write_mask(mask, layout.annotations_dir(id).join(annotation_file(a)))?;
                }
                write_mask(&rasterize(&img.truth, scenario.grid), layout.truth_path(id))?;
                for (spec, sets) in scenario.predictors.iter().zip(&predictions) {
                    for (s, mask) in sets[i].iter().enumerate() {
                        write_mask(
                            mask,
                            layout.predictions_dir(id, &spec.name).join(sample_file(s)),
                        )?;
                    }
                }
                Ok(())
            })?;

        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            preset,
            seed: scenario.seed,
            n_images: scenario.n_images,
            scenario,
            image_ids: images.iter().map(|img| img.image_id.clone()).collect(),
        };
        write_json(&manifest, &config.out.join(MANIFEST_FILE))
    })?
}
