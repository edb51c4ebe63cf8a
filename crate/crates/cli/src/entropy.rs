//! `segunc entropy`: entropy-of-the-mean maps and histograms per image.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context};
use log::info;
use rayon::prelude::*;

use segunc_core::entropy::{
    entropy_histogram, entropy_map, mean_map, merge_histograms, HistogramBin, LogBase, ProbMap,
};
use segunc_core::io::{atomic_write, write_probmap, DatasetLayout, DEFAULT_THRESHOLD};

use crate::with_workers;

pub const HISTOGRAM_FILE: &str = "histogram.csv";
/// Scope label of the histogram block pooled over all images.
pub const POOLED_SCOPE: &str = "__all__";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntropySource {
    Annotations,
    /// Binary prediction samples of a model.
    Model(String),
    /// Probability maps of a model, averaged when there are several.
    Probmap(String),
}

#[derive(Debug, Clone)]
pub struct EntropyConfig {
    pub dataset: PathBuf,
    pub source: EntropySource,
    pub bins: usize,
    pub threshold: u8,
    pub workers: usize,
    pub out: PathBuf,
}

impl EntropyConfig {
    pub fn new(
        dataset: impl Into<PathBuf>,
        source: EntropySource,
        out: impl Into<PathBuf>,
    ) -> Self {
        EntropyConfig {
            dataset: dataset.into(),
            source,
            bins: 20,
            threshold: DEFAULT_THRESHOLD,
            workers: 0,
            out: out.into(),
        }
    }
}

pub struct ImageEntropy {
    pub image_id: String,
    /// Entropy in bits, which already spans `[0, 1]`.
    pub map: ProbMap,
    pub histogram: Vec<HistogramBin>,
}

pub fn compute(config: &EntropyConfig) -> anyhow::Result<Vec<ImageEntropy>> {
    let layout = DatasetLayout::open(&config.dataset)?;
    let ids = layout.image_ids()?;
    match &config.source {
        EntropySource::Model(m) if !layout.model_names()?.contains(m) => {
            bail!("unknown model `{m}`")
        }
        EntropySource::Probmap(m) if !layout.probmap_model_names()?.contains(m) => {
            bail!("no probability maps for model `{m}`")
        }
        _ => {}
    }
    with_workers(config.workers, || {
        ids.par_iter()
            .map(|id| -> anyhow::Result<ImageEntropy> {
                let mean = match &config.source {
                    EntropySource::Annotations => {
                        mean_map(&layout.load_annotations(id, config.threshold)?)
                    }
                    EntropySource::Model(m) => {
                        mean_map(&layout.load_predictions(id, m, config.threshold)?)
                    }
                    EntropySource::Probmap(m) => ProbMap::average(&layout.load_probmaps(id, m)?)
                        .with_context(|| format!("image `{id}`"))?,
                };
                let entropy = entropy_map(&mean, LogBase::Two);
                Ok(ImageEntropy {
                    image_id: id.clone(),
                    histogram: entropy_histogram(&entropy, config.bins)?,
                    map: entropy.normalized(),
                })
            })
            .collect()
    })?
}

pub fn histogram_csv(images: &[ImageEntropy], bins: usize) -> String {
    let mut out = String::from("scope,bin_lo,bin_hi,count\n");
    let mut pooled: Option<Vec<HistogramBin>> = None;
    let block = |out: &mut String, scope: &str, hist: &[HistogramBin]| {
        for b in hist {
            writeln!(out, "{scope},{},{},{}", b.lo, b.hi, b.count).expect("string write");
        }
    };
    for img in images {
        block(&mut out, &img.image_id, &img.histogram);
        match &mut pooled {
            Some(acc) => merge_histograms(acc, &img.histogram),
            None => pooled = Some(img.histogram.clone()),
        }
    }
    let pooled = pooled.unwrap_or_else(|| {
        (0..bins)
            .map(|i| HistogramBin {
                lo: i as f64 / bins as f64,
                hi: (i + 1) as f64 / bins as f64,
                count: 0,
            })
            .collect()
    });
    block(&mut out, POOLED_SCOPE, &pooled);
    out
}

pub fn cmd_entropy(config: &EntropyConfig) -> anyhow::Result<Vec<ImageEntropy>> {
    if config.bins == 0 {
        bail!("--bins must be at least 1");
    }
    let images = compute(config)?;
    for img in &images {
        write_probmap(&img.map, config.out.join(format!("{}.pgm", img.image_id)))?;
    }
    atomic_write(
        &config.out.join(HISTOGRAM_FILE),
        histogram_csv(&images, config.bins).as_bytes(),
    )?;
    info!(
        "wrote {} entropy maps to {}",
        images.len(),
        config.out.display()
    );
    Ok(images)
}
