//! `segunc eval`: per-image, per-model metric report plus a summary.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use log::{debug, info};
use rayon::prelude::*;
use serde::Serialize;

use segunc_core::io::{write_report, DatasetLayout, ReportRow, DEFAULT_THRESHOLD};
use segunc_core::metrics::{
    ged_triple, ged_triple_capped, EstimatorKind, GedReport, Metric, SampleCap,
};
use segunc_core::stats::{rank_models, RankedModel};
use segunc_core::sum::ExactSum;

use crate::{with_workers, write_json, SCHEMA_VERSION};

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub dataset: PathBuf,
    /// Empty means every model found under `predictions/`.
    pub models: Vec<String>,
    pub estimator: EstimatorKind,
    /// Gray level at or above which a mask pixel is foreground.
    pub threshold: u8,
    pub workers: usize,
    /// Cap on masks per set, drawn with `seed`.
    pub max_samples: Option<usize>,
    pub seed: u64,
    pub out: PathBuf,
    /// Defaults to the report path with a `.summary.json` extension.
    pub summary: Option<PathBuf>,
}

impl EvalConfig {
    pub fn new(dataset: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        EvalConfig {
            dataset: dataset.into(),
            models: Vec::new(),
            estimator: EstimatorKind::default(),
            threshold: DEFAULT_THRESHOLD,
            workers: 0,
            max_samples: None,
            seed: 0,
            out: out.into(),
            summary: None,
        }
    }

    pub fn summary_path(&self) -> PathBuf {
        self.summary
            .clone()
            .unwrap_or_else(|| self.out.with_extension("summary.json"))
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MetricSummary {
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub count: usize,
    pub n_undefined: usize,
}

impl MetricSummary {
    fn of(values: &[Option<f64>]) -> Self {
        let mut defined: Vec<f64> = values.iter().flatten().copied().collect();
        defined.sort_by(f64::total_cmp);
        let count = defined.len();
        let median = match count {
            0 => None,
            n if n % 2 == 1 => Some(defined[n / 2]),
            n => Some((defined[n / 2 - 1] + defined[n / 2]) / 2.0),
        };
        let mean = (count > 0)
            .then(|| defined.iter().copied().collect::<ExactSum>().value() / count as f64);
        MetricSummary {
            mean,
            median,
            count,
            n_undefined: values.len() - count,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ModelSummary {
    pub model: String,
    pub n_images: usize,
    pub d2_ged: MetricSummary,
    pub d2_iou: MetricSummary,
    pub d2_det: MetricSummary,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub schema_version: u32,
    pub estimator: EstimatorKind,
    pub threshold: u8,
    pub n_images: usize,
    pub models: Vec<ModelSummary>,
    /// Metric name to models ordered best first, over images where every
    /// model has a defined value.
    pub rankings: BTreeMap<String, Vec<RankedModel>>,
}

/// Computes every `(image, model)` report in memory. Rows are ordered by
/// image id, then by model name.
pub fn evaluate(config: &EvalConfig) -> anyhow::Result<Vec<ReportRow>> {
    let layout = DatasetLayout::open(&config.dataset)?;
    let image_ids = layout.image_ids()?;
    if image_ids.is_empty() {
        bail!("dataset {} contains no images", config.dataset.display());
    }
    let discovered = layout.model_names()?;
    let models: Vec<String> = if config.models.is_empty() {
        discovered.clone()
    } else {
        let mut m = config.models.clone();
        m.sort();
        m.dedup();
        m
    };
    if models.is_empty() {
        bail!("dataset {} has no predictions", config.dataset.display());
    }
    for m in &models {
        if !discovered.contains(m) {
            bail!("unknown model `{m}` (found: {})", discovered.join(", "));
        }
    }
    // Every image must carry every model before any work starts.
    for id in &image_ids {
        for m in &models {
            if !layout.predictions_dir(id, m).is_dir() {
                bail!("image `{id}`: missing predictions for model `{m}`");
            }
        }
    }
    info!(
        "evaluating {} models on {} images ({} estimator)",
        models.len(),
        image_ids.len(),
        config.estimator
    );
    let cap = config.max_samples.map(|max_masks| SampleCap {
        max_masks,
        seed: config.seed,
    });

    with_workers(config.workers, || {
        image_ids
            .par_iter()
            .map(|id| -> anyhow::Result<Vec<ReportRow>> {
                let annotations = layout.load_annotations(id, config.threshold)?;
                models
                    .iter()
                    .map(|model| {
                        let predictions = layout.load_predictions(id, model, config.threshold)?;
                        let metrics = match cap {
                            Some(cap) => {
                                ged_triple_capped(&annotations, &predictions, config.estimator, cap)
                            }
                            None => ged_triple(&annotations, &predictions, config.estimator),
                        }
                        .with_context(|| format!("image `{id}`, model `{model}`"))?;
                        debug!("{id} {model}: {metrics:?}");
                        Ok(ReportRow {
                            image_id: id.clone(),
                            model: model.clone(),
                            metrics,
                        })
                    })
                    .collect()
            })
            .collect::<anyhow::Result<Vec<Vec<ReportRow>>>>()
    })?
    .map(|nested| nested.into_iter().flatten().collect())
}

/// Groups rows as model → image id → report.
pub fn by_model(rows: &[ReportRow]) -> BTreeMap<String, BTreeMap<String, GedReport>> {
    let mut out: BTreeMap<String, BTreeMap<String, GedReport>> = BTreeMap::new();
    for row in rows {
        out.entry(row.model.clone())
            .or_default()
            .insert(row.image_id.clone(), row.metrics);
    }
    out
}

pub fn summarize(rows: &[ReportRow], config: &EvalConfig) -> anyhow::Result<Summary> {
    let grouped = by_model(rows);
    let models = grouped
        .iter()
        .map(|(model, reports)| {
            let column = |metric: Metric| -> Vec<Option<f64>> {
                reports.values().map(|r| r.metric(metric)).collect()
            };
            ModelSummary {
                model: model.clone(),
                n_images: reports.len(),
                d2_ged: MetricSummary::of(&column(Metric::Ged)),
                d2_iou: MetricSummary::of(&column(Metric::Iou)),
                d2_det: MetricSummary::of(&column(Metric::Det)),
            }
        })
        .collect();
    let mut rankings = BTreeMap::new();
    for metric in Metric::ALL {
        // No image with a defined value for every model: leave the ranking out.
        if let Ok(ranking) = rank_models(&grouped, metric) {
            rankings.insert(metric.as_str().to_string(), ranking.entries);
        }
    }
    let n_images = rows
        .iter()
        .map(|r| r.image_id.as_str())
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    Ok(Summary {
        schema_version: SCHEMA_VERSION,
        estimator: config.estimator,
        threshold: config.threshold,
        n_images,
        models,
        rankings,
    })
}

/// Evaluates, then writes the report and summary. Nothing is written unless
/// the whole evaluation succeeds.
pub fn cmd_eval(config: &EvalConfig) -> anyhow::Result<(Vec<ReportRow>, Summary)> {
    let rows = evaluate(config)?;
    let summary = summarize(&rows, config)?;
    write_report(&rows, &config.out)?;
    write_json(&summary, &config.summary_path())?;
    info!("wrote {} rows to {}", rows.len(), config.out.display());
    Ok((rows, summary))
}
