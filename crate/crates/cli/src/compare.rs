//! `segunc compare`: one-sided paired test between two models' reports.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{anyhow, bail};
use serde::Serialize;

use segunc_core::io::{read_report, ReportRow};
use segunc_core::metrics::{GedReport, Metric};
use segunc_core::stats::{wilcoxon_one_sided, Alternative, PairedSeries, TestMode};

use crate::{write_json, SCHEMA_VERSION};

#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub report_a: PathBuf,
    pub report_b: PathBuf,
    /// Required when the report holds more than one model.
    pub model_a: Option<String>,
    pub model_b: Option<String>,
    pub metric: Metric,
    pub alternative: Alternative,
    /// Written as JSON when set.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CompareResult {
    pub schema_version: u32,
    pub metric: Metric,
    pub alternative: Alternative,
    pub model_a: String,
    pub model_b: String,
    /// Images paired on the chosen metric.
    pub n_pairs: usize,
    /// Images present in only one report or with an undefined cell.
    pub n_dropped: usize,
    pub w_statistic: f64,
    pub p_value: f64,
    pub log10_p: f64,
    pub n_effective: usize,
    pub n_zeros: usize,
    pub mode: TestMode,
}

/// Picks one model's rows out of a report, keyed by image id.
pub fn select_model(
    rows: &[ReportRow],
    model: Option<&str>,
    label: &str,
) -> anyhow::Result<(String, BTreeMap<String, GedReport>)> {
    let available: BTreeSet<&str> = rows.iter().map(|r| r.model.as_str()).collect();
    let chosen = match model {
        Some(m) if available.contains(m) => m.to_string(),
        Some(m) => bail!(
            "{label}: model `{m}` not in report (found: {})",
            join(&available)
        ),
        None if available.len() == 1 => available.iter().next().unwrap().to_string(),
        None if available.is_empty() => bail!("{label}: report has no rows"),
        None => bail!(
            "{label}: report holds several models ({}); choose one",
            join(&available)
        ),
    };
    let mut out = BTreeMap::new();
    for row in rows.iter().filter(|r| r.model == chosen) {
        if out.insert(row.image_id.clone(), row.metrics).is_some() {
            bail!("{label}: duplicate row for image `{}`", row.image_id);
        }
    }
    Ok((chosen, out))
}

fn join(set: &BTreeSet<&str>) -> String {
    set.iter().copied().collect::<Vec<_>>().join(", ")
}

pub fn compare_rows(
    rows_a: &[ReportRow],
    rows_b: &[ReportRow],
    config: &CompareConfig,
) -> anyhow::Result<CompareResult> {
    let (model_a, a) = select_model(rows_a, config.model_a.as_deref(), "report a")?;
    let (model_b, b) = select_model(rows_b, config.model_b.as_deref(), "report b")?;
    let (series, n_dropped) = PairedSeries::from_reports(&a, &b, config.metric).map_err(|e| {
        anyhow!(
            "no image has a defined {} in both reports: {e}",
            config.metric.column()
        )
    })?;
    let result = wilcoxon_one_sided(&series, config.alternative)?;
    Ok(CompareResult {
        schema_version: SCHEMA_VERSION,
        metric: config.metric,
        alternative: config.alternative,
        model_a,
        model_b,
        n_pairs: series.len(),
        n_dropped,
        w_statistic: result.w_statistic,
        p_value: result.p_value,
        log10_p: result.log10_p,
        n_effective: result.n_effective,
        n_zeros: result.n_zeros,
        mode: result.mode,
    })
}

pub fn cmd_compare(config: &CompareConfig) -> anyhow::Result<CompareResult> {
    let rows_a = read_report(&config.report_a)?;
    let rows_b = read_report(&config.report_b)?;
    let result = compare_rows(&rows_a, &rows_b, config)?;
    if let Some(out) = &config.out {
        write_json(&result, out)?;
    }
    Ok(result)
}
