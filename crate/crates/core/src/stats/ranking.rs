use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{GedReport, Metric};
use crate::sum::ExactSum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    pub model: String,
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub metric: Metric,
    /// Best (lowest mean) first.
    pub entries: Vec<RankedModel>,
    /// Images left out because some model lacks a defined value there.
    pub n_dropped: usize,
}

impl Ranking {
    pub fn leader(&self) -> &str {
        &self.entries[0].model
    }

    pub fn order(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.model.as_str()).collect()
    }
}

/// Orders models by their mean `metric` over the images where every model
/// has a defined value. Lower is better; ties break by model name.
///
/// `per_image` maps model name to image id to report.
pub fn rank_models(
    per_image: &BTreeMap<String, BTreeMap<String, GedReport>>,
    metric: Metric,
) -> Result<Ranking> {
    let all_images: BTreeSet<&String> = per_image.values().flat_map(|m| m.keys()).collect();
    let usable: Vec<&String> = all_images
        .iter()
        .copied()
        .filter(|id| {
            per_image
                .values()
                .all(|reports| reports.get(*id).and_then(|r| r.metric(metric)).is_some())
        })
        .collect();
    if usable.is_empty() {
        return Err(Error::NoCommonImages);
    }
    let mut entries: Vec<RankedModel> = per_image
        .iter()
        .map(|(model, reports)| {
            let sum: ExactSum = usable
                .iter()
                .map(|id| reports[*id].metric(metric).expect("filtered above"))
                .collect();
            RankedModel {
                model: model.clone(),
                mean: sum.value() / usable.len() as f64,
                count: usable.len(),
            }
        })
        .collect();
    entries.sort_by(|x, y| {
        x.mean
            .total_cmp(&y.mean)
            .then_with(|| x.model.cmp(&y.model))
    });
    Ok(Ranking {
        metric,
        entries,
        n_dropped: all_images.len() - usable.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::EstimatorKind;

    fn report(ged: f64, iou: Option<f64>, det: f64) -> GedReport {
        GedReport {
            d2_ged: ged,
            d2_iou: iou,
            d2_det: det,
            n_annotations: 4,
            n_predictions: 4,
            p_empty_ann: 0.0,
            p_empty_pred: 0.0,
            estimator: EstimatorKind::Inclusive,
        }
    }

    fn table(rows: &[(&str, &str, GedReport)]) -> BTreeMap<String, BTreeMap<String, GedReport>> {
        let mut t: BTreeMap<String, BTreeMap<String, GedReport>> = BTreeMap::new();
        for (model, image, r) in rows {
            t.entry(model.to_string())
                .or_default()
                .insert(image.to_string(), *r);
        }
        t
    }

    #[test]
    fn single_model() {
        let t = table(&[("unet", "a", report(0.2, Some(0.1), 0.0))]);
        let r = rank_models(&t, Metric::Ged).unwrap();
        assert_eq!(r.order(), vec!["unet"]);
        assert_eq!(r.entries[0].count, 1);
    }

    #[test]
    fn dominating_model_leads() {
        let t = table(&[
            ("a", "1", report(0.5, None, 0.0)),
            ("a", "2", report(0.7, None, 0.0)),
            ("b", "1", report(0.4, None, 0.0)),
            ("b", "2", report(0.6, None, 0.0)),
        ]);
        assert_eq!(
            rank_models(&t, Metric::Ged).unwrap().order(),
            vec!["b", "a"]
        );
    }

    #[test]
    fn leaders_can_differ_per_metric() {
        let t = table(&[
            ("det_best", "1", report(0.40, Some(0.50), 0.00)),
            ("det_best", "2", report(0.40, Some(0.50), 0.00)),
            ("iou_best", "1", report(0.60, Some(0.05), 0.50)),
            ("iou_best", "2", report(0.60, Some(0.05), 0.50)),
            ("ged_best", "1", report(0.30, Some(0.30), 0.10)),
            ("ged_best", "2", report(0.30, Some(0.30), 0.10)),
        ]);
        assert_eq!(rank_models(&t, Metric::Ged).unwrap().leader(), "ged_best");
        assert_eq!(rank_models(&t, Metric::Iou).unwrap().leader(), "iou_best");
        assert_eq!(rank_models(&t, Metric::Det).unwrap().leader(), "det_best");
    }

    #[test]
    fn undefined_cells_drop_the_image_for_everyone() {
        let t = table(&[
            ("a", "1", report(0.1, Some(0.2), 0.0)),
            ("a", "2", report(0.1, None, 0.0)),
            ("b", "1", report(0.1, Some(0.4), 0.0)),
            ("b", "2", report(0.1, Some(0.0), 0.0)),
        ]);
        let r = rank_models(&t, Metric::Iou).unwrap();
        assert_eq!(r.n_dropped, 1);
        assert_eq!(r.order(), vec!["a", "b"]);
        assert_eq!(r.entries[1].mean, 0.4);
    }

    #[test]
    fn ties_break_by_name() {
        let t = table(&[
            ("z", "1", report(0.1, None, 0.0)),
            ("m", "1", report(0.1, None, 0.0)),
        ]);
        assert_eq!(
            rank_models(&t, Metric::Ged).unwrap().order(),
            vec!["m", "z"]
        );
    }

    #[test]
    fn no_usable_images() {
        let t = table(&[("a", "1", report(0.1, None, 0.0))]);
        assert!(matches!(
            rank_models(&t, Metric::Iou),
            Err(Error::NoCommonImages)
        ));
    }
}
