//! Finite-sample generalized energy distance between an annotation set and a
//! prediction set,
//!
//! ```text
//! D² = 2·E[d(A, Y)] − E[d(A, A')] − E[d(Y, Y')]
//! ```
//!
//! evaluated exactly over the given sets, plus its split into a detection part
//! (emptiness disagreement) and a segmentation part (IoU over non-empty masks
//! only).
//!
//! Pair sums are accumulated with [`ExactSum`], so every estimate is the
//! correctly rounded value of the exact mean numerator: independent of mask
//! order, of which set is passed first, and of thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, Distance, SampleSet};
use crate::rng::SplitMix64;
use crate::sum::ExactSum;

/// How the within-set expectations are estimated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// All ordered pairs including `i == j` (a V-statistic). The diagonal is
    /// zero for both distances, so `ged(S, S) == 0` and the estimate is never
    /// negative.
    #[default]
    Inclusive,
    /// Off-diagonal pairs only, divided by `n (n - 1)`.
    Unbiased,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Inclusive => "inclusive",
            EstimatorKind::Unbiased => "unbiased",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "inclusive" => Ok(EstimatorKind::Inclusive),
            "unbiased" => Ok(EstimatorKind::Unbiased),
            other => Err(format!("unknown estimator `{other}`")),
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The three expectations making up one energy distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossTermSummary {
    /// `E[d(A, Y)]`
    pub mean_cross: f64,
    /// `E[d(A, A')]`
    pub mean_self_a: f64,
    /// `E[d(Y, Y')]`
    pub mean_self_y: f64,
}

impl CrossTermSummary {
    pub fn energy_distance(&self) -> f64 {
        2.0 * self.mean_cross - self.mean_self_a - self.mean_self_y
    }
}

/// Sum of `distance` over all ordered pairs of `rows × cols`.
fn pair_sum(rows: &[BinaryMask], cols: &[BinaryMask], distance: Distance) -> ExactSum {
    let row_sums: Vec<ExactSum> = rows
        .par_iter()
        .map(|a| cols.iter().map(|b| distance.eval_unchecked(a, b)).collect())
        .collect();
    let mut total = ExactSum::new();
    for s in &row_sums {
        total.merge(s);
    }
    total
}

fn self_mean(set: &SampleSet, distance: Distance, kind: EstimatorKind) -> f64 {
    let n = set.len() as f64;
    // d(x, x) = 0 for both distances, so the full sum equals the off-diagonal
    // sum; only the normalization differs.
    let sum = pair_sum(set.masks(), set.masks(), distance).value();
    match kind {
        EstimatorKind::Inclusive => sum / (n * n),
        EstimatorKind::Unbiased => sum / (n * (n - 1.0)),
    }
}

fn check_inputs(a: &SampleSet, y: &SampleSet, kind: EstimatorKind) -> Result<()> {
    a.shape().ensure_same(&y.shape())?;
    if kind == EstimatorKind::Unbiased {
        let smallest = a.len().min(y.len());
        if smallest < 2 {
            return Err(Error::TooFewForUnbiased { found: smallest });
        }
    }
    Ok(())
}

/// Energy distance between `annotations` and `predictions` under `distance`.
pub fn ged(
    annotations: &SampleSet,
    predictions: &SampleSet,
    distance: Distance,
    kind: EstimatorKind,
) -> Result<(f64, CrossTermSummary)> {
    check_inputs(annotations, predictions, kind)?;
    let cross = pair_sum(annotations.masks(), predictions.masks(), distance).value();
    let summary = CrossTermSummary {
        mean_cross: cross / (annotations.len() as f64 * predictions.len() as f64),
        mean_self_a: self_mean(annotations, distance, kind),
        mean_self_y: self_mean(predictions, distance, kind),
    };
    Ok((summary.energy_distance(), summary))
}

/// Population value of the detection energy distance given the emptiness
/// rates of the two distributions: `2 (p_a - p_y)²`.
///
/// The inclusive estimator reproduces this exactly with the empirical
/// emptiness fractions plugged in.
pub fn det_closed_form(p_a: f64, p_y: f64) -> f64 {
    let diff = p_a - p_y;
    2.0 * diff * diff
}

/// Which per-image metric to read from a [`GedReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Ged,
    Iou,
    Det,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Ged, Metric::Iou, Metric::Det];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Ged => "ged",
            Metric::Iou => "iou",
            Metric::Det => "det",
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            Metric::Ged => "d2_ged",
            Metric::Iou => "d2_iou",
            Metric::Det => "d2_det",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ged" | "d2_ged" => Ok(Metric::Ged),
            "iou" | "d2_iou" => Ok(Metric::Iou),
            "det" | "d2_det" => Ok(Metric::Det),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-image evaluation: full energy distance, its segmentation part over
/// non-empty masks, and its detection part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GedReport {
    pub d2_ged: f64,
    /// `None` when one of the filtered sets has no masks left (or fewer than
    /// two under the unbiased estimator).
    pub d2_iou: Option<f64>,
    pub d2_det: f64,
    pub n_annotations: usize,
    pub n_predictions: usize,
    pub p_empty_ann: f64,
    pub p_empty_pred: f64,
    pub estimator: EstimatorKind,
}

impl GedReport {
    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Ged => Some(self.d2_ged),
            Metric::Iou => self.d2_iou,
            Metric::Det => Some(self.d2_det),
        }
    }
}

/// Computes all three metrics for one image.
pub fn ged_triple(
    annotations: &SampleSet,
    predictions: &SampleSet,
    kind: EstimatorKind,
) -> Result<GedReport> {
    let (d2_ged, _) = ged(annotations, predictions, Distance::Iou, kind)?;
    let (d2_det, _) = ged(annotations, predictions, Distance::Detection, kind)?;
    let min_len = match kind {
        EstimatorKind::Inclusive => 1,
        EstimatorKind::Unbiased => 2,
    };
    let d2_iou = match (annotations.filter_nonempty(), predictions.filter_nonempty()) {
        (Some(a), Some(y)) if a.len() >= min_len && y.len() >= min_len => {
            Some(ged(&a, &y, Distance::Iou, kind)?.0)
        }
        _ => None,
    };
    Ok(GedReport {
        d2_ged,
        d2_iou,
        d2_det,
        n_annotations: annotations.len(),
        n_predictions: predictions.len(),
        p_empty_ann: annotations.empty_fraction(),
        p_empty_pred: predictions.empty_fraction(),
        estimator: kind,
    })
}

/// Seeded cap on set sizes for very large sample counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleCap {
    pub max_masks: usize,
    pub seed: u64,
}

impl SampleCap {
    /// Keeps at most `max_masks` members, chosen by a seeded partial
    /// Fisher-Yates draw and returned in their original order. `stream`
    /// separates the draws for different sets under one seed.
    pub fn apply(&self, set: &SampleSet, stream: u64) -> Result<SampleSet> {
        if self.max_masks == 0 {
            return Err(Error::invalid("max_masks", "must be at least 1"));
        }
        if set.len() <= self.max_masks {
            return Ok(set.clone());
        }
        let mut rng = SplitMix64::substream(self.seed, &[0x5A17, stream]);
        let mut indices: Vec<usize> = (0..set.len()).collect();
        for i in 0..self.max_masks {
            let j = i + rng.below((set.len() - i) as u64) as usize;
            indices.swap(i, j);
        }
        let mut chosen = indices[..self.max_masks].to_vec();
        chosen.sort_unstable();
        SampleSet::new(chosen.into_iter().map(|i| set.masks()[i].clone()).collect())
    }
}

/// [`ged_triple`] on sets first reduced with `cap`.
pub fn ged_triple_capped(
    annotations: &SampleSet,
    predictions: &SampleSet,
    kind: EstimatorKind,
    cap: SampleCap,
) -> Result<GedReport> {
    let a = cap.apply(annotations, 0)?;
    let y = cap.apply(predictions, 1)?;
    ged_triple(&a, &y, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::GridShape;

    fn grid() -> GridShape {
        GridShape::new(4, 4).unwrap()
    }

    fn block(r0: usize, c0: usize, h: usize, w: usize) -> BinaryMask {
        BinaryMask::from_fn(grid(), |r, c| {
            r >= r0 && r < r0 + h && c >= c0 && c < c0 + w
        })
    }

    fn empty() -> BinaryMask {
        BinaryMask::empty(grid())
    }

    #[test]
    fn identical_sets_have_zero_distance() {
        let s = SampleSet::new(vec![block(0, 0, 2, 2), block(1, 1, 2, 3), empty()]).unwrap();
        for d in [Distance::Iou, Distance::Detection] {
            assert_eq!(ged(&s, &s, d, EstimatorKind::Inclusive).unwrap().0, 0.0);
        }
    }

    #[test]
    fn single_pair() {
        let a = SampleSet::new(vec![block(0, 0, 2, 2)]).unwrap();
        let y = SampleSet::new(vec![block(0, 1, 2, 2)]).unwrap();
        let (v, terms) = ged(&a, &y, Distance::Iou, EstimatorKind::Inclusive).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(terms.mean_self_a, 0.0);
        assert_eq!(terms.mean_self_y, 0.0);
    }

    #[test]
    fn detection_example_matches_hand_count() {
        // 2 of 4 annotations empty, 1 of 4 predictions empty.
        let a =
            SampleSet::new(vec![empty(), empty(), block(0, 0, 1, 1), block(2, 2, 2, 2)]).unwrap();
        let y = SampleSet::new(vec![
            empty(),
            block(0, 0, 2, 2),
            block(1, 1, 1, 1),
            block(3, 0, 1, 4),
        ])
        .unwrap();
        let (v, terms) = ged(&a, &y, Distance::Detection, EstimatorKind::Inclusive).unwrap();
        assert_eq!(terms.mean_cross, 0.5);
        assert_eq!(terms.mean_self_a, 0.5);
        assert_eq!(terms.mean_self_y, 0.375);
        assert_eq!(v, 0.125);
        assert_eq!(det_closed_form(0.5, 0.25), 0.125);
        let report = ged_triple(&a, &y, EstimatorKind::Inclusive).unwrap();
        assert_eq!(report.d2_det, 0.125);
        assert_eq!(report.p_empty_ann, 0.5);
        assert_eq!(report.p_empty_pred, 0.25);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(det_closed_form(0.3, 0.3), 0.0);
        assert_eq!(det_closed_form(1.0, 0.0), 2.0);
    }

    #[test]
    fn nonempty_sets_have_no_detection_term() {
        let a = SampleSet::new(vec![block(0, 0, 2, 2), block(0, 0, 3, 3)]).unwrap();
        let y = SampleSet::new(vec![
            block(1, 1, 2, 2),
            block(0, 1, 2, 2),
            block(2, 0, 2, 4),
        ])
        .unwrap();
        let r = ged_triple(&a, &y, EstimatorKind::Inclusive).unwrap();
        assert_eq!(r.d2_det, 0.0);
        assert_eq!(r.d2_iou, Some(r.d2_ged));
    }

    #[test]
    fn all_empty_sets_leave_iou_undefined() {
        let a = SampleSet::new(vec![empty(); 3]).unwrap();
        let y = SampleSet::new(vec![empty(); 2]).unwrap();
        let r = ged_triple(&a, &y, EstimatorKind::Inclusive).unwrap();
        assert_eq!(r.d2_ged, 0.0);
        assert_eq!(r.d2_det, 0.0);
        assert_eq!(r.d2_iou, None);
    }

    #[test]
    fn unbiased_needs_two_masks() {
        let a = SampleSet::new(vec![block(0, 0, 2, 2)]).unwrap();
        let y = SampleSet::new(vec![block(0, 0, 2, 2), empty()]).unwrap();
        assert!(matches!(
            ged(&a, &y, Distance::Iou, EstimatorKind::Unbiased),
            Err(Error::TooFewForUnbiased { found: 1 })
        ));
        // A filtered singleton is a report state, not an error.
        let a2 = SampleSet::new(vec![block(0, 0, 2, 2), block(1, 1, 2, 2)]).unwrap();
        let r = ged_triple(&a2, &y, EstimatorKind::Unbiased).unwrap();
        assert_eq!(r.d2_iou, None);
    }

    #[test]
    fn unbiased_self_terms_skip_the_diagonal() {
        let a = SampleSet::new(vec![block(0, 0, 2, 2), empty()]).unwrap();
        let y = SampleSet::new(vec![block(0, 0, 2, 2), block(0, 0, 2, 2)]).unwrap();
        let (_, t) = ged(&a, &y, Distance::Detection, EstimatorKind::Unbiased).unwrap();
        assert_eq!(t.mean_self_a, 1.0);
        assert_eq!(t.mean_self_y, 0.0);
        assert_eq!(t.mean_cross, 0.5);
    }

    #[test]
    fn shape_mismatch_between_sets() {
        let a = SampleSet::new(vec![block(0, 0, 2, 2)]).unwrap();
        let y = SampleSet::new(vec![BinaryMask::empty(GridShape::new(5, 4).unwrap())]).unwrap();
        assert!(matches!(
            ged(&a, &y, Distance::Iou, EstimatorKind::Inclusive),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn cap_is_seeded_and_order_preserving() {
        let masks: Vec<BinaryMask> = (0..4)
            .flat_map(|r| (0..4).map(move |c| block(r, c, 1, 1)))
            .collect();
        let set = SampleSet::new(masks).unwrap();
        let cap = SampleCap {
            max_masks: 5,
            seed: 9,
        };
        let a = cap.apply(&set, 0).unwrap();
        let b = cap.apply(&set, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        let positions: Vec<usize> = a
            .iter()
            .map(|m| set.iter().position(|s| s == m).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        let small = SampleCap {
            max_masks: 100,
            seed: 9,
        };
        assert_eq!(small.apply(&set, 0).unwrap(), set);
        let r = ged_triple_capped(&set, &set, EstimatorKind::Inclusive, cap).unwrap();
        assert_eq!(r.n_annotations, 5);
    }
}
