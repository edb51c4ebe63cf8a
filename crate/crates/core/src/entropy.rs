//! Pixel-wise entropy of the mean segmentation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{GridShape, SampleSet};

/// Values this far outside `[0, 1]` are clamped on ingest; anything further
/// out is rejected.
const PROB_SLACK: f64 = 1e-9;

/// Per-pixel foreground probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    shape: GridShape,
    values: Vec<f64>,
}

impl ProbMap {
    pub fn new(shape: GridShape, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.pixel_count() {
            return Err(Error::PixelCount {
                expected: shape.pixel_count(),
                found: values.len(),
            });
        }
        for (index, v) in values.iter_mut().enumerate() {
            if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(v) {
                return Err(Error::ProbabilityOutOfRange { index, value: *v });
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(ProbMap { shape, values })
    }

    pub fn constant(shape: GridShape, p: f64) -> Result<Self> {
        Self::new(shape, vec![p; shape.pixel_count()])
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.shape.width() + col]
    }

    /// `1 - p` at every pixel.
    pub fn complement(&self) -> ProbMap {
        ProbMap {
            shape: self.shape,
            values: self.values.iter().map(|p| 1.0 - p).collect(),
        }
    }

    /// Pixel-wise average of several maps.
    pub fn average(maps: &[ProbMap]) -> Result<ProbMap> {
        let first = maps.first().ok_or(Error::EmptySampleSet)?;
        let mut sums = vec![0.0; first.values.len()];
        for map in maps {
            first.shape.ensure_same(&map.shape)?;
            for (s, v) in sums.iter_mut().zip(&map.values) {
                *s += v;
            }
        }
        let n = maps.len() as f64;
        ProbMap::new(first.shape, sums.into_iter().map(|s| s / n).collect())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    /// Bits; binary entropy peaks at 1.
    #[default]
    Two,
    /// Nats; binary entropy peaks at ln 2.
    Natural,
}

impl LogBase {
    pub fn max_entropy(self) -> f64 {
        match self {
            LogBase::Two => 1.0,
            LogBase::Natural => std::f64::consts::LN_2,
        }
    }

    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }
}

/// Per-pixel binary entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyMap {
    shape: GridShape,
    base: LogBase,
    values: Vec<f64>,
}

impl EntropyMap {
    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn base(&self) -> LogBase {
        self.base
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.shape.width() + col]
    }

    /// Entropy rescaled to `[0, 1]` by the maximum for the base, as a
    /// probability map suitable for 16-bit export.
    pub fn normalized(&self) -> ProbMap {
        let max = self.base.max_entropy();
        ProbMap {
            shape: self.shape,
            values: self
                .values
                .iter()
                .map(|h| (h / max).clamp(0.0, 1.0))
                .collect(),
        }
    }
}

/// Binary entropy of `p`, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64, base: LogBase) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * base.log(q) };
    // Rounding can push 0.5 a hair above the maximum.
    (term(p) + term(1.0 - p)).clamp(0.0, base.max_entropy())
}

/// Fraction of masks with foreground at each pixel.
pub fn mean_map(set: &SampleSet) -> ProbMap {
    let shape = set.shape();
    let mut counts = vec![0u32; shape.pixel_count()];
    for mask in set {
        for (c, bit) in counts.iter_mut().zip(mask.iter()) {
            *c += bit as u32;
        }
    }
    let n = set.len() as f64;
    ProbMap {
        shape,
        values: counts.into_iter().map(|c| c as f64 / n).collect(),
    }
}

pub fn entropy_map(p: &ProbMap, base: LogBase) -> EntropyMap {
    EntropyMap {
        shape: p.shape,
        base,
        values: p.values.iter().map(|&q| binary_entropy(q, base)).collect(),
    }
}

/// Average of the per-map entropies. A diagnostic only: the entropy of the
/// mean is [`entropy_map`] applied to [`ProbMap::average`].
pub fn mean_of_entropies(maps: &[ProbMap], base: LogBase) -> Result<EntropyMap> {
    let first = maps.first().ok_or(Error::EmptySampleSet)?;
    let mut sums = vec![0.0; first.values.len()];
    for map in maps {
        first.shape.ensure_same(&map.shape)?;
        for (s, &q) in sums.iter_mut().zip(&map.values) {
            *s += binary_entropy(q, base);
        }
    }
    let n = maps.len() as f64;
    Ok(EntropyMap {
        shape: first.shape,
        base,
        values: sums.into_iter().map(|s| s / n).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

/// Equal-width histogram over `[0, max entropy]`. Bins are half-open except
/// the last, which also takes the maximum.
pub fn entropy_histogram(e: &EntropyMap, bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::invalid("bins", "must be at least 1"));
    }
    let max = e.base.max_entropy();
    let mut counts = vec![0u64; bins];
    for &h in &e.values {
        let idx = ((h / max) * bins as f64).floor();
        let idx = if idx.is_nan() || idx < 0.0 {
            0
        } else {
            (idx as usize).min(bins - 1)
        };
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: max * i as f64 / bins as f64,
            hi: max * (i + 1) as f64 / bins as f64,
            count,
        })
        .collect())
}

/// Adds `other` into `acc` bin by bin. Both must come from the same binning.
pub fn merge_histograms(acc: &mut [HistogramBin], other: &[HistogramBin]) {
    assert_eq!(acc.len(), other.len());
    for (a, b) in acc.iter_mut().zip(other) {
        a.count += b.count;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::BinaryMask;

    fn grid(h: usize, w: usize) -> GridShape {
        GridShape::new(h, w).unwrap()
    }

    #[test]
    fn mean_map_counts() {
        let s = grid(1, 2);
        let set = SampleSet::new(vec![
            BinaryMask::from_bools(s, &[true, false]).unwrap(),
            BinaryMask::from_bools(s, &[true, false]).unwrap(),
            BinaryMask::from_bools(s, &[false, false]).unwrap(),
        ])
        .unwrap();
        let p = mean_map(&set);
        assert_eq!(p.values(), &[2.0 / 3.0, 0.0]);
    }

    #[test]
    fn identical_masks_give_indicator() {
        let s = grid(2, 2);
        let m = BinaryMask::from_bools(s, &[true, false, true, true]).unwrap();
        let p = mean_map(&SampleSet::new(vec![m.clone(); 4]).unwrap());
        assert_eq!(p.values(), &[1.0, 0.0, 1.0, 1.0]);
        let e = entropy_map(&p, LogBase::Two);
        assert!(e.values().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn complementary_pair_gives_half() {
        let s = grid(2, 2);
        let m = BinaryMask::from_bools(s, &[true, false, true, false]).unwrap();
        let c = BinaryMask::from_bools(s, &[false, true, false, true]).unwrap();
        let p = mean_map(&SampleSet::new(vec![m, c]).unwrap());
        assert!(p.values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5, LogBase::Two), 1.0);
        assert_eq!(binary_entropy(0.0, LogBase::Two), 0.0);
        assert_eq!(binary_entropy(1.0, LogBase::Two), 0.0);
        // -0.25 log2 0.25 - 0.75 log2 0.75
        assert!((binary_entropy(0.25, LogBase::Two) - 0.8112781245).abs() < 1e-10);
        assert!((binary_entropy(0.5, LogBase::Natural) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn probmap_ingest_clamps_and_rejects() {
        let s = grid(1, 3);
        let p = ProbMap::new(s, vec![-1e-10, 0.5, 1.0 + 1e-10]).unwrap();
        assert_eq!(p.values(), &[0.0, 0.5, 1.0]);
        assert!(matches!(
            ProbMap::new(s, vec![0.0, 1.01, 0.0]),
            Err(Error::ProbabilityOutOfRange { index: 1, .. })
        ));
        assert!(ProbMap::new(s, vec![0.0; 2]).is_err());
    }

    #[test]
    fn histogram_edges() {
        let s = grid(2, 2);
        let zeros = entropy_map(&ProbMap::constant(s, 0.0).unwrap(), LogBase::Two);
        let h = entropy_histogram(&zeros, 4).unwrap();
        assert_eq!(
            h.iter().map(|b| b.count).collect::<Vec<_>>(),
            vec![4, 0, 0, 0]
        );

        let ones = entropy_map(&ProbMap::constant(s, 0.5).unwrap(), LogBase::Two);
        let h = entropy_histogram(&ones, 4).unwrap();
        assert_eq!(
            h.iter().map(|b| b.count).collect::<Vec<_>>(),
            vec![0, 0, 0, 4]
        );
        assert_eq!(h[3].hi, 1.0);

        let half = entropy_map(
            &ProbMap::new(s, vec![0.0, 0.5, 1.0, 0.5]).unwrap(),
            LogBase::Two,
        );
        let h = entropy_histogram(&half, 2).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![2, 2]);

        let h = entropy_histogram(&half, 1).unwrap();
        assert_eq!(h[0].count, 4);
        assert!(entropy_histogram(&half, 0).is_err());
    }

    #[test]
    fn natural_base_histogram_spans_ln2() {
        let s = grid(1, 1);
        let e = entropy_map(&ProbMap::constant(s, 0.5).unwrap(), LogBase::Natural);
        let h = entropy_histogram(&e, 3).unwrap();
        assert_eq!(h[2].count, 1);
        assert!((h[2].hi - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn mean_of_entropies_differs_from_entropy_of_mean() {
        let s = grid(1, 1);
        let maps = [
            ProbMap::constant(s, 0.0).unwrap(),
            ProbMap::constant(s, 1.0).unwrap(),
        ];
        let moe = mean_of_entropies(&maps, LogBase::Two).unwrap();
        assert_eq!(moe.values(), &[0.0]);
        let eom = entropy_map(&ProbMap::average(&maps).unwrap(), LogBase::Two);
        assert_eq!(eom.values(), &[1.0]);
    }
}
