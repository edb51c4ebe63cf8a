use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::metrics::{GedReport, Metric};

/// Largest effective sample size for which the exact null distribution is
/// used (tie-free inputs only).
pub const EXACT_MAX_N: usize = 25;

/// Direction of the one-sided alternative, stated for the `a` series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// `a` tends to be smaller than `b`.
    #[serde(rename = "less")]
    ALess,
    /// `a` tends to be larger than `b`.
    #[serde(rename = "greater")]
    AGreater,
}

impl Alternative {
    pub fn flipped(self) -> Self {
        match self {
            Alternative::ALess => Alternative::AGreater,
            Alternative::AGreater => Alternative::ALess,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Alternative::ALess => "less",
            Alternative::AGreater => "greater",
        }
    }
}

impl std::str::FromStr for Alternative {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "less" | "a_less" => Ok(Alternative::ALess),
            "greater" | "a_greater" => Ok(Alternative::AGreater),
            other => Err(format!("unknown alternative `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMode {
    Exact,
    NormalApproximation,
}

/// Two value series paired by image id.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    image_ids: Vec<String>,
    values_a: Vec<f64>,
    values_b: Vec<f64>,
}

impl PairedSeries {
    pub fn new(image_ids: Vec<String>, values_a: Vec<f64>, values_b: Vec<f64>) -> Result<Self> {
        if image_ids.len() != values_a.len() || image_ids.len() != values_b.len() {
            return Err(Error::LengthMismatch {
                ids: image_ids.len(),
                a: values_a.len(),
                b: values_b.len(),
            });
        }
        Ok(PairedSeries {
            image_ids,
            values_a,
            values_b,
        })
    }

    /// Pairs per-image reports of two models on `metric`. Images missing
    /// from either side or with an undefined cell are dropped; the second
    /// return value counts them.
    pub fn from_reports(
        a: &BTreeMap<String, GedReport>,
        b: &BTreeMap<String, GedReport>,
        metric: Metric,
    ) -> Result<(Self, usize)> {
        let mut ids = Vec::new();
        let mut values_a = Vec::new();
        let mut values_b = Vec::new();
        let mut dropped = 0;
        for (id, ra) in a {
            match (
                ra.metric(metric),
                b.get(id).and_then(|rb| rb.metric(metric)),
            ) {
                (Some(x), Some(y)) => {
                    ids.push(id.clone());
                    values_a.push(x);
                    values_b.push(y);
                }
                _ => dropped += 1,
            }
        }
        dropped += b.keys().filter(|id| !a.contains_key(*id)).count();
        if ids.is_empty() {
            return Err(Error::NoCommonImages);
        }
        Ok((PairedSeries::new(ids, values_a, values_b)?, dropped))
    }

    pub fn image_ids(&self) -> &[String] {
        &self.image_ids
    }

    pub fn values_a(&self) -> &[f64] {
        &self.values_a
    }

    pub fn values_b(&self) -> &[f64] {
        &self.values_b
    }

    pub fn len(&self) -> usize {
        self.image_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image_ids.is_empty()
    }

    /// The same pairs with the two sides exchanged.
    pub fn swapped(&self) -> PairedSeries {
        PairedSeries {
            image_ids: self.image_ids.clone(),
            values_a: self.values_b.clone(),
            values_b: self.values_a.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of the ranks of the positive differences `a - b`.
    pub w_statistic: f64,
    /// Floored at the smallest normal double when the tail underflows;
    /// `log10_p` keeps the unfloored value.
    pub p_value: f64,
    pub log10_p: f64,
    pub n_effective: usize,
    pub n_zeros: usize,
    pub mode: TestMode,
}

/// Midranks of `values`, plus the size of every tie group.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_sizes = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Ranks start..end (1-based start+1..=end) share their average.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        if end - start > 1 {
            tie_sizes.push(end - start);
        }
        start = end;
    }
    (ranks, tie_sizes)
}

/// Number of sign assignments giving each rank sum, for ranks `1..=n`.
fn signed_rank_counts(n: usize) -> Vec<u64> {
    let max = n * (n + 1) / 2;
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    for rank in 1..=n {
        for s in (rank..=max).rev() {
            counts[s] += counts[s - rank];
        }
    }
    counts
}

/// Natural log of the upper standard normal tail `P(Z > x)`.
pub(crate) fn ln_normal_sf(x: f64) -> f64 {
    if x < 8.0 {
        (0.5 * erfc(x / std::f64::consts::SQRT_2)).ln()
    } else {
        // Laplace's continued fraction for the Mills ratio Q(x) / φ(x).
        let mut t = x;
        for k in (1..=200).rev() {
            t = x + k as f64 / t;
        }
        -0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln() - t.ln()
    }
}

/// One-sided Wilcoxon signed-rank test on the differences `a - b`.
///
/// Zero differences are discarded. Tie-free inputs with at most
/// [`EXACT_MAX_N`] nonzero differences get the exact null distribution;
/// otherwise the normal approximation with tie-corrected variance and a 0.5
/// continuity correction is used.
pub fn wilcoxon_one_sided(s: &PairedSeries, alternative: Alternative) -> Result<WilcoxonResult> {
    wilcoxon_with_mode(s, alternative, None)
}

/// [`wilcoxon_one_sided`] with the null distribution chosen by the caller.
/// `Some(TestMode::Exact)` fails on tied magnitudes or more than
/// [`EXACT_MAX_N`] nonzero differences.
pub fn wilcoxon_with_mode(
    s: &PairedSeries,
    alternative: Alternative,
    mode: Option<TestMode>,
) -> Result<WilcoxonResult> {
    if s.is_empty() {
        return Err(Error::EmptySeries);
    }
    let diffs: Vec<f64> = s
        .values_a
        .iter()
        .zip(&s.values_b)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n_zeros = s.len() - diffs.len();
    let n = diffs.len();
    if n == 0 {
        return Err(Error::AllZeroDifferences { n: s.len() });
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = midranks(&magnitudes);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();

    let exact_ok = n <= EXACT_MAX_N && ties.is_empty();
    if mode == Some(TestMode::Exact) && !exact_ok {
        return Err(Error::invalid(
            "mode",
            format!("exact test needs at most {EXACT_MAX_N} tie-free differences, got {n} with {} tie groups", ties.len()),
        ));
    }
    if exact_ok && mode != Some(TestMode::NormalApproximation) {
        // Tie-free ranks are exactly 1..=n, so the statistic is an integer.
        let w = w_plus.round() as usize;
        let counts = signed_rank_counts(n);
        let tail: u64 = match alternative {
            Alternative::AGreater => counts[w..].iter().sum(),
            Alternative::ALess => counts[..=w].iter().sum(),
        };
        let p = tail as f64 / (1u64 << n) as f64;
        return Ok(WilcoxonResult {
            w_statistic: w_plus,
            p_value: p,
            log10_p: p.log10(),
            n_effective: n,
            n_zeros,
            mode: TestMode::Exact,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let sd = var.sqrt();
    let ln_p = match alternative {
        Alternative::AGreater => ln_normal_sf((w_plus - mean - 0.5) / sd),
        Alternative::ALess => ln_normal_sf(-(w_plus - mean + 0.5) / sd),
    };
    let p = ln_p.exp().clamp(f64::MIN_POSITIVE, 1.0);
    Ok(WilcoxonResult {
        w_statistic: w_plus,
        p_value: p,
        log10_p: ln_p / std::f64::consts::LN_10,
        n_effective: n,
        n_zeros,
        mode: TestMode::NormalApproximation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(a: &[f64], b: &[f64]) -> PairedSeries {
        let ids = (0..a.len()).map(|i| format!("img{i}")).collect();
        PairedSeries::new(ids, a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn all_positive_five() {
        let s = series(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 5]);
        let r = wilcoxon_one_sided(&s, Alternative::AGreater).unwrap();
        assert_eq!(r.p_value, 0.03125);
        assert_eq!(r.w_statistic, 15.0);
        assert_eq!(r.mode, TestMode::Exact);
        let r = wilcoxon_one_sided(&s, Alternative::ALess).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn single_informative_pair() {
        let s = series(&[0.3, 0.5, 0.7], &[0.3, 0.4, 0.7]);
        let r = wilcoxon_one_sided(&s, Alternative::AGreater).unwrap();
        assert_eq!(r.n_effective, 1);
        assert_eq!(r.n_zeros, 2);
        assert_eq!(r.p_value, 0.5);
    }

    #[test]
    fn swapping_sides_and_direction() {
        let s = series(
            &[0.1, 0.9, 0.35, 0.8, 0.2, 0.6],
            &[0.3, 0.2, 0.3, 0.1, 0.25, 0.0],
        );
        for alt in [Alternative::ALess, Alternative::AGreater] {
            let r = wilcoxon_one_sided(&s, alt).unwrap();
            let q = wilcoxon_one_sided(&s.swapped(), alt.flipped()).unwrap();
            assert_eq!(r.p_value, q.p_value);
        }
    }

    #[test]
    fn errors() {
        let s = series(&[1.0, 2.0], &[1.0, 2.0]);
        assert!(matches!(
            wilcoxon_one_sided(&s, Alternative::ALess),
            Err(Error::AllZeroDifferences { n: 2 })
        ));
        assert!(matches!(
            PairedSeries::new(vec!["a".into()], vec![1.0, 2.0], vec![1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        let empty = PairedSeries::new(vec![], vec![], vec![]).unwrap();
        assert!(wilcoxon_one_sided(&empty, Alternative::ALess).is_err());
    }

    #[test]
    fn ties_force_the_approximation() {
        let s = series(&[1.0, 2.0, 3.0, 4.0], &[0.0, 1.0, 2.0, 2.0]);
        let r = wilcoxon_one_sided(&s, Alternative::AGreater).unwrap();
        assert_eq!(r.mode, TestMode::NormalApproximation);
        // Three tied |d| = 1 share rank 2, the |d| = 2 gets rank 4.
        assert_eq!(r.w_statistic, 10.0);
    }

    #[test]
    fn midranks_average_tied_positions() {
        let (ranks, ties) = midranks(&[3.0, 1.0, 3.0, 2.0, 3.0]);
        assert_eq!(ranks, vec![4.0, 1.0, 4.0, 2.0, 4.0]);
        assert_eq!(ties, vec![3]);
    }

    #[test]
    fn rank_sum_counts_are_symmetric_and_total() {
        for n in 1..=12 {
            let c = signed_rank_counts(n);
            assert_eq!(c.iter().sum::<u64>(), 1u64 << n);
            let rev: Vec<u64> = c.iter().rev().copied().collect();
            assert_eq!(c, rev);
        }
    }

    #[test]
    fn normal_tail_is_continuous_and_deep() {
        let below = ln_normal_sf(8.0 - 1e-9);
        let above = ln_normal_sf(8.0);
        assert!((below - above).abs() < 1e-8);
        // Q(40) ≈ 3.655893540915e-350, far below the smallest double.
        let l10 = ln_normal_sf(40.0) / std::f64::consts::LN_10;
        assert!((l10 - (-349.437006459346)).abs() < 1e-9, "{l10}");
        assert!((ln_normal_sf(0.0) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn extreme_approximation_keeps_log_p() {
        let n = 2000;
        let a: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 1e-3).collect();
        let s = series(&a, &vec![0.0; n]);
        let r = wilcoxon_one_sided(&s, Alternative::AGreater).unwrap();
        assert_eq!(r.mode, TestMode::NormalApproximation);
        assert_eq!(r.p_value, f64::MIN_POSITIVE);
        assert!(r.log10_p < -308.0);
        assert!(r.log10_p.is_finite());
    }
}
