//! Shared inputs for the benchmarks.

use segunc_core::mask::SampleSet;
use segunc_core::synth::{generate, synthetic_predictor, PredictorStyle, SynthScenario};

/// Annotations and oracle predictions for one `lidc_like` image with
/// `n_samples` predictions.
pub fn lidc_pair(n_samples: usize, seed: u64) -> (SampleSet, SampleSet) {
    let scenario = SynthScenario::lidc_like(1, seed);
    let image = generate(&scenario).expect("preset is valid").remove(0);
    let predictions = synthetic_predictor(
        &scenario,
        &[image.truth],
        PredictorStyle::Oracle,
        n_samples,
        0,
    )
    .expect("preset is valid")
    .remove(0);
    (image.annotations, predictions)
}

/// `n` paired values with a small consistent shift.
pub fn paired_values(n: usize) -> (Vec<f64>, Vec<f64>) {
    let b: Vec<f64> = (0..n)
        .map(|i| ((i * 7919) % 1000) as f64 / 1000.0)
        .collect();
    let a = b
        .iter()
        .enumerate()
        .map(|(i, v)| v + ((i * 104_729) % 997) as f64 / 5000.0 - 0.08)
        .collect();
    (a, b)
}
