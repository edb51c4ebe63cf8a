use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, GridShape};
use crate::rng::SplitMix64;

use super::shape::{rasterize_deformed, Deformation, Harmonics, TrueShape};

/// One annotator: a systematic bias (scale, offset), an ambiguity rate, and
/// the size of their unsystematic drawing error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatorProfile {
    #[serde(default = "one")]
    pub scale_bias: f64,
    /// `[dx, dy]` in pixels.
    #[serde(default)]
    pub offset_bias: [f64; 2],
    /// Probability of leaving the mask empty although the object is present.
    #[serde(default)]
    pub empty_rate: f64,
    /// Boundary jitter relative to the radius; the drawn boundary stays
    /// within `radius · scale_bias · (1 ± noise_sigma)`.
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default = "default_harmonics")]
    pub noise_harmonics: usize,
}

fn one() -> f64 {
    1.0
}

fn default_harmonics() -> usize {
    4
}

impl Default for AnnotatorProfile {
    fn default() -> Self {
        AnnotatorProfile::neutral()
    }
}

impl AnnotatorProfile {
    /// No bias, no ambiguity, no drawing error.
    pub fn neutral() -> Self {
        AnnotatorProfile {
            scale_bias: 1.0,
            offset_bias: [0.0, 0.0],
            empty_rate: 0.0,
            noise_sigma: 0.0,
            noise_harmonics: default_harmonics(),
        }
    }

    pub fn with_noise(mut self, sigma: f64, harmonics: usize) -> Self {
        self.noise_sigma = sigma;
        self.noise_harmonics = harmonics;
        self
    }

    pub fn with_empty_rate(mut self, rate: f64) -> Self {
        self.empty_rate = rate;
        self
    }

    pub fn with_bias(mut self, scale: f64, offset: [f64; 2]) -> Self {
        self.scale_bias = scale;
        self.offset_bias = offset;
        self
    }

    /// Checks the invariants; `path` prefixes field names in errors.
    pub fn validate(&self, path: &str) -> Result<()> {
        let field = |name: &str| format!("{path}.{name}");
        if !(self.scale_bias.is_finite() && self.scale_bias > 0.0) {
            return Err(Error::invalid(
                field("scale_bias"),
                format!("must be positive, got {}", self.scale_bias),
            ));
        }
        if !self.offset_bias.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid(field("offset_bias"), "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.empty_rate) {
            return Err(Error::invalid(
                field("empty_rate"),
                format!("must be in [0, 1], got {}", self.empty_rate),
            ));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::invalid(
                field("noise_sigma"),
                format!("must be non-negative, got {}", self.noise_sigma),
            ));
        }
        if self.noise_sigma > 0.0 && self.noise_harmonics == 0 {
            return Err(Error::invalid(
                field("noise_harmonics"),
                "must be at least 1 when noise_sigma > 0",
            ));
        }
        Ok(())
    }

    /// Largest boundary displacement, in pixels, this annotator can produce
    /// on `shape` relative to the biased boundary.
    pub fn max_jitter(&self, shape: &TrueShape) -> f64 {
        shape.max_radius() * self.scale_bias * self.noise_sigma
    }
}

/// Draws one annotation of `shape`.
///
/// Stream usage is fixed regardless of outcome: one uniform for the emptiness
/// decision, then `noise_harmonics` amplitudes and `noise_harmonics` phases.
pub fn annotate(
    shape: &TrueShape,
    profile: &AnnotatorProfile,
    grid: GridShape,
    rng: &mut SplitMix64,
) -> BinaryMask {
    let drop = rng.bernoulli(profile.empty_rate);
    let k = profile.noise_harmonics;
    let amplitudes: Vec<f64> = (0..k).map(|_| rng.next_f64()).collect();
    let phases: Vec<f64> = (0..k)
        .map(|_| rng.uniform(0.0, std::f64::consts::TAU))
        .collect();
    if !shape.is_present() || drop {
        return BinaryMask::empty(grid);
    }
    let harmonics = Harmonics { amplitudes, phases };
    let deform = Deformation {
        scale: profile.scale_bias,
        offset: profile.offset_bias,
        jitter: (profile.noise_sigma > 0.0).then_some((profile.noise_sigma, &harmonics)),
    };
    rasterize_deformed(shape, grid, &deform)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rasterize;

    fn grid() -> GridShape {
        GridShape::new(32, 32).unwrap()
    }

    #[test]
    fn neutral_annotator_reproduces_truth() {
        let shape = TrueShape::ellipse(15.3, 17.1, 9.0, 5.5).unwrap();
        let mut rng = SplitMix64::substream(3, &[]);
        let m = annotate(&shape, &AnnotatorProfile::neutral(), grid(), &mut rng);
        assert_eq!(m, rasterize(&shape, grid()));
    }

    #[test]
    fn always_empty_when_rate_is_one() {
        let shape = TrueShape::disk(16.0, 16.0, 8.0).unwrap();
        let p = AnnotatorProfile::neutral().with_empty_rate(1.0);
        let mut rng = SplitMix64::substream(3, &[]);
        for _ in 0..20 {
            assert!(annotate(&shape, &p, grid(), &mut rng).is_empty());
        }
    }

    #[test]
    fn same_stream_position_same_mask() {
        let shape = TrueShape::disk(16.0, 16.0, 8.0).unwrap();
        let p = AnnotatorProfile::neutral().with_noise(0.2, 5);
        let a = annotate(&shape, &p, grid(), &mut SplitMix64::substream(11, &[1, 2]));
        let b = annotate(&shape, &p, grid(), &mut SplitMix64::substream(11, &[1, 2]));
        assert_eq!(a, b);
        let c = annotate(&shape, &p, grid(), &mut SplitMix64::substream(11, &[1, 3]));
        assert_ne!(a, c);
    }

    #[test]
    fn jitter_stays_inside_the_band() {
        let shape = TrueShape::disk(16.0, 16.0, 10.0).unwrap();
        let p = AnnotatorProfile::neutral().with_noise(0.15, 3);
        let mut rng = SplitMix64::substream(5, &[]);
        for _ in 0..50 {
            let m = annotate(&shape, &p, grid(), &mut rng);
            for r in 0..32 {
                for c in 0..32 {
                    let rho = shape.radial_coordinate(c as f64 + 0.5, r as f64 + 0.5);
                    if rho <= 0.85 {
                        assert!(m.get(r, c));
                    }
                    if rho > 1.15 {
                        assert!(!m.get(r, c));
                    }
                }
            }
        }
    }

    #[test]
    fn scale_and_offset_bias() {
        let shape = TrueShape::disk(16.0, 16.0, 5.0).unwrap();
        let p = AnnotatorProfile::neutral().with_bias(2.0, [3.0, -2.0]);
        let m = annotate(&shape, &p, grid(), &mut SplitMix64::substream(0, &[]));
        assert_eq!(
            m,
            rasterize(&TrueShape::disk(19.0, 14.0, 10.0).unwrap(), grid())
        );
    }

    #[test]
    fn absent_shape_is_empty_regardless() {
        let p = AnnotatorProfile::neutral().with_noise(0.3, 2);
        let m = annotate(
            &TrueShape::absent(),
            &p,
            grid(),
            &mut SplitMix64::substream(0, &[]),
        );
        assert!(m.is_empty());
    }

    #[test]
    fn validation_names_the_field() {
        let p = AnnotatorProfile::neutral().with_empty_rate(1.5);
        let err = p.validate("annotators[2]").unwrap_err().to_string();
        assert!(err.contains("annotators[2].empty_rate"), "{err}");
        let p = AnnotatorProfile::neutral().with_noise(0.1, 0);
        assert!(p.validate("x").is_err());
        let p = AnnotatorProfile::neutral().with_bias(0.0, [0.0, 0.0]);
        assert!(p.validate("x").is_err());
    }
}
