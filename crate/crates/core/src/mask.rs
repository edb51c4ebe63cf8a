//! Binary masks, sample sets, and the two pairwise distances the energy
//! distance estimators are built on.
//!
//! Masks are strictly binary with `true` meaning foreground. Pixels are
//! stored row-major and packed 64 to a word so overlaps reduce to popcounts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Height and width of a pixel grid. Both are at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGridShape", into = "RawGridShape")]
pub struct GridShape {
    height: usize,
    width: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGridShape {
    height: usize,
    width: usize,
}

impl TryFrom<RawGridShape> for GridShape {
    type Error = Error;

    fn try_from(raw: RawGridShape) -> Result<Self> {
        GridShape::new(raw.height, raw.width)
    }
}

impl From<GridShape> for RawGridShape {
    fn from(shape: GridShape) -> Self {
        RawGridShape {
            height: shape.height,
            width: shape.width,
        }
    }
}

impl GridShape {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidShape { height, width });
        }
        Ok(GridShape { height, width })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    fn word_count(&self) -> usize {
        self.pixel_count().div_ceil(WORD_BITS)
    }

    pub(crate) fn ensure_same(&self, other: &GridShape) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.height, self.width)
    }
}

/// A binary segmentation: one annotation or one sampled prediction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    shape: GridShape,
    words: Vec<u64>,
    foreground: usize,
}

impl BinaryMask {
    /// All-background mask.
    pub fn empty(shape: GridShape) -> Self {
        BinaryMask {
            shape,
            words: vec![0; shape.word_count()],
            foreground: 0,
        }
    }

    /// All-foreground mask.
    pub fn full(shape: GridShape) -> Self {
        let mut mask = BinaryMask::empty(shape);
        for index in 0..shape.pixel_count() {
            mask.set_index(index, true);
        }
        mask
    }

    /// Builds a mask from row-major booleans.
    pub fn from_bools(shape: GridShape, bits: &[bool]) -> Result<Self> {
        if bits.len() != shape.pixel_count() {
            return Err(Error::PixelCount {
                expected: shape.pixel_count(),
                found: bits.len(),
            });
        }
        Ok(Self::from_fn(shape, |row, col| {
            bits[row * shape.width + col]
        }))
    }

    /// Builds a mask by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(shape: GridShape, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = BinaryMask::empty(shape);
        for row in 0..shape.height {
            for col in 0..shape.width {
                if f(row, col) {
                    mask.set_index(row * shape.width + col, true);
                }
            }
        }
        mask
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.shape.height && col < self.shape.width);
        self.get_index(row * self.shape.width + col)
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.shape.height && col < self.shape.width);
        self.set_index(row * self.shape.width + col, value);
    }

    /// Row-major pixel access.
    pub fn get_index(&self, index: usize) -> bool {
        self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    pub fn set_index(&mut self, index: usize, value: bool) {
        assert!(index < self.shape.pixel_count());
        let word = &mut self.words[index / WORD_BITS];
        let bit = 1u64 << (index % WORD_BITS);
        let was = *word & bit != 0;
        if value && !was {
            *word |= bit;
            self.foreground += 1;
        } else if !value && was {
            *word &= !bit;
            self.foreground -= 1;
        }
    }

    /// Row-major pixel values.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.shape.pixel_count()).map(move |i| self.get_index(i))
    }

    pub fn foreground_count(&self) -> usize {
        self.foreground
    }

    pub fn is_empty(&self) -> bool {
        self.foreground == 0
    }

    /// Shared foreground pixels. Shapes must already agree.
    fn intersection_count(&self, other: &BinaryMask) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "BinaryMask {} ({} foreground)",
            self.shape, self.foreground
        )?;
        if self.shape.pixel_count() <= 256 {
            for row in 0..self.shape.height {
                let line: String = (0..self.shape.width)
                    .map(|col| if self.get(row, col) { '#' } else { '.' })
                    .collect();
                writeln!(f, "  {line}")?;
            }
        }
        Ok(())
    }
}

/// Intersection over union of two same-shape masks.
///
/// Returns `Ok(None)` when both masks are empty: the ratio is 0/0 and the
/// caller decides what that means.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<Option<f64>> {
    a.shape.ensure_same(&b.shape)?;
    Ok(iou_unchecked(a, b))
}

fn iou_unchecked(a: &BinaryMask, b: &BinaryMask) -> Option<f64> {
    let inter = a.intersection_count(b);
    let union = a.foreground + b.foreground - inter;
    if union == 0 {
        None
    } else {
        Some(inter as f64 / union as f64)
    }
}

/// Jaccard distance `1 - IoU`, defined as 0 for two empty masks.
pub fn iou_distance(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.shape.ensure_same(&b.shape)?;
    Ok(iou_distance_unchecked(a, b))
}

pub(crate) fn iou_distance_unchecked(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let inter = a.intersection_count(b);
    let union = a.foreground + b.foreground - inter;
    if union == 0 {
        0.0
    } else {
        // (union - inter) / union is exact in the integers before the one
        // rounding, and symmetric in (a, b).
        (union - inter) as f64 / union as f64
    }
}

/// Emptiness disagreement: 1 when exactly one of the masks is empty, else 0.
pub fn detection_distance(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.shape.ensure_same(&b.shape)?;
    Ok(detection_distance_unchecked(a, b))
}

pub(crate) fn detection_distance_unchecked(a: &BinaryMask, b: &BinaryMask) -> f64 {
    if a.is_empty() != b.is_empty() {
        1.0
    } else {
        0.0
    }
}

/// The pairwise distance plugged into the energy distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    /// `1 - IoU` with the empty/empty pair at distance 0.
    Iou,
    /// Emptiness XOR.
    Detection,
}

impl Distance {
    pub fn eval(self, a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
        a.shape.ensure_same(&b.shape)?;
        Ok(self.eval_unchecked(a, b))
    }

    pub(crate) fn eval_unchecked(self, a: &BinaryMask, b: &BinaryMask) -> f64 {
        match self {
            Distance::Iou => iou_distance_unchecked(a, b),
            Distance::Detection => detection_distance_unchecked(a, b),
        }
    }
}

/// A non-empty ordered list of same-shape masks, the empirical stand-in for
/// an annotation or prediction distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    shape: GridShape,
    masks: Vec<BinaryMask>,
}

impl SampleSet {
    pub fn new(masks: Vec<BinaryMask>) -> Result<Self> {
        let first = masks.first().ok_or(Error::EmptySampleSet)?;
        let shape = first.shape;
        for mask in &masks[1..] {
            shape.ensure_same(&mask.shape)?;
        }
        Ok(SampleSet { shape, masks })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn masks(&self) -> &[BinaryMask] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BinaryMask> {
        self.masks.iter()
    }

    pub fn into_masks(self) -> Vec<BinaryMask> {
        self.masks
    }

    pub fn empty_count(&self) -> usize {
        self.masks.iter().filter(|m| m.is_empty()).count()
    }

    /// Fraction of members with no foreground.
    pub fn empty_fraction(&self) -> f64 {
        self.empty_count() as f64 / self.len() as f64
    }

    /// The non-empty members in their original order, or `None` when every
    /// member is empty.
    pub fn filter_nonempty(&self) -> Option<SampleSet> {
        let kept: Vec<BinaryMask> = self
            .masks
            .iter()
            .filter(|m| !m.is_empty())
            .cloned()
            .collect();
        if kept.is_empty() {
            None
        } else {
            Some(SampleSet {
                shape: self.shape,
                masks: kept,
            })
        }
    }
}

impl<'a> IntoIterator for &'a SampleSet {
    type Item = &'a BinaryMask;
    type IntoIter = std::slice::Iter<'a, BinaryMask>;

    fn into_iter(self) -> Self::IntoIter {
        self.masks.iter()
    }
}
