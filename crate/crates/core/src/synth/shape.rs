use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, GridShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Disk,
    Ellipse,
    Absent,
}

/// The true underlying segmentation of one image.
///
/// Coordinates are in pixels with `x` along columns and `y` along rows; the
/// center of pixel `(row, col)` is `(col + 0.5, row + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueShape {
    pub kind: ShapeKind,
    /// `[x, y]`
    pub center: [f64; 2],
    /// `[rx, ry]`; equal for disks, unused when absent.
    pub radii: [f64; 2],
}

impl TrueShape {
    pub fn disk(cx: f64, cy: f64, radius: f64) -> Result<Self> {
        check_radius("radius", radius)?;
        Ok(TrueShape {
            kind: ShapeKind::Disk,
            center: [cx, cy],
            radii: [radius, radius],
        })
    }

    pub fn ellipse(cx: f64, cy: f64, rx: f64, ry: f64) -> Result<Self> {
        check_radius("rx", rx)?;
        check_radius("ry", ry)?;
        Ok(TrueShape {
            kind: ShapeKind::Ellipse,
            center: [cx, cy],
            radii: [rx, ry],
        })
    }

    pub fn absent() -> Self {
        TrueShape {
            kind: ShapeKind::Absent,
            center: [0.0, 0.0],
            radii: [0.0, 0.0],
        }
    }

    pub fn is_present(&self) -> bool {
        self.kind != ShapeKind::Absent
    }

    /// Largest semi-axis.
    pub fn max_radius(&self) -> f64 {
        self.radii[0].max(self.radii[1])
    }

    /// Normalized radial coordinate of a point: 1 on the boundary, below 1
    /// inside. Equals `ρ / R(θ)` along the ray from the center.
    pub fn radial_coordinate(&self, x: f64, y: f64) -> f64 {
        let dx = (x - self.center[0]) / self.radii[0];
        let dy = (y - self.center[1]) / self.radii[1];
        (dx * dx + dy * dy).sqrt()
    }
}

fn check_radius(field: &str, r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive, got {r}")))
    }
}

/// Random smooth boundary deformation
/// `η(θ) = Σ_k (a_k / K) · sin(k θ + φ_k)` for `k = 1..=K`, with `a_k` in
/// `[0, 1)`. Zero-mean over θ and bounded by 1 in magnitude.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Harmonics {
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

impl Harmonics {
    pub fn eval(&self, theta: f64) -> f64 {
        let k_total = self.amplitudes.len() as f64;
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(i, (a, phi))| a / k_total * ((i + 1) as f64 * theta + phi).sin())
            .sum()
    }
}

/// How a shape is transformed before rasterization.
#[derive(Debug, Clone, Default)]
pub(crate) struct Deformation<'a> {
    pub scale: f64,
    pub offset: [f64; 2],
    /// `(sigma, η)`; the boundary radius is multiplied by `1 + sigma · η(θ)`.
    pub jitter: Option<(f64, &'a Harmonics)>,
}

impl Deformation<'_> {
    pub fn identity() -> Self {
        Deformation {
            scale: 1.0,
            offset: [0.0, 0.0],
            jitter: None,
        }
    }
}

/// Realizes a shape on the grid: a pixel is foreground iff its center lies
/// inside the boundary. Absent shapes give the empty mask.
pub fn rasterize(shape: &TrueShape, grid: GridShape) -> BinaryMask {
    rasterize_deformed(shape, grid, &Deformation::identity())
}

pub(crate) fn rasterize_deformed(
    shape: &TrueShape,
    grid: GridShape,
    deform: &Deformation<'_>,
) -> BinaryMask {
    let mut mask = BinaryMask::empty(grid);
    if !shape.is_present() || deform.scale <= 0.0 {
        return mask;
    }
    let cx = shape.center[0] + deform.offset[0];
    let cy = shape.center[1] + deform.offset[1];
    let [rx, ry] = shape.radii;
    let reach = deform.scale * (1.0 + deform.jitter.map_or(0.0, |(sigma, _)| sigma));

    // Pixel centers inside [c - r·reach, c + r·reach] along each axis.
    let span = |c: f64, r: f64, len: usize| -> Option<(usize, usize)> {
        let lo = (c - r * reach - 0.5).ceil().max(0.0);
        let hi = (c + r * reach - 0.5).floor().min(len as f64 - 1.0);
        (lo <= hi).then_some((lo as usize, hi as usize))
    };
    let (Some((c0, c1)), Some((r0, r1))) =
        (span(cx, rx, grid.width()), span(cy, ry, grid.height()))
    else {
        return mask;
    };

    for row in r0..=r1 {
        let dy = row as f64 + 0.5 - cy;
        for col in c0..=c1 {
            let dx = col as f64 + 0.5 - cx;
            let q = (dx / rx) * (dx / rx) + (dy / ry) * (dy / ry);
            let factor = match deform.jitter {
                None => deform.scale,
                Some((sigma, eta)) => deform.scale * (1.0 + sigma * eta.eval(dy.atan2(dx))),
            };
            if factor > 0.0 && q <= factor * factor {
                mask.set(row, col, true);
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(h: usize, w: usize) -> GridShape {
        GridShape::new(h, w).unwrap()
    }

    /// Independent inside test over every pixel of the grid.
    fn brute_force(shape: &TrueShape, g: GridShape) -> BinaryMask {
        BinaryMask::from_fn(g, |r, c| {
            shape.is_present() && shape.radial_coordinate(c as f64 + 0.5, r as f64 + 0.5) <= 1.0
        })
    }

    #[test]
    fn absent_is_empty() {
        assert!(rasterize(&TrueShape::absent(), grid(8, 8)).is_empty());
    }

    #[test]
    fn tiny_disk_on_pixel_center() {
        let g = grid(5, 5);
        let m = rasterize(&TrueShape::disk(2.5, 1.5, 0.4).unwrap(), g);
        assert_eq!(m.foreground_count(), 1);
        assert!(m.get(1, 2));
    }

    #[test]
    fn disk_outside_grid_is_empty() {
        let m = rasterize(&TrueShape::disk(-20.0, 4.0, 3.0).unwrap(), grid(8, 8));
        assert!(m.is_empty());
        let m = rasterize(&TrueShape::disk(4.0, 100.0, 3.0).unwrap(), grid(8, 8));
        assert!(m.is_empty());
    }

    #[test]
    fn matches_brute_force_inside_test() {
        let g = grid(20, 23);
        for shape in [
            TrueShape::disk(10.0, 9.5, 6.2).unwrap(),
            TrueShape::ellipse(3.0, 12.7, 8.5, 3.1).unwrap(),
            TrueShape::disk(22.0, 0.0, 4.0).unwrap(),
        ] {
            let fast = rasterize(&shape, g);
            let slow = brute_force(&shape, g);
            assert_eq!(fast, slow, "{shape:?}");
        }
    }

    #[test]
    fn invalid_radius() {
        assert!(TrueShape::disk(0.0, 0.0, 0.0).is_err());
        assert!(TrueShape::ellipse(0.0, 0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn harmonics_are_bounded() {
        let h = Harmonics {
            amplitudes: vec![0.99, 0.99, 0.99],
            phases: vec![0.0, 1.0, 2.0],
        };
        for i in 0..1000 {
            assert!(h.eval(i as f64 * 0.01).abs() <= 1.0);
        }
    }
}
