//! PNG heatmaps with a fixed colormap.

use std::path::Path;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::bie::{ScatteringGrid, TruncationSpec};
use crate::error::Result;

/// Anchors of the colormap, low to high.
const STOPS: [[f64; 3]; 5] = [
    [0.050, 0.030, 0.330],
    [0.230, 0.320, 0.550],
    [0.130, 0.570, 0.550],
    [0.500, 0.780, 0.250],
    [0.990, 0.910, 0.150],
];

pub fn colormap(u: f64) -> Rgb<u8> {
    let u = if u.is_finite() { u.clamp(0.0, 1.0) } else { return Rgb([255, 255, 255]) };
    let x = u * (STOPS.len() - 1) as f64;
    let k = (x.floor() as usize).min(STOPS.len() - 2);
    let w = x - k as f64;
    let c = |i: usize| ((STOPS[k][i] * (1.0 - w) + STOPS[k + 1][i] * w) * 255.0).round() as u8;
    Rgb([c(0), c(1), c(2)])
}

/// Value range of a heatmap, recorded in manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn of(values: &[f64]) -> Range {
        let finite = values.iter().copied().filter(|v| v.is_finite());
        let min = finite.clone().fold(f64::INFINITY, f64::min);
        let max = finite.fold(f64::NEG_INFINITY, f64::max);
        if min > max {
            Range { min: 0.0, max: 0.0 }
        } else {
            Range { min, max }
        }
    }

    fn unit(&self, v: f64) -> f64 {
        if self.max > self.min {
            (v - self.min) / (self.max - self.min)
        } else {
            0.5
        }
    }
}

/// Draws an n × n row-major field (row k is y = k) with y increasing upward.
/// Non-finite entries are white.
pub fn heatmap(n: usize, values: &[f64], range: Range) -> RgbImage {
    RgbImage::from_fn(n as u32, n as u32, |x, y| {
        let v = values[(n - 1 - y as usize) * n + x as usize];
        if v.is_finite() {
            colormap(range.unit(v))
        } else {
            Rgb([255, 255, 255])
        }
    })
}

pub fn write_heatmap<P: AsRef<Path>>(path: P, n: usize, values: &[f64]) -> Result<Range> {
    let range = Range::of(values);
    heatmap(n, values, range).save(path)?;
    Ok(range)
}

/// Re t and Im t side by side; masked nodes white, the ellipse and the circle
/// |λ| = R1 in black.
pub fn scattering_png<P: AsRef<Path>>(path: P, t: &ScatteringGrid, spec: Option<&TruncationSpec>) -> Result<(Range, Range)> {
    let n = t.grid.n();
    let pick = |f: fn(&crate::C64) -> f64| -> Vec<f64> {
        t.values.iter().zip(&t.mask).map(|(v, m)| if *m { f(v) } else { f64::NAN }).collect()
    };
    let re = pick(|v| v.re);
    let im = pick(|v| v.im);
    let (rr, ri) = (Range::of(&re), Range::of(&im));
    let gap = 4;
    let mut img = RgbImage::from_pixel((2 * n + gap) as u32, n as u32, Rgb([255, 255, 255]));
    for (offset, field, range) in [(0, &re, rr), (n + gap, &im, ri)] {
        let h = heatmap(n, field, range);
        for (x, y, p) in h.enumerate_pixels() {
            img.put_pixel(x + offset as u32, y, *p);
        }
        if let Some(spec) = spec {
            let steps = 8 * n;
            for s in 0..steps {
                let th = std::f64::consts::TAU * s as f64 / steps as f64;
                for r in [spec.radius(th), spec.r1] {
                    let l = crate::C64::from_polar(r, th);
                    let px = (l.re + t.grid.half_width) / t.grid.spacing();
                    let py = (l.im + t.grid.half_width) / t.grid.spacing();
                    if px >= 0.0 && py >= 0.0 && (px as usize) < n && (py as usize) < n {
                        img.put_pixel((px as usize + offset) as u32, (n - 1 - py as usize) as u32, Rgb([0, 0, 0]));
                    }
                }
            }
        }
    }
    img.save(path)?;
    Ok((rr, ri))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;

    #[test]
    fn colormap_ends_and_nan() {
        assert_eq!(colormap(0.0), Rgb([13, 8, 84]));
        assert_eq!(colormap(1.0), Rgb([252, 232, 38]));
        assert_eq!(colormap(f64::NAN), Rgb([255, 255, 255]));
        assert_eq!(colormap(7.0), colormap(1.0));
    }

    #[test]
    fn range_skips_nan() {
        let r = Range::of(&[1.0, f64::NAN, -2.0]);
        assert_eq!((r.min, r.max), (-2.0, 1.0));
        assert_eq!(Range::of(&[f64::NAN]).max, 0.0);
    }

    #[test]
    fn pngs_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let grid = PeriodicGrid::new(4, 3.0).unwrap();
        let mut t = ScatteringGrid::zeros(grid);
        t.mask[5] = true;
        t.values[5] = crate::C64::new(1.0, -1.0);
        let (re, im) = scattering_png(dir.path().join("t.png"), &t, Some(&TruncationSpec::circular(2.0).unwrap())).unwrap();
        assert_eq!((re.min, re.max, im.min), (1.0, 1.0, -1.0));
        let img = image::open(dir.path().join("t.png")).unwrap();
        assert_eq!((img.width(), img.height()), (36, 16));
        let r = write_heatmap(dir.path().join("h.png"), 2, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.max, 3.0);
    }
}
