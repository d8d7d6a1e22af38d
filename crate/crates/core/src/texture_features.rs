//! Fuzzy texture spectrum and NGTDM busyness over the lesion region.

use crate::dataset::{BinaryMask, RgbImage};
use crate::error::{Error, Result};

/// 8-bit luma grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayGrid {
    width: usize,
    height: usize,
    values: Vec<u8>,
}

impl GrayGrid {
    pub fn new(width: usize, height: usize, values: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} gray values for a {width}×{height} grid",
                values.len()
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.values[y * self.width + x]
    }

    /// Quarter turn clockwise, matching [`RgbImage::rotate90`].
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.height, self.width);
        let mut values = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                values.push(self.get(y, self.height - 1 - x));
            }
        }
        Self {
            width: w,
            height: h,
            values,
        }
    }
}

/// Rec. 601 luma rounded to the nearest integer.
pub fn gray(img: &RgbImage) -> GrayGrid {
    let values = img
        .pixels()
        .iter()
        .map(|&[r, g, b]| ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8)
        .collect();
    GrayGrid {
        width: img.width(),
        height: img.height(),
        values,
    }
}

pub const FTS_BINS: usize = 64;
pub const FTU_MAX: f64 = 6560.0;
pub const DEFAULT_DELTA: f64 = 10.0;
pub const DEFAULT_NGTDM_LEVELS: usize = 32;

// Clockwise from top-left.
const RING: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

const POW3: [f64; 8] = [1.0, 3.0, 9.0, 27.0, 81.0, 243.0, 729.0, 2187.0];

#[derive(Clone, Debug, PartialEq)]
pub struct FuzzySpectrum {
    /// Normalized FTU histogram; all zeros when no pixel contributed.
    pub histogram: [f64; FTS_BINS],
    /// Number of lesion pixels with a fully masked 3×3 neighborhood.
    pub contributing: usize,
    pub mean: f64,
    pub variance: f64,
    pub energy: f64,
    pub entropy: f64,
}

impl FuzzySpectrum {
    pub fn is_empty(&self) -> bool {
        self.contributing == 0
    }
}

fn check_dims(gray: &GrayGrid, mask: &BinaryMask) -> Result<()> {
    if !mask.same_dims(gray.width, gray.height) {
        return Err(Error::DimensionMismatch(format!(
            "mask {}×{} vs image {}×{}",
            mask.width(),
            mask.height(),
            gray.width,
            gray.height
        )));
    }
    if mask.lesion_count() == 0 {
        return Err(Error::NoLesion);
    }
    Ok(())
}

/// Fuzzy texture unit of one pixel, scaled by 2δ.
///
/// Each neighbor contributes `clamp(2δ + V_i − V_0, 0, 4δ)`, i.e. its fuzzy
/// ternary code times 2δ. The unit is the smallest of the four codings
/// obtained by starting the ring at each corner, which makes it independent
/// of quarter-turn rotations of the image.
fn scaled_unit(ring: &[f64; 8], center: f64, delta: f64) -> f64 {
    let codes: [f64; 8] = std::array::from_fn(|i| (2.0 * delta + ring[i] - center).clamp(0.0, 4.0 * delta));
    (0..4)
        .map(|shift| {
            (0..8)
                .map(|i| codes[(i + 2 * shift) % 8] * POW3[i])
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn fuzzy_texture_spectrum(gray: &GrayGrid, mask: &BinaryMask, delta: f64) -> Result<FuzzySpectrum> {
    check_dims(gray, mask)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    let (w, h) = (gray.width as i64, gray.height as i64);
    let mut counts = [0u64; FTS_BINS];
    let mut units = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            if !mask.get(x as usize, y as usize) {
                continue;
            }
            if RING
                .iter()
                .any(|&(dx, dy)| !mask.get((x + dx) as usize, (y + dy) as usize))
            {
                continue;
            }
            let ring: [f64; 8] = std::array::from_fn(|i| {
                let (dx, dy) = RING[i];
                gray.get((x + dx) as usize, (y + dy) as usize) as f64
            });
            let center = gray.get(x as usize, y as usize) as f64;
            let ftu = scaled_unit(&ring, center, delta) / (2.0 * delta);
            let bin = ((ftu / FTU_MAX * FTS_BINS as f64) as usize).min(FTS_BINS - 1);
            counts[bin] += 1;
            units.push(ftu);
        }
    }
    let n = units.len();
    let mut out = FuzzySpectrum {
        histogram: [0.0; FTS_BINS],
        contributing: n,
        mean: 0.0,
        variance: 0.0,
        energy: 0.0,
        entropy: 0.0,
    };
    if n == 0 {
        return Ok(out);
    }
    // sort so the moments do not depend on scan order
    units.sort_by(f64::total_cmp);
    let norm: Vec<f64> = units.iter().map(|u| u / FTU_MAX).collect();
    out.mean = norm.iter().sum::<f64>() / n as f64;
    out.variance = norm.iter().map(|v| (v - out.mean).powi(2)).sum::<f64>() / n as f64;
    for (h, &c) in out.histogram.iter_mut().zip(&counts) {
        *h = c as f64 / n as f64;
    }
    out.energy = out.histogram.iter().map(|h| h * h).sum();
    out.entropy = out
        .histogram
        .iter()
        .filter(|&&h| h > 0.0)
        .fold(0.0, |acc, h| acc - h * h.ln());
    Ok(out)
}

/// Uniform quantization of [0, 255] into `levels` bins.
pub fn quantize(v: u8, levels: usize) -> usize {
    v as usize * levels / 256
}

/// NGTDM busyness of the lesion region.
///
/// A lesion pixel takes part in the neighborhood sums when at least one of
/// its 8 neighbors is also lesion; `Ā` averages those lesion neighbors.
pub fn busyness(gray: &GrayGrid, mask: &BinaryMask, levels: usize) -> Result<f64> {
    check_dims(gray, mask)?;
    if !(2..=256).contains(&levels) {
        return Err(Error::InvalidInput(format!(
            "quantization levels must be in 2..=256, got {levels}"
        )));
    }
    let (w, h) = (gray.width as i64, gray.height as i64);
    let q = |x: i64, y: i64| quantize(gray.get(x as usize, y as usize), levels) as i64;
    let mut hist = vec![0u64; levels];
    // acc[i][c-1] = Σ |c·i − Σ neighbors| over pixels at level i with c lesion neighbors
    let mut acc = vec![[0u64; 8]; levels];
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x as usize, y as usize) {
                continue;
            }
            let level = q(x, y);
            hist[level as usize] += 1;
            let (mut sum, mut count) = (0i64, 0i64);
            for &(dx, dy) in &RING {
                if mask.get_signed(x + dx, y + dy) {
                    sum += q(x + dx, y + dy);
                    count += 1;
                }
            }
            if count > 0 {
                acc[level as usize][count as usize - 1] += (count * level - sum).unsigned_abs();
            }
        }
    }
    let total = mask.lesion_count() as f64;
    let p: Vec<f64> = hist.iter().map(|&c| c as f64 / total).collect();
    let s: Vec<f64> = acc
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(c, &v)| v as f64 / (c + 1) as f64)
                .sum()
        })
        .collect();
    let present: Vec<usize> = (0..levels).filter(|&i| hist[i] > 0).collect();
    let numerator: f64 = present.iter().map(|&i| p[i] * s[i]).sum();
    let mut denominator = 0.0;
    for &i in &present {
        for &j in &present {
            denominator += (i as f64 * p[i] - j as f64 * p[j]).abs();
        }
    }
    Ok(if denominator > 0.0 {
        numerator / denominator
    } else {
        0.0
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TextureFeatures {
    pub fts_mean: f64,
    pub fts_variance: f64,
    pub fts_energy: f64,
    pub fts_entropy: f64,
    pub busyness: f64,
}

impl TextureFeatures {
    pub const NAMES: [&'static str; 5] = [
        "fts_mean",
        "fts_variance",
        "fts_energy",
        "fts_entropy",
        "busyness",
    ];

    pub fn values(&self) -> [f64; 5] {
        [
            self.fts_mean,
            self.fts_variance,
            self.fts_energy,
            self.fts_entropy,
            self.busyness,
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TextureParams {
    pub delta: f64,
    pub levels: usize,
}

impl Default for TextureParams {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            levels: DEFAULT_NGTDM_LEVELS,
        }
    }
}

pub fn compute_texture_features(
    gray: &GrayGrid,
    mask: &BinaryMask,
    params: &TextureParams,
) -> Result<TextureFeatures> {
    let fts = fuzzy_texture_spectrum(gray, mask, params.delta)?;
    Ok(TextureFeatures {
        fts_mean: fts.mean,
        fts_variance: fts.variance,
        fts_energy: fts.energy,
        fts_entropy: fts.entropy,
        busyness: busyness(gray, mask, params.levels)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> GrayGrid {
        let values = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        GrayGrid::new(w, h, values).unwrap()
    }

    fn full(w: usize, h: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, _| true).unwrap()
    }

    #[test]
    fn luma_examples() {
        let img = RgbImage::new(
            4,
            1,
            vec![[255, 255, 255], [0, 0, 0], [255, 0, 0], [0, 255, 0]],
        )
        .unwrap();
        assert_eq!(gray(&img).values(), &[255, 0, 76, 150]);
    }

    #[test]
    fn constant_region_spectrum() {
        let g = grid(6, 6, |_, _| 120);
        let s = fuzzy_texture_spectrum(&g, &full(6, 6), 10.0).unwrap();
        assert_eq!(s.contributing, 16);
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.energy, 1.0);
        assert_eq!(s.entropy, 0.0);
        assert_eq!(s.histogram[32], 1.0);
    }

    #[test]
    fn neighbors_far_above_center_give_the_top_unit() {
        let g = grid(3, 3, |x, y| if (x, y) == (1, 1) { 0 } else { 50 });
        let s = fuzzy_texture_spectrum(&g, &full(3, 3), 10.0).unwrap();
        assert_eq!(s.contributing, 1);
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.histogram[63], 1.0);
    }

    #[test]
    fn no_interior_pixel_flags_an_empty_spectrum() {
        let g = grid(5, 5, |x, _| x as u8);
        let line = BinaryMask::from_fn(5, 5, |_, y| y == 2).unwrap();
        let s = fuzzy_texture_spectrum(&g, &line, 10.0).unwrap();
        assert!(s.is_empty());
        assert_eq!((s.mean, s.energy, s.entropy), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_region_has_zero_busyness() {
        let g = grid(8, 8, |_, _| 77);
        assert_eq!(busyness(&g, &full(8, 8), 32).unwrap(), 0.0);
    }

    #[test]
    fn quantization_bins() {
        assert_eq!(quantize(0, 32), 0);
        assert_eq!(quantize(7, 32), 0);
        assert_eq!(quantize(8, 32), 1);
        assert_eq!(quantize(255, 32), 31);
    }

    #[test]
    fn empty_mask_and_bad_parameters_are_rejected() {
        let g = grid(4, 4, |_, _| 0);
        let empty = BinaryMask::empty(4, 4).unwrap();
        assert!(matches!(busyness(&g, &empty, 32), Err(Error::NoLesion)));
        assert!(matches!(fuzzy_texture_spectrum(&g, &empty, 10.0), Err(Error::NoLesion)));
        assert!(busyness(&g, &full(4, 4), 1).is_err());
        assert!(fuzzy_texture_spectrum(&g, &full(4, 4), 0.0).is_err());
        assert!(busyness(&g, &full(5, 4), 32).is_err());
    }
}
