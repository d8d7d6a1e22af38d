//! Color statistics and color-index co-occurrence over the lesion region.

use crate::colorspace::LabImage;
use crate::dataset::{BinaryMask, RgbImage};
use crate::error::{Error, Result};

pub const CHANNELS: [&str; 6] = ["r", "g", "b", "l", "a", "b_star"];
pub const SKEW_SIGMA_FLOOR: f64 = 1e-9;

/// Mean, population standard deviation and skewness per channel, in the
/// order R, G, B, L*, a*, b*.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorStats {
    pub mean: [f64; 6],
    pub std: [f64; 6],
    pub skew: [f64; 6],
}

fn skewness(m2: f64, m3: f64) -> (f64, f64) {
    let sigma = m2.max(0.0).sqrt();
    let skew = if sigma < SKEW_SIGMA_FLOOR {
        0.0
    } else {
        m3 / sigma.powi(3)
    };
    (sigma, skew)
}

/// Moments of 8-bit samples from exact integer power sums.
fn integer_moments(values: impl Iterator<Item = u8>) -> (f64, f64, f64) {
    let (mut n, mut s1, mut s2, mut s3) = (0i128, 0i128, 0i128, 0i128);
    for v in values {
        let v = v as i128;
        n += 1;
        s1 += v;
        s2 += v * v;
        s3 += v * v * v;
    }
    let nf = n as f64;
    let mean = s1 as f64 / nf;
    // n²·m2 and n³·m3 as exact integers
    let m2 = (n * s2 - s1 * s1) as f64 / (nf * nf);
    let m3 = (n * n * s3 - 3 * n * s1 * s2 + 2 * s1 * s1 * s1) as f64 / (nf * nf * nf);
    let (sigma, skew) = skewness(m2, m3);
    (mean, sigma, skew)
}

fn float_moments(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    // shifting by the first sample keeps constant channels exactly constant
    let origin = values[0];
    let shift = values.iter().map(|v| v - origin).sum::<f64>() / n;
    let mean = origin + shift;
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in values {
        let d = (v - origin) - shift;
        m2 += d * d;
        m3 += d * d * d;
    }
    let (sigma, skew) = skewness(m2 / n, m3 / n);
    (mean, sigma, skew)
}

fn check_mask(width: usize, height: usize, mask: &BinaryMask) -> Result<()> {
    if !mask.same_dims(width, height) {
        return Err(Error::DimensionMismatch(format!(
            "mask {}×{} vs image {width}×{height}",
            mask.width(),
            mask.height()
        )));
    }
    if mask.lesion_count() == 0 {
        return Err(Error::NoLesion);
    }
    Ok(())
}

pub fn color_stats(img: &RgbImage, lab: &LabImage, mask: &BinaryMask) -> Result<ColorStats> {
    check_mask(img.width(), img.height(), mask)?;
    if lab.width() != img.width() || lab.height() != img.height() {
        return Err(Error::DimensionMismatch("Lab and RGB images differ in size".into()));
    }
    let inside = |i: &usize| mask.labels()[*i];
    let idx: Vec<usize> = (0..mask.labels().len()).filter(inside).collect();
    let mut out = ColorStats {
        mean: [0.0; 6],
        std: [0.0; 6],
        skew: [0.0; 6],
    };
    for c in 0..3 {
        let (m, s, k) = integer_moments(idx.iter().map(|&i| img.pixels()[i][c]));
        (out.mean[c], out.std[c], out.skew[c]) = (m, s, k);
    }
    let lab_px = lab.pixels();
    let channels: [fn(&crate::Lab) -> f64; 3] = [|p| p.l, |p| p.a, |p| p.b];
    for (c, get) in channels.iter().enumerate() {
        let values: Vec<f64> = idx.iter().map(|&i| get(&lab_px[i])).collect();
        let (m, s, k) = float_moments(&values);
        (out.mean[3 + c], out.std[3 + c], out.skew[3 + c]) = (m, s, k);
    }
    Ok(out)
}

/// Pixel displacement `(dx, dy)`; each offset is counted in both directions.
pub type Offset = (i64, i64);

pub const DEFAULT_OFFSETS: [Offset; 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];
pub const DEFAULT_GLCM_LEVELS: usize = 4;
pub const MAX_GLCM_LEVELS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct GlcmParams {
    pub levels: usize,
    pub offsets: Vec<Offset>,
}

impl Default for GlcmParams {
    fn default() -> Self {
        Self {
            levels: DEFAULT_GLCM_LEVELS,
            offsets: DEFAULT_OFFSETS.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlcmFeatures {
    pub contrast: f64,
    pub correlation: f64,
    pub energy: f64,
    pub entropy: f64,
    pub homogeneity: f64,
}

/// Color index `q_R·L² + q_G·L + q_B` with `q = floor(L·v/256)`.
pub fn color_index(rgb: [u8; 3], levels: usize) -> usize {
    let q = |v: u8| v as usize * levels / 256;
    (q(rgb[0]) * levels + q(rgb[1])) * levels + q(rgb[2])
}

/// Symmetric co-occurrence counts of color indices over lesion pixel pairs.
/// Returns the matrix (row-major, `n×n`) and `n`.
pub fn cooccurrence(img: &RgbImage, mask: &BinaryMask, params: &GlcmParams) -> Result<(Vec<u64>, usize)> {
    check_mask(img.width(), img.height(), mask)?;
    if !(2..=MAX_GLCM_LEVELS).contains(&params.levels) {
        return Err(Error::InvalidInput(format!(
            "color levels per channel must be in 2..={MAX_GLCM_LEVELS}, got {}",
            params.levels
        )));
    }
    if params.offsets.is_empty() || params.offsets.contains(&(0, 0)) {
        return Err(Error::InvalidInput("offsets must be non-empty and non-zero".into()));
    }
    let n = params.levels.pow(3);
    let (w, h) = (img.width(), img.height());
    let index: Vec<usize> = img.pixels().iter().map(|&p| color_index(p, params.levels)).collect();
    let mut counts = vec![0u64; n * n];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            if !mask.get(x as usize, y as usize) {
                continue;
            }
            let a = index[y as usize * w + x as usize];
            for &(dx, dy) in &params.offsets {
                if mask.get_signed(x + dx, y + dy) {
                    let b = index[(y + dy) as usize * w + (x + dx) as usize];
                    counts[a * n + b] += 1;
                    counts[b * n + a] += 1;
                }
            }
        }
    }
    Ok((counts, n))
}

pub fn color_glcm(img: &RgbImage, mask: &BinaryMask, params: &GlcmParams) -> Result<GlcmFeatures> {
    let (counts, n) = cooccurrence(img, mask, params)?;
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::NoPairs);
    }
    let total = total as f64;
    let cells = || {
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| ((k / n) as f64, (k % n) as f64, c as f64 / total))
    };
    // the matrix is symmetric, so row and column marginals coincide
    let mu: f64 = cells().map(|(i, _, p)| i * p).sum();
    let var: f64 = cells().map(|(i, _, p)| (i - mu).powi(2) * p).sum();
    let sigma = var.max(0.0).sqrt();
    let mut f = GlcmFeatures {
        contrast: 0.0,
        correlation: 0.0,
        energy: 0.0,
        entropy: 0.0,
        homogeneity: 0.0,
    };
    let mut cov = 0.0;
    for (i, j, p) in cells() {
        f.contrast += (i - j).powi(2) * p;
        cov += (i - mu) * (j - mu) * p;
        f.energy += p * p;
        f.entropy -= p * p.ln();
        f.homogeneity += p / (1.0 + (i - j).abs());
    }
    if sigma >= 1e-12 {
        f.correlation = (cov / (sigma * sigma)).clamp(-1.0, 1.0);
    }
    Ok(f)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColorFeatures {
    pub stats: ColorStats,
    pub glcm: GlcmFeatures,
}

impl ColorFeatures {
    pub fn names() -> Vec<String> {
        let mut names: Vec<String> = CHANNELS
            .iter()
            .flat_map(|c| ["mean", "std", "skew"].map(|s| format!("{c}_{s}")))
            .collect();
        names.extend(
            ["contrast", "correlation", "energy", "entropy", "homogeneity"].map(|s| format!("glcm_{s}")),
        );
        names
    }

    pub fn values(&self) -> [f64; 23] {
        let mut v = [0.0; 23];
        for c in 0..6 {
            v[3 * c] = self.stats.mean[c];
            v[3 * c + 1] = self.stats.std[c];
            v[3 * c + 2] = self.stats.skew[c];
        }
        let g = &self.glcm;
        v[18..].copy_from_slice(&[g.contrast, g.correlation, g.energy, g.entropy, g.homogeneity]);
        v
    }
}

pub fn compute_color_features(
    img: &RgbImage,
    lab: &LabImage,
    mask: &BinaryMask,
    params: &GlcmParams,
) -> Result<ColorFeatures> {
    Ok(ColorFeatures {
        stats: color_stats(img, lab, mask)?,
        glcm: color_glcm(img, mask, params)?,
    })
}
