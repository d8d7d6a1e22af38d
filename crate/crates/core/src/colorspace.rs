//! sRGB (8-bit) to CIE L*a*b* under the D65 white point.

use crate::dataset::RgbImage;

/// One CIE L*a*b* color.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

/// Float L*a*b* image with the dimensions of its source.
#[derive(Clone, Debug, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    pixels: Vec<Lab>,
}

impl LabImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Lab>) -> crate::Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(crate::Error::DimensionMismatch(format!(
                "{} Lab pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    #[cfg(test)]
    pub(crate) fn from_ab(width: usize, height: usize, ab: &[(f64, f64)]) -> Self {
        let pixels = ab.iter().map(|&(a, b)| Lab { l: 50.0, a, b }).collect();
        Self::new(width, height, pixels).unwrap()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Lab] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Lab {
        self.pixels[y * self.width + x]
    }

    /// Applies `f` to every pixel; used for illumination experiments.
    pub fn map(&self, f: impl Fn(Lab) -> Lab) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }
}

// Linear sRGB -> XYZ (D65).
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

// Reference white: the image of sRGB white under RGB_TO_XYZ, which is
// (0.95047, 1.0000001, 1.08883). Normalizing by the matrix row sums keeps the
// gray axis at a* = b* = 0 to rounding error.
fn white() -> [f64; 3] {
    let row = |r: [f64; 3]| r[0] + r[1] + r[2];
    [row(RGB_TO_XYZ[0]), row(RGB_TO_XYZ[1]), row(RGB_TO_XYZ[2])]
}

/// sRGB companding inverse: 8-bit code value to linear intensity in [0, 1].
pub fn srgb_to_linear(v: u8) -> f64 {
    let c = v as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

const EPSILON: f64 = 216.0 / 24389.0; // (6/29)^3

fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        // (1/3)(29/6)^2 t + 4/29
        t * (841.0 / 108.0) + 4.0 / 29.0
    }
}

struct Converter {
    linear: [f64; 256],
    white: [f64; 3],
}

impl Converter {
    fn new() -> Self {
        let mut linear = [0.0; 256];
        for (v, slot) in linear.iter_mut().enumerate() {
            *slot = srgb_to_linear(v as u8);
        }
        Self {
            linear,
            white: white(),
        }
    }

    fn convert(&self, [r, g, b]: [u8; 3]) -> Lab {
        let rgb = [
            self.linear[r as usize],
            self.linear[g as usize],
            self.linear[b as usize],
        ];
        let mut f = [0.0; 3];
        for (k, row) in RGB_TO_XYZ.iter().enumerate() {
            let xyz = row[0] * rgb[0] + row[1] * rgb[1] + row[2] * rgb[2];
            f[k] = lab_f(xyz / self.white[k]);
        }
        Lab {
            l: 116.0 * f[1] - 16.0,
            a: 500.0 * (f[0] - f[1]),
            b: 200.0 * (f[1] - f[2]),
        }
    }
}

/// Converts a single sRGB color.
pub fn rgb_to_lab(rgb: [u8; 3]) -> Lab {
    Converter::new().convert(rgb)
}

/// Converts every pixel of `img` to L*a*b*.
pub fn srgb_to_lab(img: &RgbImage) -> LabImage {
    let conv = Converter::new();
    LabImage {
        width: img.width(),
        height: img.height(),
        pixels: img.pixels().iter().map(|&p| conv.convert(p)).collect(),
    }
}
