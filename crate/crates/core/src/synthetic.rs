//! Planted-lesion generators with known ground truth.
//!
//! Used by tests, the acceptance suite and demos. Shapes are rasterized by
//! sampling pixel centers, so the planted mask is exact.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{BinaryMask, Class, RgbImage};

/// Closed planar region in pixel coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Ellipse {
        cx: f64,
        cy: f64,
        semi_x: f64,
        semi_y: f64,
        /// Rotation of the `semi_x` axis, radians.
        angle: f64,
    },
    /// Star-shaped region `r(θ) = r0·(1 + Σ amp·cos(k·θ + phase))`.
    Blob {
        cx: f64,
        cy: f64,
        r0: f64,
        harmonics: Vec<(u32, f64, f64)>,
    },
    /// Disk with a circular bite of radius `notch_r` centered at distance
    /// `notch_d` from the center along direction `angle`.
    NotchedDisk {
        cx: f64,
        cy: f64,
        r: f64,
        notch_r: f64,
        notch_d: f64,
        angle: f64,
    },
}

impl Shape {
    pub fn disk(cx: f64, cy: f64, r: f64) -> Self {
        Shape::Ellipse {
            cx,
            cy,
            semi_x: r,
            semi_y: r,
            angle: 0.0,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Ellipse {
                cx,
                cy,
                semi_x,
                semi_y,
                angle,
            } => {
                let (s, c) = angle.sin_cos();
                let (dx, dy) = (x - cx, y - cy);
                let u = c * dx + s * dy;
                let v = -s * dx + c * dy;
                (u / semi_x).powi(2) + (v / semi_y).powi(2) <= 1.0
            }
            Shape::Blob {
                cx,
                cy,
                r0,
                ref harmonics,
            } => {
                let (dx, dy) = (x - cx, y - cy);
                let theta = dy.atan2(dx);
                let r = r0
                    * (1.0
                        + harmonics
                            .iter()
                            .map(|&(k, amp, phase)| amp * (k as f64 * theta + phase).cos())
                            .sum::<f64>());
                dx * dx + dy * dy <= r * r
            }
            Shape::NotchedDisk {
                cx,
                cy,
                r,
                notch_r,
                notch_d,
                angle,
            } => {
                let (dx, dy) = (x - cx, y - cy);
                let (nx, ny) = (cx + notch_d * angle.cos(), cy + notch_d * angle.sin());
                dx * dx + dy * dy <= r * r
                    && (x - nx).powi(2) + (y - ny).powi(2) > notch_r * notch_r
            }
        }
    }

    /// Same shape rotated by `angle` radians about `(px, py)`.
    pub fn rotated(&self, angle: f64, px: f64, py: f64) -> Self {
        let rot = |x: f64, y: f64| {
            let (s, c) = angle.sin_cos();
            (px + c * (x - px) - s * (y - py), py + s * (x - px) + c * (y - py))
        };
        match self.clone() {
            Shape::Ellipse {
                cx,
                cy,
                semi_x,
                semi_y,
                angle: a,
            } => {
                let (cx, cy) = rot(cx, cy);
                Shape::Ellipse {
                    cx,
                    cy,
                    semi_x,
                    semi_y,
                    angle: a + angle,
                }
            }
            Shape::Blob {
                cx,
                cy,
                r0,
                harmonics,
            } => {
                let (cx, cy) = rot(cx, cy);
                Shape::Blob {
                    cx,
                    cy,
                    r0,
                    harmonics: harmonics
                        .into_iter()
                        .map(|(k, amp, phase)| (k, amp, phase - k as f64 * angle))
                        .collect(),
                }
            }
            Shape::NotchedDisk {
                cx,
                cy,
                r,
                notch_r,
                notch_d,
                angle: a,
            } => {
                let (cx, cy) = rot(cx, cy);
                Shape::NotchedDisk {
                    cx,
                    cy,
                    r,
                    notch_r,
                    notch_d,
                    angle: a + angle,
                }
            }
        }
    }

    pub fn rasterize(&self, width: usize, height: usize) -> BinaryMask {
        BinaryMask::from_fn(width, height, |x, y| self.contains(x as f64, y as f64))
            .expect("non-zero canvas")
    }
}

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Paints `lesion` inside `truth` and `skin` elsewhere, then adds independent
/// Gaussian noise of standard deviation `sigma` to every channel.
pub fn render_two_tone(
    truth: &BinaryMask,
    lesion: [u8; 3],
    skin: [u8; 3],
    sigma: f64,
    rng: &mut impl Rng,
) -> RgbImage {
    let noise = Normal::new(0.0, sigma.max(0.0)).expect("finite sigma");
    RgbImage::from_fn(truth.width(), truth.height(), |x, y| {
        let base = if truth.get(x, y) { lesion } else { skin };
        if sigma > 0.0 {
            base.map(|c| clamp_u8(c as f64 + noise.sample(rng)))
        } else {
            base
        }
    })
    .expect("non-zero canvas")
}

/// Skin tone used for planted lesions.
pub const SKIN: [u8; 3] = [232, 190, 168];
/// Dark violet lesion tone, well separated from [`SKIN`] in (a*, b*).
pub const LESION: [u8; 3] = [80, 60, 110];

/// One planted segmentation case: an image and its exact lesion mask.
#[derive(Clone, Debug)]
pub struct PlantedLesion {
    pub image: RgbImage,
    pub truth: BinaryMask,
    pub shape: Shape,
}

/// Random ellipse or smooth blob covering the image center, sized so the
/// automatic seed disk lies inside the lesion and the border frame outside.
pub fn random_lesion_shape(width: usize, height: usize, rng: &mut impl Rng) -> Shape {
    let m = width.min(height) as f64;
    let cx = (width as f64 - 1.0) / 2.0 + rng.random_range(-0.03..0.03) * m;
    let cy = (height as f64 - 1.0) / 2.0 + rng.random_range(-0.03..0.03) * m;
    if rng.random_bool(0.5) {
        let semi_x = rng.random_range(0.24..0.36) * m;
        let semi_y = rng.random_range(0.22..0.32) * m;
        Shape::Ellipse {
            cx,
            cy,
            semi_x,
            semi_y,
            angle: rng.random_range(0.0..PI),
        }
    } else {
        let harmonics = vec![
            (2, rng.random_range(0.04..0.12), rng.random_range(0.0..2.0 * PI)),
            (3, rng.random_range(0.02..0.07), rng.random_range(0.0..2.0 * PI)),
        ];
        Shape::Blob {
            cx,
            cy,
            r0: rng.random_range(0.25..0.32) * m,
            harmonics,
        }
    }
}

/// Dark lesion on skin, optionally with per-channel Gaussian noise.
pub fn planted_lesion(width: usize, height: usize, seed: u64, sigma: f64) -> PlantedLesion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = random_lesion_shape(width, height, &mut rng);
    let truth = shape.rasterize(width, height);
    let image = render_two_tone(&truth, LESION, SKIN, sigma, &mut rng);
    PlantedLesion {
        image,
        truth,
        shape,
    }
}

/// One labeled image of a synthetic three-class corpus.
#[derive(Clone, Debug)]
pub struct CorpusItem {
    pub image_id: String,
    pub class: Class,
    pub image: RgbImage,
    pub truth: BinaryMask,
}

/// Class-dependent lesion appearance: base tone, texture amplitude and
/// texture period in pixels.
fn class_style(class: Class) -> ([f64; 3], f64, f64) {
    match class {
        // dark, strongly mottled
        Class::Melanoma => ([70.0, 30.0, 45.0], 38.0, 3.0),
        // light brown-yellow, coarse texture
        Class::SeborrheicKeratosis => ([165.0, 120.0, 55.0], 22.0, 9.0),
        // uniform medium brown
        Class::Nevus => ([125.0, 70.0, 45.0], 4.0, 6.0),
    }
}

/// Generates `per_class` images of each class. Lesion tone and texture depend
/// on the class; shape, placement and noise are random. Deterministic in `seed`.
pub fn three_class_corpus(per_class: usize, size: usize, seed: u64) -> Vec<CorpusItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 3.0).expect("valid sigma");
    let mut items = Vec::with_capacity(per_class * 3);
    for i in 0..per_class {
        for (k, class) in Class::ALL.into_iter().enumerate() {
            let shape = random_lesion_shape(size, size, &mut rng);
            let truth = shape.rasterize(size, size);
            let (tone, amp, period) = class_style(class);
            let jitter: [f64; 3] = std::array::from_fn(|_| rng.random_range(-8.0..8.0));
            let (px, py) = (rng.random_range(0.0..period), rng.random_range(0.0..period));
            let image = RgbImage::from_fn(size, size, |x, y| {
                let base: [f64; 3] = if truth.get(x, y) {
                    let t = ((x as f64 + px) * 2.0 * PI / period).sin()
                        * ((y as f64 + py) * 2.0 * PI / period).cos();
                    std::array::from_fn(|c| tone[c] + jitter[c] + amp * t)
                } else {
                    SKIN.map(|v| v as f64)
                };
                base.map(|v| clamp_u8(v + noise.sample(&mut rng)))
            })
            .expect("non-zero canvas");
            items.push(CorpusItem {
                image_id: format!("ISIC_{:07}", i * 3 + k),
                class,
                image,
                truth,
            });
        }
    }
    items
}
