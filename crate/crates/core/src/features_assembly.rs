//! The fixed-order 42-value feature vector and its CSV form.

use std::io::Write;
use std::path::Path;

use crate::color_features::{compute_color_features, ColorFeatures, GlcmParams};
use crate::colorspace::srgb_to_lab;
use crate::dataset::{BinaryMask, RgbImage};
use crate::error::{Error, Result};
use crate::shape_features::{compute_shape_features, ShapeFeatures};
use crate::texture_features::{compute_texture_features, gray, TextureFeatures, TextureParams};

pub const FEATURE_COUNT: usize = 42;

/// Shape descriptors carried into the vector. Contour moment 1 is
/// identically zero, and hull area and hull perimeter are recoverable from
/// solidity and convexity.
pub const SHAPE_SLOTS: [&str; 14] = [
    "area",
    "perimeter",
    "compactness",
    "asymmetry",
    "aspect_ratio",
    "eccentricity",
    "bending_energy",
    "contour_moment_2",
    "contour_moment_3",
    "hu_1",
    "hu_2",
    "hu_3",
    "convexity",
    "solidity",
];

/// Descriptive names of the 42 features, in vector order.
pub fn feature_names() -> Vec<String> {
    SHAPE_SLOTS
        .iter()
        .map(|s| s.to_string())
        .chain(TextureFeatures::NAMES.iter().map(|s| s.to_string()))
        .chain(ColorFeatures::names())
        .collect()
}

/// CSV column names `f01`..`f42`.
pub fn column_names() -> Vec<String> {
    (1..=FEATURE_COUNT).map(|k| format!("f{k:02}")).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub image_id: String,
    pub values: [f64; FEATURE_COUNT],
}

impl FeatureVector {
    pub fn assemble(
        image_id: impl Into<String>,
        shape: &ShapeFeatures,
        texture: &TextureFeatures,
        color: &ColorFeatures,
    ) -> Self {
        let all = shape.values();
        let mut values = [0.0; FEATURE_COUNT];
        for (slot, name) in values.iter_mut().zip(SHAPE_SLOTS) {
            let k = ShapeFeatures::NAMES
                .iter()
                .position(|n| *n == name)
                .expect("shape slot names a shape feature");
            *slot = all[k];
        }
        values[14..19].copy_from_slice(&texture.values());
        values[19..].copy_from_slice(&color.values());
        Self {
            image_id: image_id.into(),
            values,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureParams {
    pub texture: TextureParams,
    pub glcm: GlcmParams,
}

pub fn extract_features(image_id: &str, img: &RgbImage, mask: &BinaryMask) -> Result<FeatureVector> {
    extract_features_with(image_id, img, mask, &FeatureParams::default())
}

pub fn extract_features_with(
    image_id: &str,
    img: &RgbImage,
    mask: &BinaryMask,
    params: &FeatureParams,
) -> Result<FeatureVector> {
    if !mask.same_dims(img.width(), img.height()) {
        return Err(Error::DimensionMismatch(format!(
            "{image_id}: mask {}×{} vs image {}×{}",
            mask.width(),
            mask.height(),
            img.width(),
            img.height()
        )));
    }
    let shape = compute_shape_features(mask)?;
    let texture = compute_texture_features(&gray(img), mask, &params.texture)?;
    let color = compute_color_features(img, &srgb_to_lab(img), mask, &params.glcm)?;
    let fv = FeatureVector::assemble(image_id, &shape, &texture, &color);
    if let Some(k) = fv.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{image_id}: feature {} is not finite",
            feature_names()[k]
        )));
    }
    Ok(fv)
}

/// Writes `image_id,f01,...,f42` with 9 significant digits, rows in the
/// given order.
pub fn write_features_csv(rows: &[FeatureVector], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("image_id");
    for c in column_names() {
        out.push(',');
        out.push_str(&c);
    }
    out.push('\n');
    for row in rows {
        out.push_str(&row.image_id);
        for v in &row.values {
            out.push_str(&format!(",{v:.8e}"));
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_features_csv(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let expected: Vec<String> = std::iter::once("image_id".to_string()).chain(column_names()).collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::csv(path, "header must be image_id,f01,...,f42"));
    }
    let mut rows = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let image_id = record[0].to_string();
        if !seen.insert(image_id.clone()) {
            return Err(Error::DuplicateId(image_id));
        }
        let mut values = [0.0; FEATURE_COUNT];
        for (k, slot) in values.iter_mut().enumerate() {
            let field = &record[k + 1];
            *slot = field
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::csv(path, format!("row {}: bad value {field:?} in f{:02}", line + 2, k + 1))
                })?;
        }
        rows.push(FeatureVector { image_id, values });
    }
    Ok(rows)
}
