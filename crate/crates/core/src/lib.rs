//! Dermoscopy lesion analysis: CIELAB color-marker segmentation, shape,
//! texture and color descriptors, and a one-vs-all polynomial-kernel SVM
//! trained by sequential minimal optimization.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod color_features;
pub mod colorspace;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod features_assembly;
pub mod morphology;
pub mod segmentation;
pub mod shape_features;
pub mod svm;
pub mod texture_features;
pub mod synthetic;

pub use colorspace::{srgb_to_lab, Lab, LabImage};
pub use dataset::{BinaryMask, Class, LabelTable, RgbImage, SubmissionRow};
pub use error::{Error, Result};
