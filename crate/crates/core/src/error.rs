use std::path::PathBuf;

use crate::segmentation::ColorMarker;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("unsupported format in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("inconsistent label for {image_id}: both melanoma and seborrheic_keratosis are set")]
    InconsistentLabel { image_id: String },

    #[error("duplicate image id {0}")]
    DuplicateId(String),

    #[error("invalid value: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("seed region is empty: {0}")]
    EmptySeedRegion(&'static str),

    #[error("seed outside image bounds: {0}")]
    SeedOutOfBounds(String),

    #[error(
        "lesion and skin markers are indistinguishable (distance {distance:.3e} in a*b*)"
    )]
    DegenerateMarkers {
        lesion: ColorMarker,
        skin: ColorMarker,
        distance: f64,
    },

    #[error("mask contains no lesion pixel")]
    NoLesion,

    #[error("mask has {0} lesion components, expected exactly one")]
    MultipleComponents(usize),

    #[error("no co-occurring pixel pair inside the mask")]
    NoPairs,

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("class {0} is absent from the training data")]
    MissingClass(&'static str),

    #[error("SMO did not converge after {iterations} updates (max KKT violation {max_violation:.3e})")]
    NotConverged { iterations: usize, max_violation: f64 },

    #[error("model file: {0}")]
    Model(String),

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Csv {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
