use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error(
        "image {width}x{height} too small for radius {radius}: needs at least \
         {min_side}x{min_side} to keep a non-empty valid region"
    )]
    ImageTooSmall {
        width: usize,
        height: usize,
        radius: f64,
        min_side: usize,
    },

    #[error("layer {layer}: code image {width}x{height} exhausted by cropping (radius {radius})")]
    LayerExhausted {
        layer: usize,
        width: usize,
        height: usize,
        radius: f64,
    },

    #[error("invalid neighborhood: {0}")]
    InvalidNeighborhood(String),

    #[error("ordering covers {got} codes but the code space has {expected}")]
    OrderingSizeMismatch { expected: usize, got: usize },

    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("score sequences have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("feature arrangement contains duplicate index {0}")]
    DuplicateFeature(usize),

    #[error("feature index {index} out of range ({count} features)")]
    FeatureIndexOutOfRange { index: usize, count: usize },

    #[error("negative tolerance {0} for ternary encoding")]
    NegativeTolerance(f64),

    #[error("histogram over an empty region")]
    EmptyRegion,

    #[error("block grid {rows}x{cols} does not fit a {width}x{height} region")]
    GridTooFine {
        rows: usize,
        cols: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("scale factor {0} outside (0, 1]")]
    InvalidScaleFactor(f64),

    #[error("downscaled dimension collapsed to zero ({width}x{height} at factor {factor})")]
    ScaleTooSmall {
        width: usize,
        height: usize,
        factor: f64,
    },

    #[error("PCA: {0}")]
    Pca(String),

    #[error("feature vector has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    ImageDecode { path: PathBuf, message: String },

    #[error("class {class:?} has {count} samples, fewer than {folds} folds")]
    ClassSmallerThanFolds {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("oracle: {0}")]
    Oracle(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
