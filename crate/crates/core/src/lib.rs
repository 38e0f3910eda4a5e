//! Texture analysis with local binary patterns and learned code orderings.
//!
//! The classical LBP encoder compares each pixel against its sampled
//! neighborhood and packs the comparison bits into a code; histograms of
//! codes describe texture. Codes themselves carry no natural order, so the
//! encoder cannot normally digest its own output. This crate generalizes the
//! binarization step to any total preorder over codes, which makes the
//! operator recursive: deeper layers re-encode the code image under a
//! learned ordering, producing increasingly abstract texture descriptions.
//!
//! Modules:
//!
//! * [`encoding`] — pixel kernels: plain, rotation-invariant, uniform, and
//!   ternary encodings, plus rank-based re-encoding.
//! * [`ordering`] — constructing orderings from code dissimilarities
//!   (spectral embedding) or lexicographic code features (with greedy
//!   oracle-driven arrangement search).
//! * [`architectures`] — deep, multi-deep, and multiscale pipelines.
//! * [`features`] — histogram summarization, block grids, and PCA.
//! * [`eval`] — dataset ingestion, stratified cross-validation, a random
//!   forest and a chi-square nearest-neighbor classifier, and report output.
//! * [`combinatorics`] — exact big-integer counts of the ordering search
//!   space.
//! * [`synth`] — synthetic texture datasets for tests and demos.
//!
//! The numeric kernels are generic over the scalar type through
//! [`num::Real`]; `f64` aliases for the common containers live at the crate
//! root.

pub mod architectures;
pub mod combinatorics;
pub mod encoding;
pub mod error;
pub mod eval;
pub mod features;
pub mod gray;
pub mod num;
pub mod ordering;
pub mod synth;

pub use error::{Error, Result};

/// Default-precision grayscale image.
pub type GrayImage = gray::GrayImage<f64>;
/// Single-precision grayscale image.
pub type GrayImageF32 = gray::GrayImage<f32>;
/// Default-precision histogram.
pub type Histogram = features::Histogram<f64>;
/// Default-precision feature vector.
pub type FeatureVector = features::FeatureVector<f64>;
/// Default-precision PCA transform.
pub type PcaTransform = features::PcaTransform<f64>;
