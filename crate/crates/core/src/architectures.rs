//! Deep, multi-deep, and multiscale pipeline composition.
//!
//! A deep pipeline encodes the image once with intensity comparisons, then
//! re-encodes the code image through one learned ordering per additional
//! layer. Per-layer histograms are fused at the feature level (concatenation)
//! or kept separate for decision-level fusion; a multiscale model repeats the
//! whole pipeline over a shrinking image pyramid and concatenates in scale
//! order.

use serde::{Deserialize, Serialize};

use crate::encoding::{encode_with_ordering, lbp_encode, CodeImage, CodeMap, NeighborhoodSpec};
use crate::error::{Error, Result};
use crate::features::{histogram, FeatureVector, LayoutSegment};
use crate::gray::GrayImage;
use crate::num::{real, Real};
use crate::ordering::Ordering;

/// How per-layer information is combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fusion {
    /// Histogram of the deepest layer only.
    FinalOnly,
    /// Concatenation of every layer's histogram, in layer order.
    FeatureFusion,
    /// One classifier per layer; probabilities averaged at decision time.
    DecisionFusion,
}

/// A deep LBP pipeline: one neighborhood, `layers` encoding passes, and an
/// ordering per pass after the first.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepModel {
    pub spec: NeighborhoodSpec,
    pub layers: usize,
    pub orderings: Vec<Ordering>,
    pub fusion: Fusion,
    pub code_map: CodeMap,
}

impl DeepModel {
    pub fn new(
        spec: NeighborhoodSpec,
        orderings: Vec<Ordering>,
        fusion: Fusion,
        code_map: CodeMap,
    ) -> Result<Self> {
        let layers = orderings.len() + 1;
        for (i, ord) in orderings.iter().enumerate() {
            if ord.num_codes() != spec.num_codes() {
                return Err(Error::InvalidModel(format!(
                    "ordering for layer {} covers {} codes, neighborhood has {}",
                    i + 2,
                    ord.num_codes(),
                    spec.num_codes()
                )));
            }
        }
        Ok(Self {
            spec,
            layers,
            orderings,
            fusion,
            code_map,
        })
    }

    /// Depth-1 model: plain shallow LBP.
    pub fn shallow(spec: NeighborhoodSpec, code_map: CodeMap) -> Self {
        Self {
            spec,
            layers: 1,
            orderings: Vec::new(),
            fusion: Fusion::FinalOnly,
            code_map,
        }
    }

    /// Builds a depth-`layers` model reusing one ordering for every layer
    /// past the first.
    pub fn with_shared_ordering(
        spec: NeighborhoodSpec,
        ordering: Ordering,
        layers: usize,
        fusion: Fusion,
        code_map: CodeMap,
    ) -> Result<Self> {
        if layers == 0 {
            return Err(Error::InvalidModel("layers must be at least 1".into()));
        }
        Self::new(spec, vec![ordering; layers - 1], fusion, code_map)
    }
}

/// A deep pipeline applied over an image pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleModel {
    pub base: DeepModel,
    pub num_scales: usize,
    pub scale_factor: f64,
}

impl MultiscaleModel {
    pub fn new(base: DeepModel, num_scales: usize, scale_factor: f64) -> Result<Self> {
        if num_scales == 0 {
            return Err(Error::InvalidModel("num_scales must be at least 1".into()));
        }
        if !(scale_factor > 0.0 && scale_factor <= 1.0) {
            return Err(Error::InvalidScaleFactor(scale_factor));
        }
        Ok(Self {
            base,
            num_scales,
            scale_factor,
        })
    }

    /// Single-scale wrapper around a deep model.
    pub fn single_scale(base: DeepModel) -> Self {
        Self {
            base,
            num_scales: 1,
            scale_factor: 0.5,
        }
    }
}

/// On-disk model description:
/// `{"spec": .., "layers": .., "orderings": [..], "fusion": ..,
///   "code_map": .., "scales": .., "scale_factor": ..}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub spec: NeighborhoodSpec,
    pub layers: usize,
    pub orderings: Vec<Ordering>,
    pub fusion: Fusion,
    pub code_map: CodeMap,
    pub scales: usize,
    pub scale_factor: f64,
}

impl ModelFile {
    pub fn from_model(model: &MultiscaleModel) -> Self {
        Self {
            spec: model.base.spec,
            layers: model.base.layers,
            orderings: model.base.orderings.clone(),
            fusion: model.base.fusion,
            code_map: model.base.code_map,
            scales: model.num_scales,
            scale_factor: model.scale_factor,
        }
    }

    pub fn into_model(self) -> Result<MultiscaleModel> {
        if self.layers != self.orderings.len() + 1 {
            return Err(Error::InvalidModel(format!(
                "{} layers need {} orderings, file has {}",
                self.layers,
                self.layers.saturating_sub(1),
                self.orderings.len()
            )));
        }
        let base = DeepModel::new(self.spec, self.orderings, self.fusion, self.code_map)?;
        MultiscaleModel::new(base, self.scales, self.scale_factor)
    }
}

/// Runs every encoding layer, returning all code images in depth order.
pub fn run_deep<T: Real>(img: &GrayImage<T>, model: &DeepModel) -> Result<Vec<CodeImage>> {
    let mut layers = Vec::with_capacity(model.layers);
    let first = lbp_encode(img, &model.spec)?;
    layers.push(first);
    for ord in &model.orderings {
        let next = encode_with_ordering(layers.last().unwrap(), ord, &model.spec)?;
        layers.push(next);
    }
    Ok(layers)
}

fn layer_histograms<T: Real>(img: &GrayImage<T>, model: &DeepModel) -> Result<Vec<FeatureVector<T>>> {
    run_deep(img, model)?
        .iter()
        .map(|codes| {
            let h = histogram::<T>(codes, model.code_map)?;
            let bins = h.domain_size();
            Ok(FeatureVector::new(
                h.bins().to_vec(),
                vec![LayoutSegment {
                    scale: 0,
                    layer: codes.layer(),
                    block: None,
                    map: model.code_map,
                    bins,
                }],
            ))
        })
        .collect()
}

/// Extracts the single-scale feature vector of a deep pipeline.
///
/// `final-only` keeps the deepest layer's histogram; `feature-fusion`
/// concatenates every layer's histogram in layer order. Decision fusion has
/// no single feature vector; use [`features_deep_per_layer`] and fuse the
/// per-layer classifier outputs with [`decision_fuse`].
pub fn features_deep<T: Real>(img: &GrayImage<T>, model: &DeepModel) -> Result<FeatureVector<T>> {
    let mut hists = layer_histograms(img, model)?;
    match model.fusion {
        Fusion::FinalOnly => Ok(hists.pop().expect("at least one layer")),
        Fusion::FeatureFusion => Ok(FeatureVector::concat(hists)),
        Fusion::DecisionFusion => Err(Error::InvalidModel(
            "decision fusion produces one feature vector per layer, not a single vector".into(),
        )),
    }
}

/// Per-layer histograms for decision-level fusion.
pub fn features_deep_per_layer<T: Real>(
    img: &GrayImage<T>,
    model: &DeepModel,
) -> Result<Vec<FeatureVector<T>>> {
    layer_histograms(img, model)
}

/// Element-wise mean of per-layer class-probability vectors, renormalized.
pub fn decision_fuse<T: Real>(per_layer_probs: &[Vec<T>]) -> Result<Vec<T>> {
    let first = per_layer_probs
        .first()
        .ok_or_else(|| Error::InvalidModel("decision fusion over zero models".into()))?;
    let len = first.len();
    let tol: T = real(1e-6);
    for probs in per_layer_probs {
        if probs.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: probs.len(),
            });
        }
        let sum: T = probs.iter().copied().sum();
        if (sum - T::one()).abs() > tol {
            return Err(Error::InvalidModel(format!(
                "probability vector sums to {sum}, expected 1"
            )));
        }
    }
    let count: T = real(per_layer_probs.len() as f64);
    let mut fused: Vec<T> = (0..len)
        .map(|i| {
            per_layer_probs.iter().map(|p| p[i]).sum::<T>() / count
        })
        .collect();
    let total: T = fused.iter().copied().sum();
    for v in &mut fused {
        *v = *v / total;
    }
    Ok(fused)
}

/// Area-average downscale by `factor`, rounding each output dimension.
pub fn downscale<T: Real>(img: &GrayImage<T>, factor: f64) -> Result<GrayImage<T>> {
    if !(factor > 0.0 && factor <= 1.0) {
        return Err(Error::InvalidScaleFactor(factor));
    }
    let out_w = (img.width() as f64 * factor).round() as usize;
    let out_h = (img.height() as f64 * factor).round() as usize;
    if out_w == 0 || out_h == 0 {
        return Err(Error::ScaleTooSmall {
            width: img.width(),
            height: img.height(),
            factor,
        });
    }
    img.resample(out_w, out_h)
}

/// Concatenated deep features over the scale set `{1, f, f^2, ...}`.
pub fn run_multiscale<T: Real>(
    img: &GrayImage<T>,
    mmodel: &MultiscaleModel,
) -> Result<FeatureVector<T>> {
    let mut parts = Vec::with_capacity(mmodel.num_scales);
    for s in 0..mmodel.num_scales {
        let factor = mmodel.scale_factor.powi(s as i32);
        let scaled = if s == 0 {
            img.clone()
        } else {
            downscale(img, factor)?
        };
        parts.push(features_deep(&scaled, &mmodel.base)?.with_scale(s));
    }
    Ok(FeatureVector::concat(parts))
}

/// Per-(scale, layer) histograms for decision fusion over a multiscale model.
pub fn run_multiscale_per_layer<T: Real>(
    img: &GrayImage<T>,
    mmodel: &MultiscaleModel,
) -> Result<Vec<FeatureVector<T>>> {
    let mut parts = Vec::new();
    for s in 0..mmodel.num_scales {
        let factor = mmodel.scale_factor.powi(s as i32);
        let scaled = if s == 0 {
            img.clone()
        } else {
            downscale(img, factor)?
        };
        for fv in features_deep_per_layer(&scaled, &mmodel.base)? {
            parts.push(fv.with_scale(s));
        }
    }
    Ok(parts)
}
