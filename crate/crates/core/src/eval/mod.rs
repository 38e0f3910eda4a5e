//! Evaluation harness: cross-validated texture classification.
//!
//! A run splits the dataset with stratified k-fold, augments each training
//! fold with flips, extracts features, optionally fits a PCA on the training
//! features alone, trains the classifier, and scores accuracy and class rank
//! on the held-out fold. Everything is derived from one seed through
//! counter-based RNG streams, so results are bit-reproducible.

mod dataset;
mod forest;
mod metrics;
mod oracle;

pub use dataset::{
    augment_flips, ingest_resize, load_dataset, load_image, load_image_raw, stratified_kfold,
    stratified_kfold_indices, Dataset, MAX_SIDE,
};
pub use forest::{rf_predict_proba, rf_train, RandomForestModel};
pub use metrics::{chi2_distance, class_rank, one_nn_chi2};
pub use oracle::{CvAccuracyOracle, OracleClassifier, OracleKind, OracleSpec};

use std::io::Write;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::architectures::{decision_fuse, run_multiscale, run_multiscale_per_layer, Fusion, MultiscaleModel};
use crate::error::{Error, Result};
use crate::features::{pca_apply, pca_fit};
use crate::gray::GrayImage;

/// Counter-derived RNG: one seed, disjoint streams per consumer.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Turns an image into one or more feature groups.
///
/// A single group feeds one classifier; multiple groups get one classifier
/// each, fused at decision level.
pub trait FeatureExtractor {
    fn extract_groups(&self, img: &GrayImage<f64>) -> Result<Vec<Vec<f64>>>;
}

/// Extractor backed by a (multiscale) deep pipeline.
pub struct ModelExtractor {
    model: MultiscaleModel,
}

impl ModelExtractor {
    pub fn new(model: MultiscaleModel) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &MultiscaleModel {
        &self.model
    }
}

impl FeatureExtractor for ModelExtractor {
    fn extract_groups(&self, img: &GrayImage<f64>) -> Result<Vec<Vec<f64>>> {
        match self.model.base.fusion {
            Fusion::DecisionFusion => Ok(run_multiscale_per_layer(img, &self.model)?
                .into_iter()
                .map(|fv| fv.into_values())
                .collect()),
            _ => Ok(vec![run_multiscale(img, &self.model)?.into_values()]),
        }
    }
}

/// Classifier selection for an evaluation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    RandomForest,
    OneNnChi2,
}

/// Evaluation parameters.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct EvalConfig {
    pub folds: usize,
    pub seed: u64,
    pub classifier: ClassifierKind,
    pub trees: usize,
    pub max_depth: Option<usize>,
    /// PCA variance fraction to retain; `None` disables PCA.
    pub pca_retain: Option<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        // desk-scale defaults; the study-scale protocol used 10 folds and
        // 1000 trees with depth bounded to 20 past 100 classes
        Self {
            folds: 5,
            seed: 0,
            classifier: ClassifierKind::RandomForest,
            trees: 100,
            max_depth: None,
            pca_retain: None,
        }
    }
}

/// One cross-validation fold's scores.
#[derive(Debug, Clone, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub accuracy: f64,
    pub class_rank: f64,
}

/// Per-fold and aggregate results plus the configuration echo.
///
/// Class-rank ties contribute half a position (documented tie convention).
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub per_fold: Vec<FoldResult>,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub class_rank_mean: f64,
    pub class_rank_std: f64,
    pub config: serde_json::Value,
}

impl EvalReport {
    fn from_folds(per_fold: Vec<FoldResult>, config: serde_json::Value) -> Self {
        let acc: Vec<f64> = per_fold.iter().map(|f| f.accuracy).collect();
        let rank: Vec<f64> = per_fold.iter().map(|f| f.class_rank).collect();
        let (accuracy_mean, accuracy_std) = mean_std(&acc);
        let (class_rank_mean, class_rank_std) = mean_std(&rank);
        Self {
            per_fold,
            accuracy_mean,
            accuracy_std,
            class_rank_mean,
            class_rank_std,
            config,
        }
    }

    /// `fold,accuracy,class_rank` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "fold,accuracy,class_rank")?;
        for f in &self.per_fold {
            writeln!(w, "{},{},{}", f.fold, f.accuracy, f.class_rank)?;
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Features of one sample under the three augmentation poses.
struct SampleFeatures {
    /// `groups[pose][group]`, poses ordered original, h-flip, v-flip.
    poses: Vec<Vec<Vec<f64>>>,
}

/// Cross-validated evaluation of a feature pipeline and classifier.
///
/// Flip augmentation applies to training folds only; PCA (when enabled) and
/// the classifier are fit strictly on the augmented training fold.
pub fn evaluate(
    ds: &Dataset,
    extractor: &dyn FeatureExtractor,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    if ds.num_classes() < 2 {
        return Err(Error::Dataset("evaluation needs at least 2 classes".into()));
    }
    let folds = stratified_kfold(ds, cfg.folds, cfg.seed)?;
    let num_classes = ds.num_classes();
    let labels = ds.labels();

    // features are pure per (image, pose): compute once, reuse across folds
    let features: Vec<SampleFeatures> = ds
        .samples()
        .iter()
        .map(|(img, _)| {
            let poses = vec![
                extractor.extract_groups(img)?,
                extractor.extract_groups(&img.flip_horizontal())?,
                extractor.extract_groups(&img.flip_vertical())?,
            ];
            Ok(SampleFeatures { poses })
        })
        .collect::<Result<_>>()?;
    let num_groups = features
        .first()
        .map(|f| f.poses[0].len())
        .ok_or_else(|| Error::Dataset("empty dataset".into()))?;

    let mut per_fold = Vec::with_capacity(folds.len());
    for (fold, (train_idx, test_idx)) in folds.iter().enumerate() {
        let mut train_y = Vec::with_capacity(train_idx.len() * 3);
        for &i in train_idx {
            train_y.extend([labels[i]; 3]);
        }

        // per-group predicted probabilities for every test sample
        let mut group_probs: Vec<Vec<Vec<f64>>> = Vec::with_capacity(num_groups);
        for g in 0..num_groups {
            let mut train_x: Vec<Vec<f64>> = Vec::with_capacity(train_idx.len() * 3);
            for &i in train_idx {
                for pose in 0..3 {
                    train_x.push(features[i].poses[pose][g].clone());
                }
            }
            let mut test_x: Vec<Vec<f64>> = test_idx
                .iter()
                .map(|&i| features[i].poses[0][g].clone())
                .collect();

            if let Some(retain) = cfg.pca_retain {
                let pca = pca_fit(&train_x, retain)?;
                train_x = train_x
                    .iter()
                    .map(|r| pca_apply(&pca, r))
                    .collect::<Result<_>>()?;
                test_x = test_x
                    .iter()
                    .map(|r| pca_apply(&pca, r))
                    .collect::<Result<_>>()?;
            }

            let probs: Vec<Vec<f64>> = match cfg.classifier {
                ClassifierKind::RandomForest => {
                    let model = rf_train(
                        &train_x,
                        &train_y,
                        num_classes,
                        cfg.trees,
                        cfg.max_depth,
                        cfg.seed ^ (fold as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
                    )?;
                    test_x
                        .iter()
                        .map(|x| rf_predict_proba(&model, x))
                        .collect()
                }
                ClassifierKind::OneNnChi2 => test_x
                    .iter()
                    .map(|x| one_nn_chi2(&train_x, &train_y, num_classes, x))
                    .collect(),
            };
            group_probs.push(probs);
        }

        let mut correct = 0usize;
        let mut rank_sum = 0.0f64;
        for (t, &i) in test_idx.iter().enumerate() {
            let probs = if num_groups == 1 {
                group_probs[0][t].clone()
            } else {
                let per_group: Vec<Vec<f64>> =
                    (0..num_groups).map(|g| group_probs[g][t].clone()).collect();
                decision_fuse(&per_group)?
            };
            let pred = argmax(&probs);
            if pred == labels[i] {
                correct += 1;
            }
            rank_sum += class_rank(&probs, labels[i], num_classes);
        }
        per_fold.push(FoldResult {
            fold,
            accuracy: correct as f64 / test_idx.len() as f64,
            class_rank: rank_sum / test_idx.len() as f64,
        });
    }

    let config = serde_json::to_value(cfg).map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(EvalReport::from_folds(per_fold, config))
}

/// Index of the largest value; ties resolve toward the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
