//! Cross-validation oracle scoring candidate feature arrangements.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::encoding::{encode_with_ordering, lbp_encode, CodeImage, CodeMap, NeighborhoodSpec};
use crate::error::{Error, Result};
use crate::features::histogram;
use crate::ordering::{code_features, ordering_from_lex, ArrangementOracle, CodeFeatureTable};

use super::dataset::{stratified_kfold_indices, Dataset};
use super::metrics::one_nn_chi2;
use super::{argmax, stream_rng};

const STREAM_SUBSAMPLE: u64 = 3 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    CvAccuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleClassifier {
    OneNnChi2,
}

/// Oracle configuration: cheap cross-validated accuracy on a class-balanced
/// subsample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OracleSpec {
    pub kind: OracleKind,
    pub classifier: OracleClassifier,
    pub folds: usize,
    pub seed: u64,
    /// Maximum images kept per class.
    pub subsample: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            kind: OracleKind::CvAccuracy,
            classifier: OracleClassifier::OneNnChi2,
            folds: 3,
            seed: 0,
            subsample: 20,
        }
    }
}

/// Scores an arrangement by the CV accuracy of a depth-2 pipeline whose
/// second layer uses the candidate lexicographic ordering.
///
/// Layer-1 code images and histograms are precomputed once; each candidate
/// evaluation only re-encodes layer 2.
pub struct CvAccuracyOracle {
    spec: NeighborhoodSpec,
    code_map: CodeMap,
    oracle: OracleSpec,
    features: CodeFeatureTable,
    labels: Vec<usize>,
    class_names: Vec<String>,
    num_classes: usize,
    layer1: Vec<CodeImage>,
    layer1_hist: Vec<Vec<f64>>,
}

impl CvAccuracyOracle {
    pub fn new(
        ds: &Dataset,
        spec: NeighborhoodSpec,
        code_map: CodeMap,
        oracle: OracleSpec,
    ) -> Result<Self> {
        if ds.is_empty() || ds.num_classes() < 2 {
            return Err(Error::Oracle(
                "oracle needs a non-empty dataset with at least 2 classes".into(),
            ));
        }
        if oracle.folds < 2 {
            return Err(Error::Oracle("oracle needs at least 2 folds".into()));
        }
        if oracle.subsample < 1 {
            return Err(Error::Oracle("subsample must be at least 1".into()));
        }

        // class-balanced seeded subsample
        let labels = ds.labels();
        let mut kept: Vec<usize> = Vec::new();
        for class in 0..ds.num_classes() {
            let mut idx: Vec<usize> = (0..ds.len()).filter(|&i| labels[i] == class).collect();
            let mut rng = stream_rng(oracle.seed, STREAM_SUBSAMPLE + class as u64);
            idx.shuffle(&mut rng);
            idx.truncate(oracle.subsample);
            idx.sort_unstable();
            if idx.len() < oracle.folds {
                return Err(Error::Oracle(format!(
                    "class {:?} retains {} samples, fewer than {} folds",
                    ds.class_names()[class],
                    idx.len(),
                    oracle.folds
                )));
            }
            kept.extend(idx);
        }
        kept.sort_unstable();

        let mut layer1 = Vec::with_capacity(kept.len());
        let mut layer1_hist = Vec::with_capacity(kept.len());
        let mut sub_labels = Vec::with_capacity(kept.len());
        for &i in &kept {
            let (img, label) = &ds.samples()[i];
            let codes = lbp_encode(img, &spec)?;
            layer1_hist.push(histogram::<f64>(&codes, code_map)?.bins().to_vec());
            layer1.push(codes);
            sub_labels.push(*label);
        }

        Ok(Self {
            spec,
            code_map,
            oracle,
            features: code_features(spec.n)?,
            labels: sub_labels,
            class_names: ds.class_names().to_vec(),
            num_classes: ds.num_classes(),
            layer1,
            layer1_hist,
        })
    }

    pub fn features(&self) -> &CodeFeatureTable {
        &self.features
    }
}

impl ArrangementOracle for CvAccuracyOracle {
    fn evaluate(&self, arrangement: &[usize]) -> Result<f64> {
        let ordering = ordering_from_lex(&self.features, arrangement)?;
        // depth-2 feature fusion: layer-1 histogram + candidate layer-2 histogram
        let fused: Vec<Vec<f64>> = self
            .layer1
            .iter()
            .zip(&self.layer1_hist)
            .map(|(codes, h1)| {
                let layer2 = encode_with_ordering(codes, &ordering, &self.spec)?;
                let h2 = histogram::<f64>(&layer2, self.code_map)?;
                let mut fv = h1.clone();
                fv.extend_from_slice(h2.bins());
                Ok(fv)
            })
            .collect::<Result<_>>()?;

        let folds = stratified_kfold_indices(
            &self.labels,
            &self.class_names,
            self.oracle.folds,
            self.oracle.seed,
        )?;
        let mut correct = 0usize;
        let mut total = 0usize;
        for (train, test) in &folds {
            let train_x: Vec<Vec<f64>> = train.iter().map(|&i| fused[i].clone()).collect();
            let train_y: Vec<usize> = train.iter().map(|&i| self.labels[i]).collect();
            for &t in test {
                let probs = one_nn_chi2(&train_x, &train_y, self.num_classes, &fused[t]);
                if argmax(&probs) == self.labels[t] {
                    correct += 1;
                }
                total += 1;
            }
        }
        Ok(correct as f64 / total as f64)
    }
}
