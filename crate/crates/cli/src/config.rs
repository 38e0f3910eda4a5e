//! Run configuration: one JSON document describing the pipeline, the
//! evaluation parameters, and the seed. Flags override file values; unknown
//! keys are rejected before any computation starts.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use deeplbp::architectures::{DeepModel, Fusion, MultiscaleModel};
use deeplbp::encoding::{CodeMap, Metric, NeighborhoodSpec, Sampling};
use deeplbp::eval::{ClassifierKind, EvalConfig};
use deeplbp::ordering::{code_features, ordering_from_lex, Ordering};

/// Pipeline description inside a [`RunConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub spec: NeighborhoodSpec,
    #[serde(default = "default_layers")]
    pub layers: usize,
    /// Inline orderings for layers 2..=layers. One entry is shared across
    /// all deep layers; empty falls back to `ordering_files`, then to the
    /// built-in lexicographic default.
    #[serde(default)]
    pub orderings: Vec<Ordering>,
    /// Ordering JSON files, used when `orderings` is empty.
    #[serde(default)]
    pub ordering_files: Vec<PathBuf>,
    #[serde(default = "default_fusion")]
    pub fusion: Fusion,
    #[serde(default = "default_code_map")]
    pub code_map: CodeMap,
    #[serde(default = "default_scales")]
    pub scales: usize,
    #[serde(default = "default_scale_factor")]
    pub scale_factor: f64,
}

fn default_layers() -> usize {
    2
}
fn default_fusion() -> Fusion {
    Fusion::FeatureFusion
}
fn default_code_map() -> CodeMap {
    CodeMap::Raw
}
fn default_scales() -> usize {
    1
}
fn default_scale_factor() -> f64 {
    0.5
}

impl Default for ModelConfig {
    fn default() -> Self {
        // 8 neighbors on radius 3: the reference protocol's neighborhood
        Self {
            spec: NeighborhoodSpec::new(8, 3.0, Metric::EuclideanCircle, Sampling::Bilinear)
                .expect("valid default neighborhood"),
            layers: default_layers(),
            orderings: Vec::new(),
            ordering_files: Vec::new(),
            fusion: default_fusion(),
            code_map: default_code_map(),
            scales: default_scales(),
            scale_factor: default_scale_factor(),
        }
    }
}

/// Evaluation parameters inside a [`RunConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalParams {
    pub folds: usize,
    pub classifier: ClassifierKind,
    pub trees: usize,
    pub max_depth: Option<usize>,
    pub pca_retain: Option<f64>,
}

impl Default for EvalParams {
    fn default() -> Self {
        // desk-scale defaults; the study-scale protocol used 10 folds and
        // 1000 trees
        Self {
            folds: 5,
            classifier: ClassifierKind::RandomForest,
            trees: 100,
            max_depth: None,
            pca_retain: None,
        }
    }
}

/// The whole run configuration document.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub eval: EvalParams,
    pub dataset: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    /// Loads and schema-validates a config file, or the defaults when no
    /// path is given.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("config {} failed schema validation", p.display()))
            }
        }
    }
}

/// The evaluation strategies exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Shallow,
    Deep,
    MultiscaleShallow,
    MultiscaleDeep,
    DeepPca,
}

/// Built-in deep-layer ordering: codes ranked lexicographically by number of
/// groups, largest group size, and 0/1 imbalance.
pub fn default_ordering(n: u32) -> anyhow::Result<Ordering> {
    let table = code_features(n)?;
    let arrangement = ["transitions", "largest-run", "imbalance"]
        .iter()
        .map(|name| {
            table
                .feature_index(name)
                .ok_or_else(|| anyhow::anyhow!("missing built-in feature {name}"))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(ordering_from_lex(&table, &arrangement)?)
}

impl ModelConfig {
    fn resolve_orderings(&self, layers: usize) -> anyhow::Result<Vec<Ordering>> {
        if layers <= 1 {
            return Ok(Vec::new());
        }
        let needed = layers - 1;
        let mut pool: Vec<Ordering> = if !self.orderings.is_empty() {
            self.orderings.clone()
        } else if !self.ordering_files.is_empty() {
            self.ordering_files
                .iter()
                .map(|p| {
                    let text = std::fs::read_to_string(p)
                        .with_context(|| format!("reading ordering {}", p.display()))?;
                    serde_json::from_str::<Ordering>(&text)
                        .with_context(|| format!("ordering {} is invalid", p.display()))
                })
                .collect::<anyhow::Result<_>>()?
        } else {
            vec![default_ordering(self.spec.n)?]
        };
        if pool.len() == 1 && needed > 1 {
            // one ordering learned once and reused on every deeper layer
            pool = vec![pool[0].clone(); needed];
        }
        if pool.len() != needed {
            bail!(
                "{layers} layers need {needed} orderings, got {}",
                pool.len()
            );
        }
        Ok(pool)
    }

    /// Builds the runtime model, optionally reshaped by an eval strategy.
    pub fn build(&self, strategy: Option<Strategy>) -> anyhow::Result<MultiscaleModel> {
        let (layers, scales, fusion) = match strategy {
            None => (self.layers, self.scales, self.fusion),
            Some(Strategy::Shallow) => (1, 1, Fusion::FinalOnly),
            Some(Strategy::Deep) | Some(Strategy::DeepPca) => {
                (self.layers.max(2), 1, self.fusion)
            }
            Some(Strategy::MultiscaleShallow) => {
                (1, if self.scales > 1 { self.scales } else { 3 }, Fusion::FinalOnly)
            }
            Some(Strategy::MultiscaleDeep) => (
                self.layers.max(2),
                if self.scales > 1 { self.scales } else { 3 },
                self.fusion,
            ),
        };
        let orderings = self.resolve_orderings(layers)?;
        let base = DeepModel::new(self.spec, orderings, fusion, self.code_map)?;
        Ok(MultiscaleModel::new(base, scales, self.scale_factor)?)
    }
}

/// Assembles the library-level evaluation config.
pub fn eval_config(cfg: &RunConfig, strategy: Strategy, retain: Option<f64>) -> EvalConfig {
    let pca_retain = match strategy {
        Strategy::DeepPca => Some(retain.or(cfg.eval.pca_retain).unwrap_or(0.95)),
        _ => retain.or(cfg.eval.pca_retain),
    };
    EvalConfig {
        folds: cfg.eval.folds,
        seed: cfg.seed,
        classifier: cfg.eval.classifier,
        trees: cfg.eval.trees,
        max_depth: cfg.eval.max_depth,
        pca_retain,
    }
}
