//! Random forest classifier: bagged CART trees with gini splits.
//!
//! Trees draw bootstrap samples and sqrt(d) candidate features per split;
//! leaves store class frequencies and prediction averages the leaf
//! histograms. Every random draw comes from a counter-derived stream of the
//! run seed, so training is reproducible regardless of scheduling.

use rand::Rng;

use crate::error::{Error, Result};

use super::stream_rng;

const STREAM_TREE: u64 = 2 << 32;

#[derive(Debug, Clone)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict<'a>(&'a self, x: &[f64]) -> &'a [f64] {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { probs } => return probs,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

/// A trained forest.
#[derive(Debug, Clone)]
pub struct RandomForestModel {
    trees: Vec<Tree>,
    num_classes: usize,
}

impl RandomForestModel {
    pub fn num_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    num_classes: usize,
    num_features: usize,
    m_try: usize,
    max_depth: Option<usize>,
    nodes: Vec<Node>,
}

impl<'a> TreeBuilder<'a> {
    fn leaf(&mut self, samples: &[usize]) -> usize {
        let mut counts = vec![0usize; self.num_classes];
        for &i in samples {
            counts[self.y[i]] += 1;
        }
        let total = samples.len() as f64;
        self.nodes.push(Node::Leaf {
            probs: counts.iter().map(|&c| c as f64 / total).collect(),
        });
        self.nodes.len() - 1
    }

    fn build(&mut self, samples: Vec<usize>, depth: usize, rng: &mut impl Rng) -> usize {
        let first_class = self.y[samples[0]];
        let pure = samples.iter().all(|&i| self.y[i] == first_class);
        let depth_capped = self.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || samples.len() < 2 {
            return self.leaf(&samples);
        }

        // sample m_try distinct candidate features
        let mut pool: Vec<usize> = (0..self.num_features).collect();
        for k in 0..self.m_try {
            let j = rng.gen_range(k..pool.len());
            pool.swap(k, j);
        }

        let mut best: Option<(f64, usize, f64)> = None; // (weighted gini, feature, threshold)
        let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
        for &feature in &pool[..self.m_try] {
            scratch.clear();
            scratch.extend(samples.iter().map(|&i| (self.x[i][feature], self.y[i])));
            scratch.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature"));
            if scratch[0].0 == scratch[scratch.len() - 1].0 {
                continue;
            }
            let mut left_counts = vec![0usize; self.num_classes];
            let mut right_counts = vec![0usize; self.num_classes];
            for &(_, c) in scratch.iter() {
                right_counts[c] += 1;
            }
            let total = scratch.len() as f64;
            for cut in 1..scratch.len() {
                let c = scratch[cut - 1].1;
                left_counts[c] += 1;
                right_counts[c] -= 1;
                if scratch[cut].0 == scratch[cut - 1].0 {
                    continue;
                }
                let nl = cut as f64;
                let nr = total - nl;
                let gini = |counts: &[usize], n: f64| {
                    1.0 - counts
                        .iter()
                        .map(|&k| {
                            let p = k as f64 / n;
                            p * p
                        })
                        .sum::<f64>()
                };
                let weighted =
                    (nl * gini(&left_counts, nl) + nr * gini(&right_counts, nr)) / total;
                if best.map_or(true, |(b, _, _)| weighted < b) {
                    let threshold = 0.5 * (scratch[cut - 1].0 + scratch[cut].0);
                    best = Some((weighted, feature, threshold));
                }
            }
        }

        let Some((_, feature, threshold)) = best else {
            return self.leaf(&samples);
        };
        let (left_samples, right_samples): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&i| self.x[i][feature] <= threshold);
        if left_samples.is_empty() || right_samples.is_empty() {
            return self.leaf(&samples);
        }
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { probs: Vec::new() }); // placeholder
        let left = self.build(left_samples, depth + 1, rng);
        let right = self.build(right_samples, depth + 1, rng);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

/// Trains a bagged forest of `trees` gini CART trees.
pub fn rf_train(
    x: &[Vec<f64>],
    y: &[usize],
    num_classes: usize,
    trees: usize,
    max_depth: Option<usize>,
    seed: u64,
) -> Result<RandomForestModel> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Dataset(format!(
            "forest training needs matching non-empty X ({}) and y ({})",
            x.len(),
            y.len()
        )));
    }
    if trees == 0 {
        return Err(Error::Dataset("forest needs at least one tree".into()));
    }
    if y.iter().any(|&c| c >= num_classes) {
        return Err(Error::Dataset("label outside the class range".into()));
    }
    let num_features = x[0].len();
    let m_try = ((num_features as f64).sqrt().floor() as usize).max(1);
    let forest = (0..trees)
        .map(|t| {
            let mut rng = stream_rng(seed, STREAM_TREE + t as u64);
            let bootstrap: Vec<usize> = (0..x.len()).map(|_| rng.gen_range(0..x.len())).collect();
            let mut builder = TreeBuilder {
                x,
                y,
                num_classes,
                num_features,
                m_try: m_try.min(num_features),
                max_depth,
                nodes: Vec::new(),
            };
            builder.build(bootstrap, 0, &mut rng);
            Tree {
                nodes: builder.nodes,
            }
        })
        .collect();
    Ok(RandomForestModel {
        trees: forest,
        num_classes,
    })
}

/// Mean of the per-tree leaf class histograms.
pub fn rf_predict_proba(model: &RandomForestModel, x: &[f64]) -> Vec<f64> {
    let mut probs = vec![0.0f64; model.num_classes];
    for tree in &model.trees {
        for (p, q) in probs.iter_mut().zip(tree.predict(x)) {
            *p += q;
        }
    }
    let n = model.trees.len() as f64;
    for p in &mut probs {
        *p /= n;
    }
    probs
}
