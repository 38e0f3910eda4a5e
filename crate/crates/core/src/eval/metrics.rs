//! Classification metrics and the chi-square nearest-neighbor classifier.

/// Chi-square histogram distance `sum (a-b)^2 / (a+b+eps)`.
pub fn chi2_distance(a: &[f64], b: &[f64]) -> f64 {
    const EPS: f64 = 1e-12;
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d / (x + y + EPS)
        })
        .sum()
}

/// One-hot class probabilities at the chi-square nearest neighbor.
/// Distance ties resolve toward the lowest sample index.
pub fn one_nn_chi2(
    train_x: &[Vec<f64>],
    train_y: &[usize],
    num_classes: usize,
    x: &[f64],
) -> Vec<f64> {
    debug_assert!(!train_x.is_empty());
    let mut best = (0usize, f64::INFINITY);
    for (i, t) in train_x.iter().enumerate() {
        let d = chi2_distance(t, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    let mut probs = vec![0.0; num_classes];
    probs[train_y[best.0]] = 1.0;
    probs
}

/// Percentile position of the true class in the confidence ranking:
/// 0 when the truth has the uniquely highest probability, 100 when uniquely
/// lowest. Ties contribute half a position.
pub fn class_rank(probs: &[f64], truth: usize, num_classes: usize) -> f64 {
    debug_assert!(num_classes >= 2 && probs.len() == num_classes);
    let p = probs[truth];
    let higher = probs.iter().filter(|&&q| q > p).count() as f64;
    let equal_others = probs
        .iter()
        .enumerate()
        .filter(|(i, &q)| *i != truth && q == p)
        .count() as f64;
    let rank = higher + 0.5 * equal_others;
    100.0 * rank / (num_classes as f64 - 1.0)
}
