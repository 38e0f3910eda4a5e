//! Orderings over LBP codes: the generalized binarization functions that let
//! the encoder digest its own output.
//!
//! An [`Ordering`] assigns every code in a `2^n` space a rank; codes sharing
//! a rank form an equivalence class, and deeper encoding layers compare ranks
//! instead of intensities. Two construction routes are provided:
//!
//! * embedding a user-defined code dissimilarity (Hamming or its
//!   rotation-invariant variant) into a scalar coordinate via classical
//!   multidimensional scaling, and
//! * lexicographic ranking over integer code-description features, with an
//!   optional greedy oracle-driven search for the feature arrangement.

use serde::{Deserialize, Serialize};

use crate::encoding::{circular_transitions, ror, Code};
use crate::error::{Error, Result};

/// A total preorder over the codes of an `n`-bit space: one rank per code.
///
/// Ranks are dense: every value in `[0, num_classes)` occurs at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering {
    bits: u32,
    ranks: Vec<u32>,
    num_classes: u32,
    provenance: String,
}

/// Serialized form: `{"n": .., "ranks": [..], "provenance": ".."}`.
#[derive(Serialize, Deserialize)]
struct OrderingRepr {
    n: u32,
    ranks: Vec<u32>,
    provenance: String,
}

impl Serialize for Ordering {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OrderingRepr {
            n: self.bits,
            ranks: self.ranks.clone(),
            provenance: self.provenance.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ordering {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = OrderingRepr::deserialize(d)?;
        Ordering::from_ranks(repr.n, repr.ranks, repr.provenance).map_err(serde::de::Error::custom)
    }
}

impl Ordering {
    /// Builds an ordering from explicit ranks, validating density.
    pub fn from_ranks(bits: u32, ranks: Vec<u32>, provenance: impl Into<String>) -> Result<Self> {
        let expected = 1usize
            .checked_shl(bits)
            .filter(|_| (2..=16).contains(&bits))
            .ok_or_else(|| Error::InvalidOrdering(format!("bits = {bits} outside [2, 16]")))?;
        if ranks.len() != expected {
            return Err(Error::OrderingSizeMismatch {
                expected,
                got: ranks.len(),
            });
        }
        let max = *ranks.iter().max().expect("non-empty");
        let mut seen = vec![false; max as usize + 1];
        for &r in &ranks {
            seen[r as usize] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidOrdering(
                "ranks are not dense: some value in [0, max] never occurs".into(),
            ));
        }
        Ok(Self {
            bits,
            ranks,
            num_classes: max + 1,
            provenance: provenance.into(),
        })
    }

    /// Ranks each code by its own value: the natural integer order.
    pub fn identity(bits: u32) -> Self {
        let ranks: Vec<u32> = (0..1u32 << bits).collect();
        Self {
            bits,
            num_classes: ranks.len() as u32,
            ranks,
            provenance: "identity".into(),
        }
    }

    /// Dense-ranks arbitrary integer keys (equal keys share a rank).
    pub fn from_keys(bits: u32, keys: &[i64], provenance: impl Into<String>) -> Result<Self> {
        let mut sorted: Vec<i64> = keys.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let ranks = keys
            .iter()
            .map(|k| sorted.binary_search(k).unwrap() as u32)
            .collect();
        Self::from_ranks(bits, ranks, provenance)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn num_codes(&self) -> usize {
        self.ranks.len()
    }

    pub fn num_classes(&self) -> u32 {
        self.num_classes
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    #[inline]
    pub fn rank(&self, c: Code) -> u32 {
        self.ranks[c as usize]
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }
}

/// Hamming distance: number of differing bits.
#[inline]
pub fn hamming(c1: Code, c2: Code) -> u32 {
    (c1 ^ c2).count_ones()
}

/// Rotation-invariant Hamming distance: minimum Hamming distance over all
/// circular rotations of `c1`.
pub fn ri_hamming(c1: Code, c2: Code, n: u32) -> u32 {
    (0..n).map(|s| hamming(ror(c1, s, n), c2)).min().unwrap()
}

/// A symmetric, nonnegative, zero-diagonal dissimilarity over all codes.
#[derive(Debug, Clone)]
pub struct DissimilarityMatrix {
    size: usize,
    d: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Builds the matrix by evaluating `f(i, j)` on every pair; `f` must be
    /// symmetric and zero on the diagonal.
    pub fn from_fn(size: usize, mut f: impl FnMut(Code, Code) -> f64) -> Result<Self> {
        let mut d = vec![0.0; size * size];
        for i in 0..size {
            for j in i..size {
                let v = f(i as Code, j as Code);
                if !(v >= 0.0) {
                    return Err(Error::InvalidOrdering(format!(
                        "dissimilarity d({i}, {j}) = {v} is negative or NaN"
                    )));
                }
                if i == j && v != 0.0 {
                    return Err(Error::InvalidOrdering(format!(
                        "dissimilarity d({i}, {i}) = {v} on the diagonal"
                    )));
                }
                d[i * size + j] = v;
                d[j * size + i] = v;
            }
        }
        Ok(Self { size, d })
    }

    /// Pairwise Hamming distances over an `n`-bit code space.
    pub fn hamming(n: u32) -> Self {
        let size = 1usize << n;
        Self::from_fn(size, |a, b| hamming(a, b) as f64).expect("hamming is a metric")
    }

    /// Pairwise rotation-invariant Hamming distances.
    pub fn ri_hamming(n: u32) -> Self {
        let size = 1usize << n;
        Self::from_fn(size, |a, b| ri_hamming(a, b, n) as f64)
            .expect("ri-hamming is symmetric and zero on the diagonal")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.size + j]
    }
}

const POWER_ITERATIONS: usize = 1000;
const POWER_TOLERANCE: f64 = 1e-12;
const TIE_THRESHOLD: f64 = 1e-9;

/// Embeds a dissimilarity into a scalar coordinate by classical MDS and
/// ranks the codes along it.
///
/// The Gram matrix is the double-centered `-d^2 / 2`; its dominant
/// eigenvector (deterministic shifted power iteration, fixed start) is the
/// first principal coordinate. The coordinate is unit-normalized, its sign
/// fixed so the correlation with popcount is nonnegative, and entries closer
/// than `1e-9` are merged into one equivalence class.
pub fn ordering_from_dissimilarity(d: &DissimilarityMatrix) -> Result<Ordering> {
    let m = d.size();
    let bits = (m.trailing_zeros()).max(2);
    if m != 1usize << bits {
        return Err(Error::InvalidOrdering(format!(
            "dissimilarity size {m} is not a power of two code space"
        )));
    }

    // B = -1/2 J d^2 J with J = I - 11'/m
    let mut b = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            let v = d.get(i, j);
            b[i * m + j] = -0.5 * v * v;
        }
    }
    double_center(&mut b, m);

    let coord = dominant_eigenvector(&b, m);
    let scale = coord.iter().map(|v| v * v).sum::<f64>().sqrt();

    if scale <= POWER_TOLERANCE {
        // degenerate: every pair is equidistant at zero, one equivalence class
        return Ordering::from_ranks(bits, vec![0; m], "similarity:degenerate");
    }

    let mut coord: Vec<f64> = coord.iter().map(|v| v / scale).collect();

    // sign convention: nonnegative correlation with the number of ones
    let mean_pop = (0..m).map(|c| (c as u32).count_ones() as f64).sum::<f64>() / m as f64;
    let corr: f64 = coord
        .iter()
        .enumerate()
        .map(|(c, v)| v * ((c as u32).count_ones() as f64 - mean_pop))
        .sum();
    let flip = if corr < 0.0 {
        true
    } else if corr > 0.0 {
        false
    } else {
        coord.iter().find(|v| **v != 0.0).is_some_and(|v| *v < 0.0)
    };
    if flip {
        for v in &mut coord {
            *v = -*v;
        }
    }

    // dense ranks with ties merged at the threshold
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| coord[a].partial_cmp(&coord[b]).expect("finite coordinate"));
    let mut ranks = vec![0u32; m];
    let mut class = 0u32;
    let mut prev = coord[order[0]];
    for &idx in &order {
        if coord[idx] - prev > TIE_THRESHOLD {
            class += 1;
        }
        ranks[idx] = class;
        prev = coord[idx];
    }
    Ordering::from_ranks(bits, ranks, "similarity:mds")
}

fn double_center(b: &mut [f64], m: usize) {
    let mut row_mean = vec![0.0f64; m];
    let mut col_mean = vec![0.0f64; m];
    let mut grand = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let v = b[i * m + j];
            row_mean[i] += v;
            col_mean[j] += v;
            grand += v;
        }
    }
    for v in &mut row_mean {
        *v /= m as f64;
    }
    for v in &mut col_mean {
        *v /= m as f64;
    }
    grand /= (m * m) as f64;
    for i in 0..m {
        for j in 0..m {
            b[i * m + j] += grand - row_mean[i] - col_mean[j];
        }
    }
}

fn mat_vec(b: &[f64], m: usize, v: &[f64]) -> Vec<f64> {
    (0..m)
        .map(|i| {
            let row = &b[i * m..(i + 1) * m];
            row.iter().zip(v).map(|(a, x)| a * x).sum()
        })
        .collect()
}

/// Power iteration on `B + sigma I` with a Gershgorin shift, so the iteration
/// converges toward the algebraically largest eigenvalue of `B` even when a
/// negative eigenvalue dominates in magnitude.
///
/// The start vector is `B * u` for a fixed probe `u`: identical rows of `B`
/// then carry bitwise-equal entries through every iteration, so codes with
/// zero dissimilarity embed identically regardless of convergence. Returns
/// the eigenvector scaled by the (unshifted) eigenvalue, so a zero spectrum
/// yields a zero vector.
fn dominant_eigenvector(b: &[f64], m: usize) -> Vec<f64> {
    let sigma = (0..m)
        .map(|i| (0..m).map(|j| b[i * m + j].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    if sigma == 0.0 {
        return vec![0.0; m];
    }

    let probes: [fn(usize) -> f64; 3] = [
        |i| i as f64 + 1.0,
        |i| ((i * i) % 31) as f64,
        |i| if i % 2 == 0 { 1.0 } else { -1.0 },
    ];
    let mut v = Vec::new();
    for probe in probes {
        let u: Vec<f64> = (0..m).map(probe).collect();
        v = mat_vec(b, m, &u);
        if normalize(&mut v) > 0.0 {
            break;
        }
    }
    if v.iter().all(|&x| x == 0.0) {
        return vec![0.0; m];
    }

    let mut lambda = 0.0f64;
    for _ in 0..POWER_ITERATIONS {
        let mut w = mat_vec(b, m, &v);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += sigma * vi;
        }
        let norm = normalize(&mut w);
        lambda = norm - sigma;
        let delta = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        v = w;
        if delta < POWER_TOLERANCE {
            break;
        }
    }
    v.iter().map(|x| x * lambda).collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Integer code-description features, one column per scoring ranker.
#[derive(Debug, Clone)]
pub struct CodeFeatureTable {
    names: Vec<String>,
    /// `values[code][feature]`
    values: Vec<Vec<i64>>,
}

impl CodeFeatureTable {
    /// Builds a table from custom scoring rankers: one row per code of a
    /// power-of-two space, one named integer column per ranker.
    pub fn from_columns(names: Vec<String>, values: Vec<Vec<i64>>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidOrdering("feature table has no columns".into()));
        }
        if !values.len().is_power_of_two() || values.len() < 4 {
            return Err(Error::InvalidOrdering(format!(
                "feature table covers {} codes, expected a power of two >= 4",
                values.len()
            )));
        }
        if values.iter().any(|row| row.len() != names.len()) {
            return Err(Error::InvalidOrdering(
                "feature rows do not match the column names".into(),
            ));
        }
        Ok(Self { names, values })
    }

    pub fn num_features(&self) -> usize {
        self.names.len()
    }

    pub fn num_codes(&self) -> usize {
        self.values.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }

    pub fn value(&self, code: Code, feature: usize) -> i64 {
        self.values[code as usize][feature]
    }

    pub fn row(&self, code: Code) -> &[i64] {
        &self.values[code as usize]
    }
}

/// Circular run lengths of the `n`-bit word `c`, in scan order.
fn circular_runs(c: Code, n: u32) -> Vec<u32> {
    let bit = |i: u32| (c >> (i % n)) & 1;
    // start at the first position after a transition so runs never wrap
    let start = match (0..n).find(|&i| bit(i) != bit((i + n - 1) % n)) {
        Some(s) => s,
        None => return vec![n], // flat pattern: one run covering everything
    };
    let mut runs = Vec::new();
    let mut len = 1u32;
    for k in 1..n {
        if bit(start + k) == bit(start + k - 1) {
            len += 1;
        } else {
            runs.push(len);
            len = 1;
        }
    }
    runs.push(len);
    runs
}

/// Canonical feature-column names, usable on the command line.
pub const FEATURE_NAMES: [&str; 7] = [
    "unit-runs",
    "transitions",
    "smallest-run",
    "largest-run",
    "run-diversity",
    "ones",
    "imbalance",
];

/// Computes the code-description features for every code of an `n`-bit space.
///
/// All features are circular: number of length-1 runs (`101`/`010` motifs),
/// number of transitions, smallest and largest run size, run-size diversity
/// (distinct run lengths), number of ones, and the 0/1 imbalance
/// `|2*ones - n|`.
pub fn code_features(n: u32) -> Result<CodeFeatureTable> {
    if !(2..=16).contains(&n) {
        return Err(Error::InvalidNeighborhood(format!(
            "n = {n} outside [2, 16]"
        )));
    }
    let size = 1usize << n;
    let mut values = Vec::with_capacity(size);
    for c in 0..size as Code {
        let runs = circular_runs(c, n);
        let unit_runs = runs.iter().filter(|&&r| r == 1).count() as i64;
        let transitions = circular_transitions(c, n) as i64;
        let smallest = *runs.iter().min().unwrap() as i64;
        let largest = *runs.iter().max().unwrap() as i64;
        let mut distinct = runs.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let diversity = distinct.len() as i64;
        let ones = c.count_ones() as i64;
        let imbalance = (2 * ones - n as i64).abs();
        values.push(vec![
            unit_runs,
            transitions,
            smallest,
            largest,
            diversity,
            ones,
            imbalance,
        ]);
    }
    Ok(CodeFeatureTable {
        names: FEATURE_NAMES.iter().map(|n| n.to_string()).collect(),
        values,
    })
}

/// Lexicographic comparison of two equal-length score sequences.
///
/// Empty sequences compare equal; otherwise the first differing position
/// decides.
pub fn lex_rank(a: &[i64], b: &[i64]) -> Result<std::cmp::Ordering> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Equal => continue,
            decided => return Ok(decided),
        }
    }
    Ok(std::cmp::Ordering::Equal)
}

/// Ranks all codes lexicographically over the selected feature columns.
///
/// Codes with identical selected feature vectors share a rank; an empty
/// arrangement yields a single class.
pub fn ordering_from_lex(features: &CodeFeatureTable, arrangement: &[usize]) -> Result<Ordering> {
    for (pos, &idx) in arrangement.iter().enumerate() {
        if idx >= features.num_features() {
            return Err(Error::FeatureIndexOutOfRange {
                index: idx,
                count: features.num_features(),
            });
        }
        if arrangement[..pos].contains(&idx) {
            return Err(Error::DuplicateFeature(idx));
        }
    }
    let m = features.num_codes();
    let bits = m.trailing_zeros();
    let keys: Vec<Vec<i64>> = (0..m as Code)
        .map(|c| arrangement.iter().map(|&f| features.value(c, f)).collect())
        .collect();
    let mut sorted: Vec<&Vec<i64>> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    let ranks: Vec<u32> = keys
        .iter()
        .map(|k| sorted.binary_search(&k).unwrap() as u32)
        .collect();
    let names: Vec<&str> = arrangement
        .iter()
        .map(|&f| features.names[f].as_str())
        .collect();
    Ordering::from_ranks(bits, ranks, format!("lex:[{}]", names.join(",")))
}

/// Performance oracle for a candidate feature arrangement.
///
/// Implementations must be pure functions of the arrangement (and their own
/// frozen configuration), so candidate evaluations may run in any order.
pub trait ArrangementOracle {
    fn evaluate(&self, arrangement: &[usize]) -> Result<f64>;
}

impl<F: Fn(&[usize]) -> Result<f64>> ArrangementOracle for F {
    fn evaluate(&self, arrangement: &[usize]) -> Result<f64> {
        self(arrangement)
    }
}

/// Greedy construction of a feature arrangement.
///
/// Starting from the empty arrangement, each step appends the unused feature
/// whose appended arrangement maximizes the oracle (ties resolved toward the
/// lowest feature index) and stops at `max_depth` or as soon as no candidate
/// strictly improves on the current score.
pub fn greedy_lex_search(
    features: &CodeFeatureTable,
    oracle: &dyn ArrangementOracle,
    max_depth: usize,
) -> Result<Vec<usize>> {
    let mut arrangement: Vec<usize> = Vec::new();
    let mut best = oracle.evaluate(&arrangement)?;
    while arrangement.len() < max_depth.min(features.num_features()) {
        let mut step_best: Option<(usize, f64)> = None;
        for f in 0..features.num_features() {
            if arrangement.contains(&f) {
                continue;
            }
            let mut candidate = arrangement.clone();
            candidate.push(f);
            let score = oracle.evaluate(&candidate)?;
            if step_best.map_or(true, |(_, s)| score > s) {
                step_best = Some((f, score));
            }
        }
        match step_best {
            Some((f, score)) if score > best => {
                arrangement.push(f);
                best = score;
            }
            _ => break,
        }
    }
    Ok(arrangement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering as Cmp;

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(0b0000, 0b1111), 4);
        assert_eq!(hamming(0b1010, 0b1010), 0);
        assert_eq!(hamming(0b0101, 0b0110), 2);
    }

    #[test]
    fn ri_hamming_examples() {
        assert_eq!(ri_hamming(0b0001, 0b0100, 4), 0);
        assert_eq!(ri_hamming(0b0000, 0b1111, 4), 4);
        assert_eq!(ri_hamming(0b0011, 0b0101, 4), 2);
    }

    #[test]
    fn ri_hamming_rotation_invariant_exhaustive() {
        for n in [4u32, 6, 8] {
            for c1 in 0..(1u32 << n) {
                for c2 in (0..(1u32 << n)).step_by(7) {
                    let base = ri_hamming(c1, c2, n);
                    for s in 0..n {
                        assert_eq!(ri_hamming(ror(c1, s, n), c2, n), base);
                    }
                }
            }
        }
    }

    #[test]
    fn ordering_validation() {
        assert!(Ordering::from_ranks(2, vec![0, 1, 2, 3], "t").is_ok());
        assert!(Ordering::from_ranks(2, vec![0, 2, 2, 3], "t").is_err()); // 1 missing
        assert!(Ordering::from_ranks(2, vec![0, 1, 1], "t").is_err()); // wrong size
        let ord = Ordering::from_ranks(2, vec![1, 0, 1, 1], "t").unwrap();
        assert_eq!(ord.num_classes(), 2);
    }

    #[test]
    fn ordering_json_round_trip() {
        let ord = Ordering::from_keys(2, &[5, -1, 5, 9], "keys").unwrap();
        let json = serde_json::to_string(&ord).unwrap();
        assert!(json.starts_with("{\"n\":2,\"ranks\":[1,0,1,2],"));
        let back: Ordering = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ord);
    }

    #[test]
    fn two_block_dissimilarity_gives_two_classes() {
        // codes 0..3 form one cluster, 4..7 the other
        let d = DissimilarityMatrix::from_fn(8, |a, b| {
            if (a < 4) == (b < 4) {
                0.0
            } else {
                1.0
            }
        })
        .unwrap();
        let ord = ordering_from_dissimilarity(&d).unwrap();
        assert_eq!(ord.num_classes(), 2);
        for c in 0..4u32 {
            assert_eq!(ord.rank(c), ord.rank(0));
            assert_eq!(ord.rank(c + 4), ord.rank(4));
        }
        assert_ne!(ord.rank(0), ord.rank(4));
    }

    #[test]
    fn zero_dissimilarity_degenerates_to_one_class() {
        let d = DissimilarityMatrix::from_fn(4, |_, _| 0.0).unwrap();
        let ord = ordering_from_dissimilarity(&d).unwrap();
        assert_eq!(ord.num_classes(), 1);
    }

    #[test]
    fn ri_hamming_ordering_merges_rotation_classes() {
        let d = DissimilarityMatrix::ri_hamming(8);
        let ord = ordering_from_dissimilarity(&d).unwrap();
        for c in 0..256u32 {
            for s in 0..8 {
                assert_eq!(ord.rank(c), ord.rank(ror(c, s, 8)));
            }
        }
    }

    #[test]
    fn mds_ordering_is_deterministic() {
        let d = DissimilarityMatrix::hamming(6);
        let a = ordering_from_dissimilarity(&d).unwrap();
        let b = ordering_from_dissimilarity(&d).unwrap();
        assert_eq!(a, b);
        assert!(a.num_classes() > 1);
    }

    #[test]
    fn mds_coordinate_correlates_with_popcount() {
        let d = DissimilarityMatrix::hamming(4);
        let ord = ordering_from_dissimilarity(&d).unwrap();
        // with the sign convention, all-zeros ranks below all-ones
        assert!(ord.rank(0b0000) < ord.rank(0b1111));
    }

    #[test]
    fn code_feature_examples() {
        let t = code_features(8).unwrap();
        let f = |name: &str| t.feature_index(name).unwrap();
        // flat pattern
        assert_eq!(t.value(0, f("transitions")), 0);
        assert_eq!(t.value(0, f("largest-run")), 8);
        assert_eq!(t.value(0, f("ones")), 0);
        assert_eq!(t.value(0, f("imbalance")), 8);
        // alternating pattern
        assert_eq!(t.value(0b0101_0101, f("transitions")), 8);
        assert_eq!(t.value(0b0101_0101, f("ones")), 4);
        assert_eq!(t.value(0b0101_0101, f("unit-runs")), 8);
        assert_eq!(t.value(0b0101_0101, f("imbalance")), 0);
        // half-and-half
        assert_eq!(t.value(0b0000_1111, f("transitions")), 2);
        assert_eq!(t.value(0b0000_1111, f("smallest-run")), 4);
        assert_eq!(t.value(0b0000_1111, f("largest-run")), 4);
        assert_eq!(t.value(0b0000_1111, f("run-diversity")), 1);
    }

    #[test]
    fn circular_runs_wrap() {
        // 1100_0011 circularly is a run of 4 ones and a run of 4 zeros
        assert_eq!(circular_runs(0b1100_0011, 8), vec![4, 4]);
        assert_eq!(circular_runs(0b0000_0000, 8), vec![8]);
        assert_eq!(circular_runs(0b1111_1111, 8), vec![8]);
        assert_eq!(circular_runs(0b0000_0001, 8), vec![1, 7]);
    }

    #[test]
    fn lex_rank_examples() {
        assert_eq!(lex_rank(&[], &[]).unwrap(), Cmp::Equal);
        assert_eq!(lex_rank(&[1, 2], &[1, 3]).unwrap(), Cmp::Less);
        assert_eq!(lex_rank(&[2, 0], &[1, 9]).unwrap(), Cmp::Greater);
        assert!(matches!(
            lex_rank(&[1], &[1, 2]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn lex_ordering_by_transitions_has_five_classes() {
        let t = code_features(8).unwrap();
        let ord = ordering_from_lex(&t, &[t.feature_index("transitions").unwrap()]).unwrap();
        assert_eq!(ord.num_classes(), 5);
    }

    #[test]
    fn empty_arrangement_is_one_class() {
        let t = code_features(8).unwrap();
        let ord = ordering_from_lex(&t, &[]).unwrap();
        assert_eq!(ord.num_classes(), 1);
    }

    #[test]
    fn duplicate_arrangement_rejected() {
        let t = code_features(8).unwrap();
        assert!(matches!(
            ordering_from_lex(&t, &[1, 1]),
            Err(Error::DuplicateFeature(1))
        ));
        assert!(matches!(
            ordering_from_lex(&t, &[99]),
            Err(Error::FeatureIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn lex_ordering_consistent_with_lex_rank() {
        let t = code_features(6).unwrap();
        let arrangement = [1usize, 3, 6];
        let ord = ordering_from_lex(&t, &arrangement).unwrap();
        let key =
            |c: Code| -> Vec<i64> { arrangement.iter().map(|&f| t.value(c, f)).collect() };
        for a in 0..64u32 {
            for b in 0..64u32 {
                let by_rank = ord.rank(a).cmp(&ord.rank(b));
                let by_lex = lex_rank(&key(a), &key(b)).unwrap();
                assert_eq!(by_rank, by_lex, "codes {a} and {b}");
            }
        }
    }

    #[test]
    fn rotation_invariant_features_propagate_invariance() {
        // every feature except none is circular, so any arrangement of them
        // must give equal ranks to all rotations of any code
        let t = code_features(8).unwrap();
        let ord = ordering_from_lex(&t, &[0, 1, 2, 3, 4, 5, 6]).unwrap();
        for c in 0..256u32 {
            for s in 0..8 {
                assert_eq!(ord.rank(c), ord.rank(ror(c, s, 8)));
            }
        }
    }

    #[test]
    fn greedy_stops_on_constant_oracle() {
        let t = code_features(8).unwrap();
        let oracle = |_: &[usize]| Ok(0.5);
        let arrangement = greedy_lex_search(&t, &oracle, 3).unwrap();
        assert!(arrangement.is_empty());
    }

    #[test]
    fn greedy_prefers_transitions_when_it_scores_best() {
        let t = code_features(8).unwrap();
        let transitions = t.feature_index("transitions").unwrap();
        let oracle = move |a: &[usize]| {
            Ok(match a.first() {
                None => 0.1,
                Some(&f) if f == transitions => 0.9,
                Some(_) => 0.3,
            })
        };
        let arrangement = greedy_lex_search(&t, &oracle, 2).unwrap();
        assert_eq!(arrangement.first(), Some(&transitions));
    }

    #[test]
    fn greedy_on_single_feature_table_is_bounded() {
        let values: Vec<Vec<i64>> = (0..8).map(|c: i64| vec![c % 3]).collect();
        let t = CodeFeatureTable::from_columns(vec!["mod3".into()], values).unwrap();
        let oracle = |a: &[usize]| Ok(a.len() as f64);
        let arrangement = greedy_lex_search(&t, &oracle, 5).unwrap();
        assert!(arrangement.len() <= 1);
        assert_eq!(arrangement, vec![0]);
    }

    #[test]
    fn feature_table_constructor_validates_shape() {
        assert!(CodeFeatureTable::from_columns(vec![], vec![vec![]; 4]).is_err());
        assert!(CodeFeatureTable::from_columns(vec!["a".into()], vec![vec![0]; 3]).is_err());
        assert!(
            CodeFeatureTable::from_columns(vec!["a".into()], vec![vec![0, 1]; 4]).is_err()
        );
    }

    #[test]
    fn greedy_breaks_ties_toward_lowest_index() {
        let t = code_features(8).unwrap();
        let oracle = |a: &[usize]| Ok(if a.is_empty() { 0.0 } else { 1.0 });
        let arrangement = greedy_lex_search(&t, &oracle, 1).unwrap();
        assert_eq!(arrangement, vec![0]);
    }

    #[test]
    fn greedy_respects_call_budget() {
        use std::cell::Cell;
        let t = code_features(8).unwrap();
        let calls = Cell::new(0usize);
        let oracle = |a: &[usize]| {
            calls.set(calls.get() + 1);
            Ok(a.len() as f64)
        };
        let depth = 3;
        greedy_lex_search(&t, &oracle, depth).unwrap();
        // candidate evaluations stay within num_features * depth; one extra
        // call scores the empty baseline
        assert!(calls.get() <= t.num_features() * depth + 1);
    }

    #[test]
    fn ranks_are_transitive_on_random_triples() {
        use rand::{Rng, SeedableRng};
        let t = code_features(8).unwrap();
        let ord = ordering_from_lex(&t, &[1, 5]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let a: Code = rng.gen_range(0..256);
            let b: Code = rng.gen_range(0..256);
            let c: Code = rng.gen_range(0..256);
            if ord.rank(a) <= ord.rank(b) && ord.rank(b) <= ord.rank(c) {
                assert!(ord.rank(a) <= ord.rank(c));
            }
        }
    }

    #[test]
    fn dense_preorder_from_random_keys() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let keys: Vec<i64> = (0..16).map(|_| rng.gen_range(-3..3)).collect();
            let ord = Ordering::from_keys(4, &keys, "random").unwrap();
            let mut distinct: Vec<u32> = ord.ranks().to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            let expected: Vec<u32> = (0..ord.num_classes()).collect();
            assert_eq!(distinct, expected);
        }
    }
}
