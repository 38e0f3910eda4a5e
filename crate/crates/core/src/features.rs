//! Histogram summarization and PCA.
//!
//! Code images are summarized into L1-normalized frequency histograms,
//! either globally or over a non-overlapping block grid, and concatenated
//! into feature vectors. A deterministic PCA (Jacobi eigensolver) backs the
//! dimensionality-reduced pipeline variant.

use std::io::Write;

use crate::encoding::{CodeImage, CodeMap};
use crate::error::{Error, Result};
use crate::num::{real, Real};

/// An L1-normalized frequency histogram over a label domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T: Real> {
    bins: Vec<T>,
}

impl<T: Real> Histogram<T> {
    pub fn bins(&self) -> &[T] {
        &self.bins
    }

    pub fn domain_size(&self) -> usize {
        self.bins.len()
    }
}

/// One homogeneous span of a concatenated feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutSegment {
    pub scale: usize,
    pub layer: usize,
    pub block: Option<(usize, usize)>,
    pub map: CodeMap,
    pub bins: usize,
}

impl LayoutSegment {
    /// Stable column prefix for exports, e.g. `s0_l2` or `s0_l1_b1x0`.
    pub fn column_prefix(&self) -> String {
        match self.block {
            Some((r, c)) => format!("s{}_l{}_b{}x{}", self.scale, self.layer, r, c),
            None => format!("s{}_l{}", self.scale, self.layer),
        }
    }
}

/// A flat feature vector together with the layout that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T: Real> {
    values: Vec<T>,
    layout: Vec<LayoutSegment>,
}

impl<T: Real> FeatureVector<T> {
    pub fn new(values: Vec<T>, layout: Vec<LayoutSegment>) -> Self {
        debug_assert_eq!(layout.iter().map(|s| s.bins).sum::<usize>(), values.len());
        Self { values, layout }
    }

    /// Concatenates parts in the given order.
    pub fn concat(parts: Vec<FeatureVector<T>>) -> Self {
        let mut values = Vec::new();
        let mut layout = Vec::new();
        for p in parts {
            values.extend(p.values);
            layout.extend(p.layout);
        }
        Self { values, layout }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn layout(&self) -> &[LayoutSegment] {
        &self.layout
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Rewrites the scale index on every layout segment.
    pub fn with_scale(mut self, scale: usize) -> Self {
        for seg in &mut self.layout {
            seg.scale = scale;
        }
        self
    }

    /// Column names matching the layout, in order.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.len());
        for seg in &self.layout {
            let prefix = seg.column_prefix();
            for b in 0..seg.bins {
                names.push(format!("{prefix}_{b}"));
            }
        }
        names
    }
}

/// L1-normalized histogram of the mapped codes over the whole valid region.
pub fn histogram<T: Real>(codes: &CodeImage, map: CodeMap) -> Result<Histogram<T>> {
    let (table, bins) = map.bin_table(codes.spec().n);
    region_histogram(codes, &table, bins, 0, codes.width(), 0, codes.height())
}

fn region_histogram<T: Real>(
    codes: &CodeImage,
    table: &[u32],
    bins: usize,
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
) -> Result<Histogram<T>> {
    if x1 <= x0 || y1 <= y0 {
        return Err(Error::EmptyRegion);
    }
    let mut counts = vec![0u64; bins];
    for y in y0..y1 {
        for x in x0..x1 {
            counts[table[codes.get(x, y) as usize] as usize] += 1;
        }
    }
    let total: u64 = ((x1 - x0) * (y1 - y0)) as u64;
    let total_t: T = real(total as f64);
    Ok(Histogram {
        bins: counts
            .into_iter()
            .map(|c| real::<T>(c as f64) / total_t)
            .collect(),
    })
}

/// Concatenation of per-block normalized histograms over a non-overlapping
/// `rows x cols` grid, in row-major block order. Remainder pixels on a
/// non-divisible grid go to the last row/column of blocks.
pub fn multiblock_histogram<T: Real>(
    codes: &CodeImage,
    map: CodeMap,
    grid: (usize, usize),
) -> Result<FeatureVector<T>> {
    let (rows, cols) = grid;
    if rows == 0 || cols == 0 || rows > codes.height() || cols > codes.width() {
        return Err(Error::GridTooFine {
            rows,
            cols,
            width: codes.width(),
            height: codes.height(),
        });
    }
    let (table, bins) = map.bin_table(codes.spec().n);
    let bh = codes.height() / rows;
    let bw = codes.width() / cols;
    let mut values = Vec::with_capacity(rows * cols * bins);
    let mut layout = Vec::with_capacity(rows * cols);
    for br in 0..rows {
        let y0 = br * bh;
        let y1 = if br + 1 == rows {
            codes.height()
        } else {
            (br + 1) * bh
        };
        for bc in 0..cols {
            let x0 = bc * bw;
            let x1 = if bc + 1 == cols {
                codes.width()
            } else {
                (bc + 1) * bw
            };
            let h: Histogram<T> = region_histogram(codes, &table, bins, x0, x1, y0, y1)?;
            values.extend_from_slice(h.bins());
            layout.push(LayoutSegment {
                scale: 0,
                layer: codes.layer(),
                block: Some((br, bc)),
                map,
                bins,
            });
        }
    }
    Ok(FeatureVector::new(values, layout))
}

/// Writes feature rows as CSV: a header describing the layout, then one
/// `label,v0,v1,...` row per sample.
pub fn write_features_csv<T: Real, W: Write>(
    mut w: W,
    columns: &[String],
    rows: &[(String, Vec<T>)],
) -> std::io::Result<()> {
    write!(w, "label")?;
    for c in columns {
        write!(w, ",{c}")?;
    }
    writeln!(w)?;
    for (label, values) in rows {
        write!(w, "{label}")?;
        for v in values {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// A fitted PCA projection.
#[derive(Debug, Clone)]
pub struct PcaTransform<T: Real> {
    mean: Vec<T>,
    /// `k x d`, orthonormal rows, sorted by explained variance.
    components: Vec<Vec<T>>,
    explained_variance_ratio: Vec<T>,
}

impl<T: Real> PcaTransform<T> {
    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.components
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn explained_variance_ratio(&self) -> &[T] {
        &self.explained_variance_ratio
    }
}

const PCA_RANK_TOLERANCE: f64 = 1e-10;

/// Fits a PCA keeping the smallest component count whose cumulative
/// explained variance reaches `retain`.
///
/// When there are fewer samples than dimensions the eigenproblem is solved
/// on the sample Gram matrix instead of the covariance; both routes share
/// the deterministic Jacobi solver. Component signs are fixed so the
/// largest-magnitude entry of each component is positive.
pub fn pca_fit<T: Real>(x: &[Vec<T>], retain: f64) -> Result<PcaTransform<T>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Pca(format!("need at least 2 samples, got {n}")));
    }
    if !(retain > 0.0 && retain <= 1.0) {
        return Err(Error::Pca(format!("retain {retain} outside (0, 1]")));
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|row| row.len() != d) {
        return Err(Error::Pca("ragged or empty sample matrix".into()));
    }

    let mut mean = vec![0.0f64; d];
    for row in x {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v.to_f64().unwrap();
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = x
        .iter()
        .map(|row| {
            row.iter()
                .zip(&mean)
                .map(|(v, m)| v.to_f64().unwrap() - m)
                .collect()
        })
        .collect();

    // eigenpairs of the covariance, via the smaller of the two Gram problems
    let (mut eigvals, mut components): (Vec<f64>, Vec<Vec<f64>>) = if d <= n {
        let mut cov = vec![0.0f64; d * d];
        for row in &centered {
            for i in 0..d {
                for j in i..d {
                    cov[i * d + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                let v = cov[i * d + j] / (n - 1) as f64;
                cov[i * d + j] = v;
                cov[j * d + i] = v;
            }
        }
        let (vals, vecs) = jacobi_eigen(cov, d);
        (vals, vecs)
    } else {
        // gram[i][j] = <x_i, x_j> / (n - 1); nonzero eigenvalues match the
        // covariance and v = X' u / ||X' u||
        let mut gram = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i..n {
                let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                gram[i * n + j] = dot / (n - 1) as f64;
                gram[j * n + i] = gram[i * n + j];
            }
        }
        let (vals, us) = jacobi_eigen(gram, n);
        let vecs: Vec<Vec<f64>> = us
            .iter()
            .zip(&vals)
            .map(|(u, &lambda)| {
                if lambda <= PCA_RANK_TOLERANCE {
                    return vec![0.0; d];
                }
                let mut v = vec![0.0f64; d];
                for (row, &ui) in centered.iter().zip(u) {
                    for (vj, xj) in v.iter_mut().zip(row) {
                        *vj += ui * xj;
                    }
                }
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                for a in &mut v {
                    *a /= norm;
                }
                v
            })
            .collect();
        (vals, vecs)
    };

    // clamp noise-level negatives, establish rank
    for v in &mut eigvals {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = eigvals.iter().sum();
    let scale = eigvals.first().copied().unwrap_or(0.0);
    let rank = eigvals
        .iter()
        .filter(|&&v| v > PCA_RANK_TOLERANCE * scale.max(1.0))
        .count();
    if rank == 0 || total <= 0.0 {
        return Err(Error::Pca("data has rank 0 after centering".into()));
    }

    let mut k = rank;
    let mut cumulative = 0.0;
    for (i, &v) in eigvals.iter().take(rank).enumerate() {
        cumulative += v / total;
        if cumulative >= retain - 1e-12 {
            k = i + 1;
            break;
        }
    }

    components.truncate(k);
    eigvals.truncate(k);
    for comp in &mut components {
        let (best, _) = comp
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |(bi, bv), (i, &v)| {
                if v.abs() > bv {
                    (i, v.abs())
                } else {
                    (bi, bv)
                }
            });
        if comp[best] < 0.0 {
            for v in comp.iter_mut() {
                *v = -*v;
            }
        }
    }

    Ok(PcaTransform {
        mean: mean.into_iter().map(real::<T>).collect(),
        components: components
            .into_iter()
            .map(|c| c.into_iter().map(real::<T>).collect())
            .collect(),
        explained_variance_ratio: eigvals.into_iter().map(|v| real::<T>(v / total)).collect(),
    })
}

/// Projects a vector onto the fitted components.
pub fn pca_apply<T: Real>(t: &PcaTransform<T>, x: &[T]) -> Result<Vec<T>> {
    if x.len() != t.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: t.input_dim(),
            got: x.len(),
        });
    }
    Ok(t.components
        .iter()
        .map(|comp| {
            comp.iter()
                .zip(x.iter().zip(&t.mean))
                .map(|(c, (v, m))| *c * (*v - *m))
                .sum()
        })
        .collect())
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues (descending) and matching unit eigenvectors.
fn jacobi_eigen(mut a: Vec<f64>, m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut v = vec![0.0f64; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    let scale = (0..m)
        .map(|i| a[i * m + i].abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..m {
            for q in (p + 1)..m {
                off = off.max(a[p * m + q].abs());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                for k in 0..m {
                    let vkp = v[k * m + p];
                    let vkq = v[k * m + q];
                    v[k * m + p] = c * vkp - s * vkq;
                    v[k * m + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        a[j * m + j]
            .partial_cmp(&a[i * m + i])
            .expect("finite eigenvalues")
    });
    let vals = order.iter().map(|&i| a[i * m + i]).collect();
    let vecs = order
        .iter()
        .map(|&i| (0..m).map(|k| v[k * m + i]).collect())
        .collect();
    (vals, vecs)
}
