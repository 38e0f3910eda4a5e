//! Local binary pattern encoding.
//!
//! A code packs the comparisons of a center pixel against its `n` sampled
//! neighbors: bit `i` is 1 iff the center is strictly below the neighbor at
//! sampling angle `i * 360 / n`, with angle 0 pointing straight up and angles
//! proceeding clockwise. Layer 1 compares raw intensities; deeper layers
//! compare code ranks under a learned [`Ordering`](crate::ordering::Ordering).
//!
//! Border pixels whose neighborhood would leave the image are cropped, so
//! every encoding pass shrinks the valid region by `ceil(r)` on each side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gray::GrayImage;
use crate::num::{real, Real};
use crate::ordering::Ordering;

/// An LBP code: an unsigned integer in `[0, 2^n)`.
pub type Code = u32;

/// Distance metric shaping the neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Neighbors on a Euclidean circle of radius `r`.
    EuclideanCircle,
    /// Neighbors on the axis-aligned square of half-width `r`, at the
    /// rounded angular positions.
    ManhattanSquare,
}

/// How off-lattice sampling positions are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Bilinear interpolation of the four surrounding pixels.
    Bilinear,
    /// Rounding to the nearest pixel center.
    Nearest,
}

/// Sampling geometry: neighbor count, radius, metric, and interpolation mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborhoodSpec {
    pub n: u32,
    pub r: f64,
    pub metric: Metric,
    pub sampling: Sampling,
}

/// Positions within this distance of a lattice point are snapped onto it, so
/// cardinal neighbors are read exactly instead of through a degenerate
/// interpolation contaminated by trig rounding.
const LATTICE_SNAP: f64 = 1e-6;

impl NeighborhoodSpec {
    pub fn new(n: u32, r: f64, metric: Metric, sampling: Sampling) -> Result<Self> {
        if !(2..=16).contains(&n) {
            return Err(Error::InvalidNeighborhood(format!(
                "n = {n} outside [2, 16]"
            )));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidNeighborhood(format!("radius {r} must be positive")));
        }
        Ok(Self {
            n,
            r,
            metric,
            sampling,
        })
    }

    /// Number of distinct codes, `2^n`.
    pub fn num_codes(&self) -> usize {
        1usize << self.n
    }

    /// Pixels cropped from each side of the input: `ceil(r)`.
    pub fn margin(&self) -> usize {
        self.r.ceil() as usize
    }

    /// Floating sampling offsets `(dx, dy)` per neighbor, in image
    /// coordinates (x right, y down). Angle 0 is the "up" neighbor.
    pub fn offsets(&self) -> Vec<(f64, f64)> {
        (0..self.n)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / self.n as f64;
                let (dx, dy) = match self.metric {
                    Metric::EuclideanCircle => (self.r * theta.sin(), -self.r * theta.cos()),
                    Metric::ManhattanSquare => {
                        (self.r * theta.sin().round(), -self.r * theta.cos().round())
                    }
                };
                (snap(dx), snap(dy))
            })
            .collect()
    }

    /// Integer offsets used by nearest sampling.
    pub fn nearest_offsets(&self) -> Vec<(isize, isize)> {
        self.offsets()
            .iter()
            .map(|&(dx, dy)| (dx.round() as isize, dy.round() as isize))
            .collect()
    }

    fn validate_fits(&self, width: usize, height: usize) -> Result<(usize, usize)> {
        let m = self.margin();
        let min_side = 2 * m + 1;
        if width < min_side || height < min_side {
            return Err(Error::ImageTooSmall {
                width,
                height,
                radius: self.r,
                min_side,
            });
        }
        Ok((width - 2 * m, height - 2 * m))
    }
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= LATTICE_SNAP {
        r
    } else {
        v
    }
}

/// Per-pixel LBP codes over the valid region of an encoded input.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeImage {
    width: usize,
    height: usize,
    data: Vec<Code>,
    spec: NeighborhoodSpec,
    layer: usize,
}

impl CodeImage {
    /// Wraps raw code data. All values must be below `2^spec.n` and `layer`
    /// must be at least 1.
    pub fn from_raw(
        width: usize,
        height: usize,
        data: Vec<Code>,
        spec: NeighborhoodSpec,
        layer: usize,
    ) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "code image {width}x{height} with {} values",
                data.len()
            )));
        }
        if layer == 0 {
            return Err(Error::InvalidImage("layer index starts at 1".into()));
        }
        let limit = spec.num_codes() as Code;
        if data.iter().any(|&c| c >= limit) {
            return Err(Error::InvalidImage(format!(
                "code value out of range for {}-bit space",
                spec.n
            )));
        }
        Ok(Self {
            width,
            height,
            data,
            spec,
            layer,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[Code] {
        &self.data
    }

    pub fn spec(&self) -> &NeighborhoodSpec {
        &self.spec
    }

    /// Depth index; 1 is the first (shallow) layer.
    pub fn layer(&self) -> usize {
        self.layer
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Code {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x]
    }
}

/// Per-neighbor ternary comparisons (`-1`, `0`, `+1`) over the valid region.
#[derive(Debug, Clone, PartialEq)]
pub struct TernaryImage {
    width: usize,
    height: usize,
    n: u32,
    data: Vec<i8>,
}

impl TernaryImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn neighbors(&self) -> u32 {
        self.n
    }

    /// The `n` comparison values of the pixel at `(x, y)`.
    pub fn get(&self, x: usize, y: usize) -> &[i8] {
        let n = self.n as usize;
        let base = (y * self.width + x) * n;
        &self.data[base..base + n]
    }

    pub fn data(&self) -> &[i8] {
        &self.data
    }
}

/// Strict intensity comparison: 1 iff `x_ref < x_i`.
#[inline]
pub fn binarize<T: Real>(x_ref: T, x_i: T) -> u32 {
    u32::from(x_ref < x_i)
}

#[inline]
fn lerp<T: Real>(a: T, b: T, t: T) -> T {
    // exact on equal endpoints and at t = 0
    a + t * (b - a)
}

#[inline]
fn bilinear<T: Real>(img: &GrayImage<T>, px: f64, py: f64) -> T {
    let x0 = px.floor();
    let y0 = py.floor();
    let fx = px - x0;
    let fy = py - y0;
    let xi = x0 as usize;
    let yi = y0 as usize;
    let x1 = (xi + 1).min(img.width() - 1);
    let y1 = (yi + 1).min(img.height() - 1);
    let top = lerp(img.get(xi, yi), img.get(x1, yi), real(fx));
    let bottom = lerp(img.get(xi, y1), img.get(x1, y1), real(fx));
    lerp(top, bottom, real(fy))
}

/// Intensities at the `n` sampling positions around `(x, y)`.
///
/// `(x, y)` must lie inside the valid region (at least `ceil(r)` from every
/// border).
pub fn sample_neighbors<T: Real>(
    img: &GrayImage<T>,
    spec: &NeighborhoodSpec,
    x: usize,
    y: usize,
) -> Vec<T> {
    let m = spec.margin();
    assert!(
        x >= m && y >= m && x + m < img.width() && y + m < img.height(),
        "({x}, {y}) outside the valid region of a {}x{} image with margin {m}",
        img.width(),
        img.height()
    );
    match spec.sampling {
        Sampling::Bilinear => spec
            .offsets()
            .iter()
            .map(|&(dx, dy)| {
                let px = x as f64 + dx;
                let py = y as f64 + dy;
                if px.fract() == 0.0 && py.fract() == 0.0 {
                    img.get(px as usize, py as usize)
                } else {
                    bilinear(img, px, py)
                }
            })
            .collect(),
        Sampling::Nearest => spec
            .nearest_offsets()
            .iter()
            .map(|&(dx, dy)| {
                img.get(
                    (x as isize + dx) as usize,
                    (y as isize + dy) as usize,
                )
            })
            .collect(),
    }
}

/// Encodes a grayscale image into per-pixel LBP codes (layer 1).
pub fn lbp_encode<T: Real>(img: &GrayImage<T>, spec: &NeighborhoodSpec) -> Result<CodeImage> {
    let (out_w, out_h) = spec.validate_fits(img.width(), img.height())?;
    let m = spec.margin();
    let mut data = Vec::with_capacity(out_w * out_h);
    match spec.sampling {
        Sampling::Bilinear => {
            let offsets = spec.offsets();
            for y in 0..out_h {
                for x in 0..out_w {
                    let cx = x + m;
                    let cy = y + m;
                    let center = img.get(cx, cy);
                    let mut code: Code = 0;
                    for (i, &(dx, dy)) in offsets.iter().enumerate() {
                        let px = cx as f64 + dx;
                        let py = cy as f64 + dy;
                        let v = if px.fract() == 0.0 && py.fract() == 0.0 {
                            img.get(px as usize, py as usize)
                        } else {
                            bilinear(img, px, py)
                        };
                        code |= binarize(center, v) << i;
                    }
                    data.push(code);
                }
            }
        }
        Sampling::Nearest => {
            let offsets = spec.nearest_offsets();
            for y in 0..out_h {
                for x in 0..out_w {
                    let cx = (x + m) as isize;
                    let cy = (y + m) as isize;
                    let center = img.get(cx as usize, cy as usize);
                    let mut code: Code = 0;
                    for (i, &(dx, dy)) in offsets.iter().enumerate() {
                        let v = img.get((cx + dx) as usize, (cy + dy) as usize);
                        code |= binarize(center, v) << i;
                    }
                    data.push(code);
                }
            }
        }
    }
    CodeImage::from_raw(out_w, out_h, data, *spec, 1)
}

/// Re-encodes a code image by comparing code ranks under `ord` (layers >= 2).
///
/// Codes are ordinal, so neighbors are read at the rounded (nearest)
/// positions regardless of `spec.sampling`.
pub fn encode_with_ordering(
    codes: &CodeImage,
    ord: &Ordering,
    spec: &NeighborhoodSpec,
) -> Result<CodeImage> {
    if ord.num_codes() != codes.spec().num_codes() {
        return Err(Error::OrderingSizeMismatch {
            expected: codes.spec().num_codes(),
            got: ord.num_codes(),
        });
    }
    let (out_w, out_h) = spec
        .validate_fits(codes.width(), codes.height())
        .map_err(|e| match e {
            Error::ImageTooSmall {
                width,
                height,
                radius,
                ..
            } => Error::LayerExhausted {
                layer: codes.layer() + 1,
                width,
                height,
                radius,
            },
            other => other,
        })?;
    let m = spec.margin();
    let offsets = spec.nearest_offsets();
    let ranks = ord.ranks();
    let mut data = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        for x in 0..out_w {
            let cx = (x + m) as isize;
            let cy = (y + m) as isize;
            let center_rank = ranks[codes.get(cx as usize, cy as usize) as usize];
            let mut code: Code = 0;
            for (i, &(dx, dy)) in offsets.iter().enumerate() {
                let neighbor_rank =
                    ranks[codes.get((cx + dx) as usize, (cy + dy) as usize) as usize];
                code |= u32::from(center_rank < neighbor_rank) << i;
            }
            data.push(code);
        }
    }
    CodeImage::from_raw(out_w, out_h, data, *spec, codes.layer() + 1)
}

/// Circular right rotation of `c` within an `n`-bit word.
#[inline]
pub fn ror(c: Code, s: u32, n: u32) -> Code {
    let s = s % n;
    if s == 0 {
        return c;
    }
    let mask = ((1u64 << n) - 1) as Code;
    ((c >> s) | (c << (n - s))) & mask
}

/// Minimum over all circular bit-rotations of `c`.
pub fn rotation_invariant_map(c: Code, n: u32) -> Code {
    debug_assert!(c < (1 << n));
    (0..n).map(|s| ror(c, s, n)).min().unwrap_or(c)
}

/// Number of circular 0-1 transitions in the `n`-bit word `c`.
pub fn circular_transitions(c: Code, n: u32) -> u32 {
    (c ^ ror(c, 1, n)).count_ones()
}

/// Number of uniform patterns (codes with at most two circular transitions)
/// in an `n`-bit space: `n(n-1) + 2`.
pub fn uniform_pattern_count(n: u32) -> usize {
    (n as usize) * (n as usize - 1) + 2
}

/// Maps a code to its uniform-pattern label.
///
/// Uniform codes get distinct labels in `[0, U)` (ascending code order);
/// every non-uniform code maps to the single catch-all label `U`, where
/// `U = n(n-1) + 2`. The label space therefore has `U + 1` values.
pub fn uniform_map(c: Code, n: u32) -> u32 {
    debug_assert!(c < (1 << n));
    if circular_transitions(c, n) > 2 {
        return uniform_pattern_count(n) as u32;
    }
    // label = number of uniform codes strictly below c
    (0..c).filter(|&d| circular_transitions(d, n) <= 2).count() as u32
}

/// How codes are grouped into histogram bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeMap {
    /// Every code keeps its own bin: `2^n` bins.
    Raw,
    /// One bin per rotation class (necklace).
    RotationInvariant,
    /// One bin per uniform pattern plus a shared non-uniform bin:
    /// `n(n-1) + 3` bins.
    Uniform,
}

impl CodeMap {
    /// Dense bin index per code, plus the number of bins.
    pub fn bin_table(&self, n: u32) -> (Vec<u32>, usize) {
        let size = 1usize << n;
        match self {
            CodeMap::Raw => ((0..size as u32).collect(), size),
            CodeMap::RotationInvariant => {
                let reps: Vec<Code> = (0..size as Code)
                    .map(|c| rotation_invariant_map(c, n))
                    .collect();
                let mut sorted: Vec<Code> = reps.clone();
                sorted.sort_unstable();
                sorted.dedup();
                let table = reps
                    .iter()
                    .map(|r| sorted.binary_search(r).unwrap() as u32)
                    .collect();
                (table, sorted.len())
            }
            CodeMap::Uniform => {
                let catch_all = uniform_pattern_count(n) as u32;
                let mut next = 0u32;
                let table: Vec<u32> = (0..size as Code)
                    .map(|c| {
                        if circular_transitions(c, n) <= 2 {
                            let label = next;
                            next += 1;
                            label
                        } else {
                            catch_all
                        }
                    })
                    .collect();
                (table, uniform_pattern_count(n) + 1)
            }
        }
    }
}

/// Ternary (three-valued) comparison against a tolerance band of width `2T`.
pub fn ltp_encode<T: Real>(
    img: &GrayImage<T>,
    spec: &NeighborhoodSpec,
    tolerance: T,
) -> Result<TernaryImage> {
    if tolerance < T::zero() {
        return Err(Error::NegativeTolerance(
            tolerance.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let (out_w, out_h) = spec.validate_fits(img.width(), img.height())?;
    let m = spec.margin();
    let mut data = Vec::with_capacity(out_w * out_h * spec.n as usize);
    for y in 0..out_h {
        for x in 0..out_w {
            let center = img.get(x + m, y + m);
            for v in sample_neighbors(img, spec, x + m, y + m) {
                data.push(if v < center - tolerance {
                    -1
                } else if v > center + tolerance {
                    1
                } else {
                    0
                });
            }
        }
    }
    Ok(TernaryImage {
        width: out_w,
        height: out_h,
        n: spec.n,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordering::Ordering;

    fn spec(n: u32, r: f64, metric: Metric, sampling: Sampling) -> NeighborhoodSpec {
        NeighborhoodSpec::new(n, r, metric, sampling).unwrap()
    }

    #[test]
    fn binarize_is_strict() {
        assert_eq!(binarize(42.0, 110.0), 1);
        assert_eq!(binarize(42.0, 22.0), 0);
        assert_eq!(binarize(5.0, 5.0), 0);
    }

    #[test]
    fn offsets_start_up_and_go_clockwise() {
        let s = spec(8, 1.0, Metric::EuclideanCircle, Sampling::Bilinear);
        let off = s.offsets();
        assert_eq!(off[0], (0.0, -1.0));
        assert!((off[1].0 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((off[1].1 + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(off[2], (1.0, 0.0));
        assert_eq!(off[4], (0.0, 1.0));
        assert_eq!(off[6], (-1.0, 0.0));
    }

    #[test]
    fn manhattan_offsets_land_on_the_square() {
        let s = spec(8, 2.0, Metric::ManhattanSquare, Sampling::Bilinear);
        let off = s.nearest_offsets();
        assert_eq!(
            off,
            vec![
                (0, -2),
                (2, -2),
                (2, 0),
                (2, 2),
                (0, 2),
                (-2, 2),
                (-2, 0),
                (-2, -2)
            ]
        );
    }

    #[test]
    fn sample_neighbors_constant_image() {
        let img = GrayImage::filled(7, 7, 3.5f64);
        for metric in [Metric::EuclideanCircle, Metric::ManhattanSquare] {
            for sampling in [Sampling::Bilinear, Sampling::Nearest] {
                let s = spec(8, 1.5, metric, sampling);
                let vals = sample_neighbors(&img, &s, 3, 3);
                assert_eq!(vals, vec![3.5; 8]);
            }
        }
    }

    #[test]
    fn sample_neighbors_lattice_point_is_exact() {
        let img = GrayImage::from_fn(5, 5, |x, y| (y * 5 + x) as f64 * 1.7);
        let s = spec(4, 1.0, Metric::EuclideanCircle, Sampling::Bilinear);
        // angles 0/90/180/270 are lattice positions: up, right, down, left
        let vals = sample_neighbors(&img, &s, 2, 2);
        assert_eq!(vals[0], img.get(2, 1));
        assert_eq!(vals[1], img.get(3, 2));
        assert_eq!(vals[2], img.get(2, 3));
        assert_eq!(vals[3], img.get(1, 2));
    }

    #[test]
    fn sample_neighbors_ramp_matches_closed_form() {
        // bilinear interpolation reproduces the plane f(x, y) = x + y exactly
        let img = GrayImage::from_fn(7, 7, |x, y| (x + y) as f64);
        let s = spec(8, 1.0, Metric::EuclideanCircle, Sampling::Bilinear);
        let vals = sample_neighbors(&img, &s, 3, 3);
        let off = s.offsets();
        for (v, (dx, dy)) in vals.iter().zip(off) {
            let expected = (3.0 + dx) + (3.0 + dy);
            assert!((v - expected).abs() < 1e-9, "{v} vs {expected}");
        }
    }

    #[test]
    #[should_panic(expected = "outside the valid region")]
    fn sample_neighbors_rejects_border() {
        let img = GrayImage::filled(5, 5, 0.0f64);
        let s = spec(8, 1.0, Metric::EuclideanCircle, Sampling::Bilinear);
        sample_neighbors(&img, &s, 0, 2);
    }

    /// Places `neighbors` at the 8 sampling positions around a 3x3 center.
    fn three_by_three(center: f64, neighbors: [f64; 8]) -> GrayImage<f64> {
        let s = spec(8, 1.0, Metric::ManhattanSquare, Sampling::Nearest);
        let mut data = vec![0.0; 9];
        data[4] = center;
        for (i, &(dx, dy)) in s.nearest_offsets().iter().enumerate() {
            let x = (1 + dx) as usize;
            let y = (1 + dy) as usize;
            data[y * 3 + x] = neighbors[i];
        }
        GrayImage::new(3, 3, data).unwrap()
    }

    #[test]
    fn encodes_eight_neighbor_example() {
        let img = three_by_three(42.0, [22.0, 110.0, 20.0, 80.0, 60.0, 0.0, 1.0, 80.0]);
        let s = spec(8, 1.0, Metric::ManhattanSquare, Sampling::Nearest);
        let codes = lbp_encode(&img, &s).unwrap();
        assert_eq!(codes.width(), 1);
        assert_eq!(codes.height(), 1);
        // bits 0,1,0,1,1,0,0,1 LSB-first
        assert_eq!(codes.get(0, 0), 154);
    }

    #[test]
    fn encodes_six_neighbor_example() {
        let s = spec(6, 1.0, Metric::ManhattanSquare, Sampling::Nearest);
        let mut data = vec![0.0; 9];
        data[4] = 65.0;
        for (i, &v) in [94.0, 30.0, 15.0, 22.0, 40.0, 222.0].iter().enumerate() {
            let (dx, dy) = s.nearest_offsets()[i];
            data[((1 + dy) * 3 + (1 + dx)) as usize] = v;
        }
        let img = GrayImage::new(3, 3, data).unwrap();
        let codes = lbp_encode(&img, &s).unwrap();
        assert_eq!(codes.get(0, 0), 33);
    }

    #[test]
    fn constant_image_encodes_to_zero() {
        let img = GrayImage::filled(10, 10, 7.0f64);
        for sampling in [Sampling::Bilinear, Sampling::Nearest] {
            let s = spec(8, 2.0, Metric::EuclideanCircle, sampling);
            let codes = lbp_encode(&img, &s).unwrap();
            assert_eq!(codes.width(), 6);
            assert_eq!(codes.height(), 6);
            assert!(codes.data().iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn too_small_image_is_an_error() {
        let img = GrayImage::filled(6, 6, 0.0f64);
        let s = spec(8, 3.0, Metric::EuclideanCircle, Sampling::Bilinear);
        assert!(matches!(
            lbp_encode(&img, &s),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn valid_region_shrinks_by_ceil_r() {
        let img = GrayImage::from_fn(12, 9, |x, y| (x * y) as f64);
        let s = spec(8, 2.5, Metric::EuclideanCircle, Sampling::Bilinear);
        let codes = lbp_encode(&img, &s).unwrap();
        assert_eq!(codes.width(), 12 - 6);
        assert_eq!(codes.height(), 9 - 6);
    }

    #[test]
    fn ror_and_rotation_invariant_map() {
        assert_eq!(rotation_invariant_map(0b1000_0000, 8), 1);
        assert_eq!(rotation_invariant_map(0b0001_0001, 8), 0b0001_0001);
        assert_eq!(rotation_invariant_map(0, 4), 0);
        assert_eq!(ror(0b0001, 1, 4), 0b1000);
        assert_eq!(ror(0b1001, 1, 4), 0b1100);
    }

    #[test]
    fn rotation_invariant_map_idempotent_under_ror_exhaustive() {
        for n in 2..=8u32 {
            for c in 0..(1u32 << n) {
                let canon = rotation_invariant_map(c, n);
                for s in 0..n {
                    assert_eq!(rotation_invariant_map(ror(c, s, n), n), canon);
                }
            }
        }
    }

    #[test]
    fn eight_bit_codes_form_36_rotation_classes() {
        let (_, classes) = CodeMap::RotationInvariant.bin_table(8);
        assert_eq!(classes, 36);
    }

    #[test]
    fn uniform_label_space() {
        // flat pattern: uniform
        assert!(uniform_map(0, 8) < 58);
        // alternating pattern has 8 transitions: catch-all label
        assert_eq!(uniform_map(0b0101_0101, 8), 58);
        let uniform_codes = (0..256u32)
            .filter(|&c| circular_transitions(c, 8) <= 2)
            .count();
        assert_eq!(uniform_codes, 58);
        let (table, bins) = CodeMap::Uniform.bin_table(8);
        assert_eq!(bins, 59);
        let mut seen: Vec<u32> = table.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 59);
        // n=2: every code is uniform, catch-all bin exists but is unused
        let (_, bins2) = CodeMap::Uniform.bin_table(2);
        assert_eq!(bins2, 5);
    }

    #[test]
    fn ltp_bands() {
        let s = spec(8, 1.0, Metric::ManhattanSquare, Sampling::Nearest);
        let img = three_by_three(100.0, [103.0, 110.0, 90.0, 100.0, 95.0, 106.0, 94.0, 105.0]);
        let t = ltp_encode(&img, &s, 5.0).unwrap();
        assert_eq!(t.get(0, 0), &[0, 1, -1, 0, 0, 1, -1, 0]);
        assert!(matches!(
            ltp_encode(&img, &s, -1.0),
            Err(Error::NegativeTolerance(_))
        ));
    }

    #[test]
    fn affine_invariance_quantified() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let img = GrayImage::from_fn(10, 10, |_, _| rng.gen_range(0..256) as f64);
            let k1 = rng.gen_range(1..40) as f64 / 8.0;
            let k2 = rng.gen_range(-64..64) as f64;
            let transformed = img.affine(k1, k2);
            let sampling = if trial % 2 == 0 {
                Sampling::Bilinear
            } else {
                Sampling::Nearest
            };
            let s = spec(8, 1.5, Metric::EuclideanCircle, sampling);
            assert_eq!(
                lbp_encode(&img, &s).unwrap(),
                lbp_encode(&transformed, &s).unwrap()
            );
        }
    }

    #[test]
    fn ordering_rencode_ties_give_zero() {
        let s = spec(8, 1.0, Metric::EuclideanCircle, Sampling::Bilinear);
        let codes = CodeImage::from_raw(5, 5, vec![77; 25], s, 1).unwrap();
        let ord = Ordering::identity(8);
        let out = encode_with_ordering(&codes, &ord, &s).unwrap();
        assert_eq!(out.layer(), 2);
        assert!(out.data().iter().all(|&c| c == 0));
    }

    #[test]
    fn ordering_rencode_low_center_sets_all_bits() {
        let s = spec(8, 1.0, Metric::ManhattanSquare, Sampling::Nearest);
        let mut data = vec![200u32; 9];
        data[4] = 3;
        let codes = CodeImage::from_raw(3, 3, data, s, 1).unwrap();
        let out = encode_with_ordering(&codes, &Ordering::identity(8), &s).unwrap();
        assert_eq!(out.get(0, 0), 255);
    }

    #[test]
    fn ordering_rencode_size_mismatch() {
        let s = spec(8, 1.0, Metric::EuclideanCircle, Sampling::Bilinear);
        let codes = CodeImage::from_raw(4, 4, vec![0; 16], s, 1).unwrap();
        let ord = Ordering::identity(4);
        assert!(matches!(
            encode_with_ordering(&codes, &ord, &s),
            Err(Error::OrderingSizeMismatch { .. })
        ));
    }

    #[test]
    fn identity_ordering_reproduces_nearest_lbp() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let s_nearest = spec(8, 1.0, Metric::EuclideanCircle, Sampling::Nearest);
        for _ in 0..20 {
            let values: Vec<u32> = (0..256).map(|_| rng.gen_range(0..256)).collect();
            let img = GrayImage::from_fn(16, 16, |x, y| values[y * 16 + x] as f64);
            let codes =
                CodeImage::from_raw(16, 16, values.clone(), s_nearest, 1).unwrap();
            let via_ordering =
                encode_with_ordering(&codes, &Ordering::identity(8), &s_nearest).unwrap();
            let direct = lbp_encode(&img, &s_nearest).unwrap();
            assert_eq!(via_ordering.data(), direct.data());
        }
    }
}
