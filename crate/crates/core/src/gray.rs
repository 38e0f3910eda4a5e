//! Grayscale image container.
//!
//! Intensities are real-valued on any affine scale; 8-bit inputs are promoted
//! on load. Pixels are stored row-major.

use crate::error::{Error, Result};
use crate::num::{real, Real};

/// A single-channel image with real-valued intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T: Real> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> GrayImage<T> {
    /// Wraps row-major pixel data. Fails on zero dimensions, length mismatch,
    /// or non-finite values.
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "zero dimension {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidImage(format!("non-finite intensity {bad}")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Constant image.
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x]
    }

    /// Applies `v -> k1*v + k2` to every pixel.
    pub fn affine(&self, k1: T, k2: T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| k1 * v + k2).collect(),
        }
    }

    /// Mirror around the vertical axis.
    pub fn flip_horizontal(&self) -> Self {
        Self::from_fn(self.width, self.height, |x, y| {
            self.get(self.width - 1 - x, y)
        })
    }

    /// Mirror around the horizontal axis.
    pub fn flip_vertical(&self) -> Self {
        Self::from_fn(self.width, self.height, |x, y| {
            self.get(x, self.height - 1 - y)
        })
    }

    /// Area-average resampling to the given output size.
    ///
    /// Each output pixel averages the exact source rectangle it covers, with
    /// fractional rows/columns weighted by overlap. For integer shrink
    /// factors this is a plain box mean.
    pub fn resample(&self, out_width: usize, out_height: usize) -> Result<Self> {
        if out_width == 0 || out_height == 0 {
            return Err(Error::InvalidImage(format!(
                "resample target {out_width}x{out_height}"
            )));
        }
        if out_width == self.width && out_height == self.height {
            return Ok(self.clone());
        }
        let sx = self.width as f64 / out_width as f64;
        let sy = self.height as f64 / out_height as f64;
        let img = Self::from_fn(out_width, out_height, |ox, oy| {
            let x0 = ox as f64 * sx;
            let x1 = ((ox + 1) as f64 * sx).min(self.width as f64);
            let y0 = oy as f64 * sy;
            let y1 = ((oy + 1) as f64 * sy).min(self.height as f64);
            let mut acc = T::zero();
            let mut weight_sum = T::zero();
            let mut y = y0.floor() as usize;
            while (y as f64) < y1 {
                let wy = (y1.min((y + 1) as f64) - y0.max(y as f64)).max(0.0);
                if wy > 0.0 {
                    let mut x = x0.floor() as usize;
                    while (x as f64) < x1 {
                        let wx = (x1.min((x + 1) as f64) - x0.max(x as f64)).max(0.0);
                        if wx > 0.0 {
                            let w: T = real(wx * wy);
                            acc = acc + w * self.get(x.min(self.width - 1), y.min(self.height - 1));
                            weight_sum = weight_sum + w;
                        }
                        x += 1;
                    }
                }
                y += 1;
            }
            acc / weight_sum
        });
        Ok(img)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(GrayImage::<f64>::new(0, 3, vec![]).is_err());
        assert!(GrayImage::<f64>::new(2, 2, vec![1.0; 3]).is_err());
        assert!(GrayImage::<f64>::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn flips_are_involutions() {
        let img = GrayImage::from_fn(5, 4, |x, y| (x * 10 + y) as f64);
        assert_eq!(img.flip_horizontal().flip_horizontal(), img);
        assert_eq!(img.flip_vertical().flip_vertical(), img);
        assert_eq!(img.flip_horizontal().get(0, 0), img.get(4, 0));
        assert_eq!(img.flip_vertical().get(0, 0), img.get(0, 3));
    }

    #[test]
    fn resample_halves_checkerboard_to_mean() {
        let img = GrayImage::from_fn(4, 4, |x, y| if (x + y) % 2 == 0 { 0.0f64 } else { 100.0 });
        let half = img.resample(2, 2).unwrap();
        for &v in half.data() {
            assert!((v - 50.0).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_identity_at_same_size() {
        let img = GrayImage::from_fn(7, 3, |x, y| (x + y) as f32);
        assert_eq!(img.resample(7, 3).unwrap(), img);
    }

    #[test]
    fn resample_fractional_factor_preserves_mean() {
        let img = GrayImage::from_fn(5, 5, |x, y| (x * 5 + y) as f64);
        let out = img.resample(2, 2).unwrap();
        let mean_in: f64 = img.data().iter().sum::<f64>() / 25.0;
        // area weights are uneven but each output pixel is a weighted mean,
        // so the weighted total is conserved
        let mean_out: f64 = out.data().iter().sum::<f64>() / 4.0;
        assert!((mean_in - mean_out).abs() < 3.0);
        assert_eq!(out.width(), 2);
    }
}
