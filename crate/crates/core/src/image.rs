//! 2D real-valued pixel grid, the reconstruction variable.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vecmath;

/// Row-major pixel grid with a physical pixel size.
///
/// Pixel (ix, iy) is stored at `pixels[iy * width + ix]`; its center sits at
/// physical coordinates `((ix + 0.5 - width/2) * pixel_size,
/// (iy + 0.5 - height/2) * pixel_size)`, so the grid is centered on the
/// origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixel_size: f64,
    pub pixels: Vec<f64>,
}

impl Image {
    pub fn zeros(width: usize, height: usize, pixel_size: f64) -> Self {
        Image {
            width,
            height,
            pixel_size,
            pixels: vec![0.0; width * height],
        }
    }

    pub fn from_pixels(
        width: usize,
        height: usize,
        pixel_size: f64,
        pixels: Vec<f64>,
    ) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Config(format!(
                "pixel buffer length {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        if !(pixel_size.is_finite() && pixel_size > 0.0) {
            return Err(Error::Config(format!("pixel_size {pixel_size} must be positive")));
        }
        Ok(Image {
            width,
            height,
            pixel_size,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.pixels[iy * self.width + ix]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, v: f64) {
        self.pixels[iy * self.width + ix] = v;
    }

    /// Same shape, fresh zeroed pixels.
    pub fn same_shape_zeros(&self) -> Image {
        Image::zeros(self.width, self.height, self.pixel_size)
    }

    /// Replace the pixel buffer, keeping shape metadata.
    pub fn with_pixels(&self, pixels: Vec<f64>) -> Image {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        Image {
            width: self.width,
            height: self.height,
            pixel_size: self.pixel_size,
            pixels,
        }
    }

    pub fn norm2(&self) -> f64 {
        vecmath::norm2(&self.pixels)
    }

    pub fn dist2(&self, other: &Image) -> f64 {
        vecmath::dist2(&self.pixels, &other.pixels)
    }

    pub fn all_finite(&self) -> bool {
        vecmath::all_finite(&self.pixels)
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.pixels {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    pub fn same_shape_as(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_pixels_validates_length() {
        assert!(Image::from_pixels(2, 2, 1.0, vec![0.0; 3]).is_err());
        assert!(Image::from_pixels(2, 2, 1.0, vec![0.0; 4]).is_ok());
    }

    #[test]
    fn indexing_is_row_major() {
        let mut img = Image::zeros(3, 2, 1.0);
        img.set(2, 1, 5.0);
        assert_eq!(img.pixels[1 * 3 + 2], 5.0);
        assert_eq!(img.get(2, 1), 5.0);
    }
}
