//! Measurement grid (view x offset) and the acquisition geometry.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Parallel-beam acquisition geometry.
///
/// A ray is indexed by (view, offset). View `v` has angle `angles_deg[v]`
/// measured in degrees; the ray is the line `p . n = t` with normal
/// `n = (cos a, sin a)` and signed offset `t = (i - (n_offsets-1)/2) *
/// pixel_size`. Detector spacing equals the pixel size, and the default
/// offset count of 1.5x the larger image side spans the image diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SinogramGeometry {
    pub width: usize,
    pub height: usize,
    pub pixel_size: f64,
    pub n_offsets: usize,
    pub angles_deg: Vec<f64>,
}

impl SinogramGeometry {
    /// Geometry with validated nominal angles: strictly increasing in [0, 180).
    pub fn new(
        width: usize,
        height: usize,
        pixel_size: f64,
        angles_deg: Vec<f64>,
        n_offsets: usize,
    ) -> Result<Self> {
        if angles_deg.is_empty() {
            return Err(Error::Config("geometry requires at least one view angle".into()));
        }
        for pair in angles_deg.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::Config(format!(
                    "view angles must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        let first = angles_deg[0];
        let last = angles_deg[angles_deg.len() - 1];
        if !(0.0..180.0).contains(&first) || !(0.0..180.0).contains(&last) {
            return Err(Error::Config(format!(
                "view angles must lie in [0, 180), got range [{first}, {last}]"
            )));
        }
        Self::with_raw_angles(width, height, pixel_size, angles_deg, n_offsets)
    }

    /// Geometry with arbitrary finite angles (used for jittered acquisition,
    /// where the monotone [0, 180) invariant only applies before jitter).
    pub fn with_raw_angles(
        width: usize,
        height: usize,
        pixel_size: f64,
        angles_deg: Vec<f64>,
        n_offsets: usize,
    ) -> Result<Self> {
        if angles_deg.is_empty() {
            return Err(Error::Config("geometry requires at least one view angle".into()));
        }
        if angles_deg.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("view angles must be finite".into()));
        }
        if width == 0 || height == 0 {
            return Err(Error::Config("image must be nonempty".into()));
        }
        if n_offsets == 0 {
            return Err(Error::Config("geometry requires at least one offset".into()));
        }
        if !(pixel_size.is_finite() && pixel_size > 0.0) {
            return Err(Error::Config(format!("pixel_size {pixel_size} must be positive")));
        }
        Ok(SinogramGeometry {
            width,
            height,
            pixel_size,
            n_offsets,
            angles_deg,
        })
    }

    /// `n_views` angles uniformly covering [0, 180).
    pub fn uniform_angles(n_views: usize) -> Vec<f64> {
        (0..n_views)
            .map(|i| 180.0 * i as f64 / n_views as f64)
            .collect()
    }

    /// Default offset count spanning the image diagonal with one-pixel spacing.
    pub fn default_n_offsets(width: usize, height: usize) -> usize {
        let m = width.max(height) as f64;
        libm::ceil(1.5 * m) as usize
    }

    pub fn n_views(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn n_rays(&self) -> usize {
        self.n_views() * self.n_offsets
    }

    /// Signed physical offset of detector bin `i`.
    pub fn offset(&self, i: usize) -> f64 {
        (i as f64 - (self.n_offsets as f64 - 1.0) / 2.0) * self.pixel_size
    }

    pub fn image_shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn range_shape(&self) -> (usize, usize) {
        (self.n_views(), self.n_offsets)
    }
}

/// View-major measurement grid with the angle list it was acquired on.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    pub n_views: usize,
    pub n_offsets: usize,
    pub angles_deg: Vec<f64>,
    pub values: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(geometry: &SinogramGeometry) -> Self {
        Sinogram {
            n_views: geometry.n_views(),
            n_offsets: geometry.n_offsets,
            angles_deg: geometry.angles_deg.clone(),
            values: vec![0.0; geometry.n_rays()],
        }
    }

    pub fn from_values(
        n_views: usize,
        n_offsets: usize,
        angles_deg: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if angles_deg.len() != n_views {
            return Err(Error::Config(format!(
                "angle list length {} does not match {} views",
                angles_deg.len(),
                n_views
            )));
        }
        if values.len() != n_views * n_offsets {
            return Err(Error::Config(format!(
                "value buffer length {} does not match {}x{}",
                values.len(),
                n_views,
                n_offsets
            )));
        }
        Ok(Sinogram {
            n_views,
            n_offsets,
            angles_deg,
            values,
        })
    }

    #[inline]
    pub fn get(&self, view: usize, offset: usize) -> f64 {
        self.values[view * self.n_offsets + offset]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_views, self.n_offsets)
    }

    pub fn matches_geometry(&self, geometry: &SinogramGeometry) -> bool {
        self.n_views == geometry.n_views() && self.n_offsets == geometry.n_offsets
    }

    pub fn norm2(&self) -> f64 {
        crate::vecmath::norm2(&self.values)
    }
}
