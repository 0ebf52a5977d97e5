//! Direct reconstructions: backprojection and filtered backprojection.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fft::fft_inplace;
use crate::image::Image;
use crate::linops::RadonTransform;
use crate::sinogram::Sinogram;
use crate::vecmath::next_pow2;

/// Which fixed linear map to use as the initial reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconKind {
    Bp,
    Fbp,
}

/// The initial-reconstruction operator: a fixed linear map from measurements
/// to images, either plain backprojection or ramp-filtered backprojection.
pub struct ReconstructorA {
    kind: ReconKind,
    radon: RadonTransform,
}

impl ReconstructorA {
    pub fn new(kind: ReconKind, radon: RadonTransform) -> Self {
        ReconstructorA { kind, radon }
    }

    pub fn kind(&self) -> ReconKind {
        self.kind
    }

    pub fn radon(&self) -> &RadonTransform {
        &self.radon
    }

    pub fn reconstruct(&self, sino: &Sinogram) -> Result<Image> {
        match self.kind {
            ReconKind::Bp => self.backproject(sino),
            ReconKind::Fbp => self.fbp(sino),
        }
    }

    /// Plain backprojection: exactly the Radon adjoint.
    pub fn backproject(&self, sino: &Sinogram) -> Result<Image> {
        self.radon.adjoint(sino)
    }

    /// Filtered backprojection.
    ///
    /// Each view is filtered with the discrete ram-lak ramp, zero-padded to
    /// the next power of two past twice the offset count, then backprojected
    /// pixel-driven with linear interpolation between offsets and scaled by
    /// pi / (2 n_views). The ramp is the DFT of the band-limited spatial
    /// impulse response (1/4 at zero, -1/(pi n)^2 at odd taps), which matches
    /// the ideal |w| away from DC but keeps the correct small positive
    /// response at low frequencies; sampling |w| directly instead would zero
    /// DC and systematically under-reconstruct the image mean.
    pub fn fbp(&self, sino: &Sinogram) -> Result<Image> {
        let geom = self.radon.geometry();
        if !sino.matches_geometry(geom) {
            return Err(Error::ShapeMismatch {
                context: "fbp",
                expected: geom.range_shape(),
                got: sino.shape(),
            });
        }
        let n_views = sino.n_views;
        if n_views < 2 {
            return Err(Error::Config(
                "fbp needs at least two views; the ramp filter is useless on one".into(),
            ));
        }
        let n_offsets = sino.n_offsets;
        let dt = geom.pixel_size;
        let nfft = next_pow2(2 * n_offsets);
        let ramp = ramp_filter(nfft, dt);

        let mut filtered = vec![0.0; n_views * n_offsets];
        let mut re = vec![0.0; nfft];
        let mut im = vec![0.0; nfft];
        for v in 0..n_views {
            re.fill(0.0);
            im.fill(0.0);
            re[..n_offsets].copy_from_slice(&sino.values[v * n_offsets..(v + 1) * n_offsets]);
            fft_inplace(&mut re, &mut im, false);
            for k in 0..nfft {
                re[k] *= ramp[k];
                im[k] *= ramp[k];
            }
            fft_inplace(&mut re, &mut im, true);
            filtered[v * n_offsets..(v + 1) * n_offsets].copy_from_slice(&re[..n_offsets]);
        }

        // Pixel-driven backprojection with linear interpolation in offset.
        let mut img = Image::zeros(geom.width, geom.height, geom.pixel_size);
        let half_off = (n_offsets as f64 - 1.0) / 2.0;
        let scale = core::f64::consts::PI / (2.0 * n_views as f64);
        for v in 0..n_views {
            let theta = sino.angles_deg[v] * core::f64::consts::PI / 180.0;
            let (sin_t, cos_t) = (libm::sin(theta), libm::cos(theta));
            let row = &filtered[v * n_offsets..(v + 1) * n_offsets];
            for iy in 0..geom.height {
                let y = (iy as f64 + 0.5 - geom.height as f64 / 2.0) * geom.pixel_size;
                for ix in 0..geom.width {
                    let x = (ix as f64 + 0.5 - geom.width as f64 / 2.0) * geom.pixel_size;
                    let t = x * cos_t + y * sin_t;
                    let u = t / dt + half_off;
                    let i0 = libm::floor(u) as isize;
                    let frac = u - i0 as f64;
                    let mut acc = 0.0;
                    if i0 >= 0 && (i0 as usize) < n_offsets {
                        acc += (1.0 - frac) * row[i0 as usize];
                    }
                    let i1 = i0 + 1;
                    if i1 >= 0 && (i1 as usize) < n_offsets {
                        acc += frac * row[i1 as usize];
                    }
                    img.pixels[iy * geom.width + ix] += acc;
                }
            }
        }
        for p in img.pixels.iter_mut() {
            *p *= scale;
        }
        Ok(img)
    }
}

/// Frequency response of the discrete ramp: FFT of the band-limited ramp
/// impulse response sampled at detector spacing `dt`, doubled to match the
/// pi/(2 n_views) backprojection scale.
fn ramp_filter(nfft: usize, dt: f64) -> Vec<f64> {
    let mut re = vec![0.0; nfft];
    let mut im = vec![0.0; nfft];
    re[0] = 0.25;
    let mut n = 1usize;
    while n < nfft / 2 {
        let v = -1.0 / (core::f64::consts::PI * n as f64).powi(2);
        re[n] = v;
        re[nfft - n] = v;
        n += 2;
    }
    fft_inplace(&mut re, &mut im, false);
    // The response of a real symmetric impulse is real; keep 2 * Re / dt.
    for v in re.iter_mut() {
        *v = 2.0 * *v / dt;
    }
    re
}
