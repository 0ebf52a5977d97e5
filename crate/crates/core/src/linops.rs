//! Matrix-free linear operators: discrete Radon transform with exact adjoint,
//! dense/diagonal/identity test operators, and spectral-bound estimation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::Rng;
use crate::sinogram::{Sinogram, SinogramGeometry};
use crate::vecmath;

/// Forward/adjoint pair on flat buffers.
///
/// `apply` maps a domain vector (row-major image pixels) to a range vector
/// (view-major sinogram samples, or another image); `apply_adjoint` is its
/// exact transpose. Implementations are pure and safe to share across
/// threads.
pub trait LinearOperator {
    /// Domain shape as (width, height).
    fn domain_shape(&self) -> (usize, usize);
    /// Range shape as (n_views, n_offsets) for tomographic operators or an
    /// arbitrary (rows, 1) factorization otherwise.
    fn range_shape(&self) -> (usize, usize);

    fn domain_dim(&self) -> usize {
        let (w, h) = self.domain_shape();
        w * h
    }

    fn range_dim(&self) -> usize {
        let (a, b) = self.range_shape();
        a * b
    }

    fn apply(&self, x: &[f64], out: &mut [f64]);
    fn apply_adjoint(&self, u: &[f64], out: &mut [f64]);
}

/// Discrete 2D parallel-beam Radon transform.
///
/// Ray-driven with exact pixel-intersection lengths: each sample is the line
/// integral of the piecewise-constant pixel image along the ray, and the
/// adjoint reuses the same (pixel, length) pairs as a scatter, so it is the
/// literal transpose of the forward map. Ray weights are precomputed at
/// construction into a CSR table; summation order per ray is fixed.
pub struct RadonTransform {
    geometry: SinogramGeometry,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<f64>,
}

impl RadonTransform {
    pub fn new(geometry: SinogramGeometry) -> Self {
        let n_rays = geometry.n_rays();
        let mut row_ptr = Vec::with_capacity(n_rays + 1);
        let mut cols: Vec<u32> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        row_ptr.push(0);

        let mut events: Vec<f64> = Vec::new();
        for view in 0..geometry.n_views() {
            let theta = geometry.angles_deg[view] * core::f64::consts::PI / 180.0;
            let (sin_t, cos_t) = (libm::sin(theta), libm::cos(theta));
            for offs in 0..geometry.n_offsets {
                let t = geometry.offset(offs);
                trace_ray(&geometry, sin_t, cos_t, t, &mut events, |px, len| {
                    cols.push(px as u32);
                    weights.push(len);
                });
                row_ptr.push(cols.len());
            }
        }

        RadonTransform {
            geometry,
            row_ptr,
            cols,
            weights,
        }
    }

    pub fn geometry(&self) -> &SinogramGeometry {
        &self.geometry
    }

    /// Line integrals of `img` along every (view, offset) ray.
    pub fn forward(&self, img: &Image) -> Result<Sinogram> {
        self.check_image(img, "radon forward")?;
        let mut sino = Sinogram::zeros(&self.geometry);
        self.apply(&img.pixels, &mut sino.values);
        Ok(sino)
    }

    /// Exact transpose of [`RadonTransform::forward`].
    pub fn adjoint(&self, sino: &Sinogram) -> Result<Image> {
        if !sino.matches_geometry(&self.geometry) {
            return Err(Error::ShapeMismatch {
                context: "radon adjoint",
                expected: self.geometry.range_shape(),
                got: sino.shape(),
            });
        }
        let mut img = Image::zeros(
            self.geometry.width,
            self.geometry.height,
            self.geometry.pixel_size,
        );
        self.apply_adjoint(&sino.values, &mut img.pixels);
        Ok(img)
    }

    fn check_image(&self, img: &Image, context: &'static str) -> Result<()> {
        if img.shape() != self.geometry.image_shape() {
            return Err(Error::ShapeMismatch {
                context,
                expected: self.geometry.image_shape(),
                got: img.shape(),
            });
        }
        Ok(())
    }

    /// Number of stored (pixel, weight) pairs.
    pub fn nnz(&self) -> usize {
        self.weights.len()
    }
}

impl LinearOperator for RadonTransform {
    fn domain_shape(&self) -> (usize, usize) {
        self.geometry.image_shape()
    }

    fn range_shape(&self) -> (usize, usize) {
        self.geometry.range_shape()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.domain_dim());
        assert_eq!(out.len(), self.range_dim());
        for ray in 0..out.len() {
            let mut acc = 0.0;
            for k in self.row_ptr[ray]..self.row_ptr[ray + 1] {
                acc += self.weights[k] * x[self.cols[k] as usize];
            }
            out[ray] = acc;
        }
    }

    fn apply_adjoint(&self, u: &[f64], out: &mut [f64]) {
        assert_eq!(u.len(), self.range_dim());
        assert_eq!(out.len(), self.domain_dim());
        out.fill(0.0);
        for ray in 0..u.len() {
            let v = u[ray];
            if v == 0.0 {
                continue;
            }
            for k in self.row_ptr[ray]..self.row_ptr[ray + 1] {
                out[self.cols[k] as usize] += self.weights[k] * v;
            }
        }
    }
}

/// Walk one ray through the pixel grid, visiting (pixel index, chord length).
///
/// The ray is `p(s) = (t cos - s sin, t sin + s cos)`. We clip the parameter
/// range to the image box, collect every crossing with the pixel grid lines,
/// and emit each segment with the pixel identified by its midpoint. Segments
/// shorter than 1e-12 pixel are corner grazes and are dropped.
fn trace_ray(
    geometry: &SinogramGeometry,
    sin_t: f64,
    cos_t: f64,
    t: f64,
    events: &mut Vec<f64>,
    mut visit: impl FnMut(usize, f64),
) {
    let px = geometry.pixel_size;
    let hw = geometry.width as f64 * px / 2.0;
    let hh = geometry.height as f64 * px / 2.0;

    // x(s) = t cos - s sin, y(s) = t sin + s cos
    let mut s_min = f64::NEG_INFINITY;
    let mut s_max = f64::INFINITY;

    // Clip against x in [-hw, hw].
    if sin_t.abs() > 1e-15 {
        let s_a = (t * cos_t - hw) / sin_t;
        let s_b = (t * cos_t + hw) / sin_t;
        s_min = s_min.max(s_a.min(s_b));
        s_max = s_max.min(s_a.max(s_b));
    } else if t * cos_t <= -hw || t * cos_t >= hw {
        return;
    }
    // Clip against y in [-hh, hh].
    if cos_t.abs() > 1e-15 {
        let s_a = (-hh - t * sin_t) / cos_t;
        let s_b = (hh - t * sin_t) / cos_t;
        s_min = s_min.max(s_a.min(s_b));
        s_max = s_max.min(s_a.max(s_b));
    } else if t * sin_t <= -hh || t * sin_t >= hh {
        return;
    }
    if !(s_min < s_max) {
        return;
    }

    events.clear();
    events.push(s_min);
    events.push(s_max);
    if sin_t.abs() > 1e-15 {
        for i in 0..=geometry.width {
            let xg = -hw + i as f64 * px;
            let s = (t * cos_t - xg) / sin_t;
            if s > s_min && s < s_max {
                events.push(s);
            }
        }
    }
    if cos_t.abs() > 1e-15 {
        for j in 0..=geometry.height {
            let yg = -hh + j as f64 * px;
            let s = (yg - t * sin_t) / cos_t;
            if s > s_min && s < s_max {
                events.push(s);
            }
        }
    }
    events.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite ray events"));

    let eps = 1e-12 * px;
    for w in events.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        if len <= eps {
            continue;
        }
        let mid = 0.5 * (a + b);
        let x = t * cos_t - mid * sin_t;
        let y = t * sin_t + mid * cos_t;
        let ix = libm::floor((x + hw) / px) as isize;
        let iy = libm::floor((y + hh) / px) as isize;
        if ix < 0 || iy < 0 || ix >= geometry.width as isize || iy >= geometry.height as isize {
            continue;
        }
        visit(iy as usize * geometry.width + ix as usize, len);
    }
}

/// Dense row-major matrix as an operator; used for small constructed
/// instances in tests and theorem certifications.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    domain_shape: (usize, usize),
}

impl DenseOperator {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Config(alloc::format!(
                "dense operator needs {rows}x{cols} entries, got {}",
                entries.len()
            )));
        }
        Ok(DenseOperator {
            rows,
            cols,
            entries,
            domain_shape: (cols, 1),
        })
    }

    /// Reinterpret the domain as a (width, height) image grid.
    pub fn with_domain_shape(mut self, width: usize, height: usize) -> Result<Self> {
        if width * height != self.cols {
            return Err(Error::Config(alloc::format!(
                "domain shape {width}x{height} does not match {} columns",
                self.cols
            )));
        }
        self.domain_shape = (width, height);
        Ok(self)
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }
}

impl LinearOperator for DenseOperator {
    fn domain_shape(&self) -> (usize, usize) {
        self.domain_shape
    }

    fn range_shape(&self) -> (usize, usize) {
        (self.rows, 1)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            out[r] = vecmath::dot(&self.entries[r * self.cols..(r + 1) * self.cols], x);
        }
    }

    fn apply_adjoint(&self, u: &[f64], out: &mut [f64]) {
        assert_eq!(u.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for r in 0..self.rows {
            vecmath::axpy(u[r], &self.entries[r * self.cols..(r + 1) * self.cols], out);
        }
    }
}

/// Diagonal operator (square).
#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    diag: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(diag: Vec<f64>) -> Self {
        DiagonalOperator { diag }
    }
}

impl LinearOperator for DiagonalOperator {
    fn domain_shape(&self) -> (usize, usize) {
        (self.diag.len(), 1)
    }

    fn range_shape(&self) -> (usize, usize) {
        (self.diag.len(), 1)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for ((o, xi), d) in out.iter_mut().zip(x).zip(&self.diag) {
            *o = d * xi;
        }
    }

    fn apply_adjoint(&self, u: &[f64], out: &mut [f64]) {
        self.apply(u, out);
    }
}

/// Identity on a (width, height) image domain.
#[derive(Debug, Clone)]
pub struct IdentityOperator {
    width: usize,
    height: usize,
}

impl IdentityOperator {
    pub fn new(width: usize, height: usize) -> Self {
        IdentityOperator { width, height }
    }
}

impl LinearOperator for IdentityOperator {
    fn domain_shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn range_shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    fn apply_adjoint(&self, u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(u);
    }
}

/// Extremal eigenvalue estimates of the normal operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Result of one power-iteration run, with the per-iteration Rayleigh
/// quotients (non-decreasing for symmetric PSD operators).
#[derive(Debug, Clone)]
pub struct PowerIteration {
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Power iteration on a symmetric PSD operator given as a closure.
pub fn power_iteration(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    dim: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> PowerIteration {
    let mut rng = Rng::new(seed);
    let mut v = vec![0.0; dim];
    rng.fill_normal(&mut v, 0.0, 1.0);
    let n = vecmath::norm2(&v);
    vecmath::scale(1.0 / n, &mut v);

    let mut w = vec![0.0; dim];
    let mut history: Vec<f64> = Vec::new();
    let mut prev = f64::NAN;
    for it in 1..=max_iter {
        apply(&v, &mut w);
        let lambda = vecmath::dot(&v, &w);
        if let Some(&last) = history.last() {
            // Rayleigh quotients of a PSD power iteration are non-decreasing.
            debug_assert!(
                lambda >= last - 1e-9 * last.abs().max(1e-300),
                "power iteration regressed: {last} -> {lambda}"
            );
        }
        history.push(lambda);
        let wn = vecmath::norm2(&w);
        if wn == 0.0 {
            return PowerIteration {
                lambda: 0.0,
                iterations: it,
                converged: true,
                history,
            };
        }
        if !prev.is_nan() && (lambda - prev).abs() <= tol * lambda.abs().max(1e-300) {
            return PowerIteration {
                lambda,
                iterations: it,
                converged: true,
                history,
            };
        }
        prev = lambda;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
    }
    PowerIteration {
        lambda: prev,
        iterations: max_iter,
        converged: false,
        history,
    }
}

/// Estimate the largest and smallest eigenvalues of the normal operator.
///
/// `lambda_max` comes from power iteration on the normal operator to relative
/// tolerance `tol`. When the range dimension is smaller than the domain
/// dimension the operator has a nontrivial null space, so `lambda_min` is
/// pinned to 0; otherwise it is found by power iteration on the shifted
/// operator `lambda_max I - HtH`.
pub fn estimate_spectral_bounds(
    op: &dyn LinearOperator,
    tol: f64,
    max_iter: usize,
) -> SpectralBounds {
    let n = op.domain_dim();
    let m = op.range_dim();
    let mut range_buf = vec![0.0; m];

    let gram = |x: &[f64], out: &mut [f64], range_buf: &mut [f64]| {
        op.apply(x, range_buf);
        op.apply_adjoint(range_buf, out);
    };

    let top = power_iteration(
        |x, out| gram(x, out, &mut range_buf),
        n,
        tol,
        max_iter,
        0x5eed_0001,
    );
    let lambda_max = top.lambda.max(0.0);

    if m < n {
        return SpectralBounds {
            lambda_max,
            lambda_min: 0.0,
            iterations_used: top.iterations,
            converged: top.converged,
        };
    }

    let mut range_buf2 = vec![0.0; m];
    let shifted = power_iteration(
        |x, out| {
            gram(x, out, &mut range_buf2);
            for (o, xi) in out.iter_mut().zip(x) {
                *o = lambda_max * xi - *o;
            }
        },
        n,
        tol,
        max_iter,
        0x5eed_0002,
    );
    let lambda_min = (lambda_max - shifted.lambda.max(0.0)).clamp(0.0, lambda_max);

    SpectralBounds {
        lambda_max,
        lambda_min,
        iterations_used: top.iterations + shifted.iterations,
        converged: top.converged && shifted.converged,
    }
}
