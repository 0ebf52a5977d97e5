//! Quantitative evaluation: SNR, regressed SNR, and measurement-consistency
//! SNR.

use alloc::vec::Vec;

use crate::image::Image;
use crate::linops::RadonTransform;
use crate::sinogram::Sinogram;
use crate::vecmath;

/// `20 log10(||x|| / ||x - x_hat||)` in dB; +inf when the error norm
/// underflows (exact reconstruction).
pub fn snr(x_hat: &Image, x: &Image) -> f64 {
    assert!(
        x_hat.same_shape_as(x),
        "snr: shape mismatch {:?} vs {:?}",
        x_hat.shape(),
        x.shape()
    );
    snr_flat(&x_hat.pixels, &x.pixels)
}

pub fn snr_flat(x_hat: &[f64], x: &[f64]) -> f64 {
    let err = vecmath::dist2(x_hat, x);
    if err < 1e-300 {
        return f64::INFINITY;
    }
    20.0 * libm::log10(vecmath::norm2(x) / err)
}

/// SNR maximized over an affine fit `a * x_hat + b` of the reconstruction,
/// removing scale and DC offset. The 2D argmax reduces exactly to simple
/// linear regression of x on x_hat. Returns (snr_db, a, b).
pub fn regressed_snr(x_hat: &Image, x: &Image) -> (f64, f64, f64) {
    assert!(
        x_hat.same_shape_as(x),
        "regressed_snr: shape mismatch {:?} vs {:?}",
        x_hat.shape(),
        x.shape()
    );
    regressed_snr_flat(&x_hat.pixels, &x.pixels)
}

pub fn regressed_snr_flat(x_hat: &[f64], x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mean_hat = x_hat.iter().sum::<f64>() / n;
    let mean_x = x.iter().sum::<f64>() / n;
    let mut var_hat = 0.0;
    let mut cov = 0.0;
    for (h, t) in x_hat.iter().zip(x) {
        let dh = h - mean_hat;
        var_hat += dh * dh;
        cov += dh * (t - mean_x);
    }
    // Constant reconstruction: the best affine fit is the constant mean(x).
    let a = if var_hat < 1e-300 { 0.0 } else { cov / var_hat };
    let b = mean_x - a * mean_hat;
    let fitted: Vec<f64> = x_hat.iter().map(|h| a * h + b).collect();
    (snr_flat(&fitted, x), a, b)
}

/// Measurement-consistency figure: SNR of the reprojected reconstruction
/// against the clean sinogram.
pub fn sinogram_snr(op: &RadonTransform, x_hat: &Image, y_clean: &Sinogram) -> crate::Result<f64> {
    let reproj = op.forward(x_hat)?;
    if reproj.shape() != y_clean.shape() {
        return Err(crate::Error::ShapeMismatch {
            context: "sinogram snr",
            expected: reproj.shape(),
            got: y_clean.shape(),
        });
    }
    Ok(snr_flat(&reproj.values, &y_clean.values))
}

/// Evaluation of a single reconstruction.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImageEval {
    pub index: usize,
    pub snr_db: f64,
    pub regressed_snr_db: f64,
    pub a: f64,
    pub b: f64,
    pub sinogram_snr_db: f64,
    /// Regularization weight chosen for this image, when the method tunes one.
    pub best_lambda: Option<f64>,
}

/// Aggregate over a test set: means of the per-image figures plus the full
/// breakdown.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub snr_db: f64,
    pub regressed_snr_db: f64,
    pub a: f64,
    pub b: f64,
    pub sinogram_snr_db: f64,
    pub per_image: Vec<ImageEval>,
}

impl EvalReport {
    pub fn from_per_image(per_image: Vec<ImageEval>) -> Self {
        let n = per_image.len().max(1) as f64;
        let mean = |f: fn(&ImageEval) -> f64| per_image.iter().map(f).sum::<f64>() / n;
        EvalReport {
            snr_db: mean(|e| e.snr_db),
            regressed_snr_db: mean(|e| e.regressed_snr_db),
            a: mean(|e| e.a),
            b: mean(|e| e.b),
            sinogram_snr_db: mean(|e| e.sinogram_snr_db),
            per_image,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use alloc::vec;

    fn img(v: &[f64]) -> Image {
        Image::from_pixels(v.len(), 1, 1.0, v.to_vec()).unwrap()
    }

    #[test]
    fn snr_of_scaled_error_is_20db() {
        // ||x|| = 5, ||n|| = 0.5 -> ratio 10 -> 20 dB.
        let x = img(&[3.0, 4.0]);
        let xh = img(&[3.3, 4.4]);
        assert!((snr(&xh, &x) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn snr_exact_reconstruction_is_infinite() {
        let x = img(&[1.0, 2.0]);
        assert_eq!(snr(&x, &x), f64::INFINITY);
    }

    #[test]
    fn snr_of_zero_reconstruction_is_zero_db() {
        let x = img(&[1.0, -2.0, 0.5]);
        let zero = img(&[0.0, 0.0, 0.0]);
        assert!((snr(&zero, &x) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn regressed_snr_removes_affine_relation() {
        let x = img(&[0.5, 1.5, -2.0, 3.0]);
        let mut xh = x.clone();
        for v in xh.pixels.iter_mut() {
            *v = 2.0 * *v + 5.0;
        }
        let (s, a, b) = regressed_snr(&xh, &x);
        assert_eq!(s, f64::INFINITY);
        assert!((a - 0.5).abs() < 1e-12);
        assert!((b + 2.5).abs() < 1e-12);
    }

    #[test]
    fn regressed_snr_identity_fit() {
        let x = img(&[0.5, 1.5, -2.0, 3.0]);
        let (s, a, b) = regressed_snr(&x, &x);
        assert_eq!(s, f64::INFINITY);
        assert!((a - 1.0).abs() < 1e-12);
        assert!(b.abs() < 1e-12);
    }

    #[test]
    fn regressed_snr_constant_reconstruction_falls_back_to_mean() {
        let x = img(&[1.0, 2.0, 3.0]);
        let flat = img(&[7.0, 7.0, 7.0]);
        let (s, a, b) = regressed_snr(&flat, &x);
        assert_eq!(a, 0.0);
        assert!((b - 2.0).abs() < 1e-12);
        assert!(s.is_finite());
    }

    #[test]
    fn regressed_snr_matches_grid_search() {
        let mut rng = Rng::new(8);
        let mut xh = vec![0.0; 64];
        let mut x = vec![0.0; 64];
        rng.fill_normal(&mut xh, 0.0, 1.0);
        rng.fill_normal(&mut x, 0.5, 2.0);
        let (s, a_opt, b_opt) = regressed_snr_flat(&xh, &x);
        // Dense grid around the closed-form optimum.
        let mut best = f64::NEG_INFINITY;
        for ia in -40..=40 {
            for ib in -40..=40 {
                let a = a_opt + ia as f64 * 0.01;
                let b = b_opt + ib as f64 * 0.01;
                let fitted: Vec<f64> = xh.iter().map(|h| a * h + b).collect();
                best = best.max(snr_flat(&fitted, &x));
            }
        }
        assert!(s >= best - 1e-6, "closed form {s} vs grid {best}");
    }

    #[test]
    fn regressed_never_below_plain_snr() {
        let mut rng = Rng::new(19);
        for _ in 0..50 {
            let mut xh = vec![0.0; 32];
            let mut x = vec![0.0; 32];
            rng.fill_normal(&mut xh, 0.0, 1.0);
            rng.fill_normal(&mut x, 0.0, 1.0);
            let plain = snr_flat(&xh, &x);
            let (reg, _, _) = regressed_snr_flat(&xh, &x);
            assert!(reg >= plain - 1e-9);
        }
    }

    #[test]
    fn snr_is_permutation_invariant() {
        let xh = [0.3, 1.0, -2.0, 0.7];
        let x = [0.1, 1.2, -1.8, 0.4];
        let s1 = snr_flat(&xh, &x);
        let perm = [2usize, 0, 3, 1];
        let xh_p: Vec<f64> = perm.iter().map(|&i| xh[i]).collect();
        let x_p: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let s2 = snr_flat(&xh_p, &x_p);
        assert!((s1 - s2).abs() < 1e-12);
    }

    #[test]
    fn db_shift_under_noise_scaling() {
        // Halving the error norm raises SNR by 20 log10(2) = 6.0206 dB.
        let x = img(&[1.0, 2.0, 3.0, 4.0]);
        let mut noisy = x.clone();
        let mut half = x.clone();
        for (i, v) in noisy.pixels.iter_mut().enumerate() {
            *v += 0.1 * (i as f64 + 1.0);
        }
        for (i, v) in half.pixels.iter_mut().enumerate() {
            *v += 0.05 * (i as f64 + 1.0);
        }
        let gain = snr(&half, &x) - snr(&noisy, &x);
        assert!((gain - 20.0 * libm::log10(2.0)).abs() < 1e-9);
    }
}
