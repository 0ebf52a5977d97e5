//! Iterative reconstruction engines: Landweber gradient step, PGD, averaged
//! PGD, and relaxed PGD with adaptive relaxation parameters, plus fixed-point
//! and local-minimizer certification.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::linops::{LinearOperator, SpectralBounds};
use crate::metrics;
use crate::projectors::{Projector, SetSampler};
use crate::rng::Rng;
use crate::vecmath;

/// The sequence {c_k} governing the relaxed solver's convergence rate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CSequence {
    /// c_k = C for all k.
    Constant(f64),
    /// Explicit values for k = 1, 2, ...; the last value repeats.
    Custom(Vec<f64>),
}

impl CSequence {
    /// c_k for iteration k >= 1.
    pub fn value(&self, k: usize) -> f64 {
        match self {
            CSequence::Constant(c) => *c,
            CSequence::Custom(values) => {
                let idx = (k - 1).min(values.len() - 1);
                values[idx]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CSequence::Constant(c) => {
                if !(c.is_finite() && *c > 0.0 && *c < 1.0) {
                    return Err(Error::Config(alloc::format!(
                        "constant c = {c} must lie in (0, 1)"
                    )));
                }
            }
            CSequence::Custom(values) => {
                if values.is_empty() {
                    return Err(Error::Config("custom c sequence must be nonempty".into()));
                }
                if values.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
                    return Err(Error::Config("custom c values must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Shared solver configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverConfig {
    /// Gradient step size.
    pub gamma: f64,
    /// Initial relaxation parameter in (0, 1].
    pub alpha0: f64,
    pub c_sequence: CSequence,
    pub max_iter: usize,
    /// Relative step threshold: stop when ||x_{k+1}-x_k|| / (1+||x_k||) falls
    /// below it.
    pub stop_tol: f64,
    /// Replace the first iteration's gradient step with the identity.
    pub skip_first_gradient: bool,
}

impl SolverConfig {
    pub fn new(gamma: f64) -> Self {
        SolverConfig {
            gamma,
            alpha0: 1.0,
            c_sequence: CSequence::Constant(0.99),
            max_iter: 500,
            stop_tol: 1e-6,
            skip_first_gradient: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::Config(alloc::format!(
                "gamma = {} must be positive",
                self.gamma
            )));
        }
        if !(self.alpha0 > 0.0 && self.alpha0 <= 1.0) {
            return Err(Error::Config(alloc::format!(
                "alpha0 = {} must lie in (0, 1]",
                self.alpha0
            )));
        }
        if !(self.stop_tol.is_finite() && self.stop_tol > 0.0) {
            return Err(Error::Config(alloc::format!(
                "stop_tol = {} must be positive",
                self.stop_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        self.c_sequence.validate()
    }
}

/// Step size from the two-sided eigenvalue rule, 2 / (l_max + l_min).
pub fn pgd_step_size(bounds: &SpectralBounds) -> f64 {
    2.0 / (bounds.lambda_max + bounds.lambda_min)
}

/// Conservative step size below 2 / l_max for averaged and relaxed iterations.
pub fn averaged_step_size(bounds: &SpectralBounds) -> f64 {
    0.9 * 2.0 / bounds.lambda_max
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TerminalStatus {
    Converged,
    MaxIter,
}

/// One iteration of a solver run.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub k: usize,
    /// ||x_{k+1} - x_k||
    pub step_norm: f64,
    /// ||z_k - x_k||
    pub z_dist: f64,
    pub alpha: f64,
    /// ||H x_k - y|| at the start of the iteration.
    pub data_residual: f64,
    /// c_k in effect (relaxed solver, k >= 1).
    pub c: Option<f64>,
    /// Whether the relaxation adjustment fired at this iteration.
    pub triggered: bool,
    /// SNR of x_{k+1} against the ground truth, when one was supplied.
    pub snr_db: Option<f64>,
}

/// Per-iteration convergence record of a solver run.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    pub status: TerminalStatus,
    /// Step norm exceeded 1e6 times the initial step norm (recorded, never
    /// thrown: deliberately unstable early iterations are part of the relaxed
    /// solver's working regime).
    pub diverged: bool,
}

impl SolverTrace {
    pub fn alphas_non_increasing(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].alpha <= w[0].alpha + 1e-15)
    }

    pub fn alphas_positive(&self) -> bool {
        self.records.iter().all(|r| r.alpha > 0.0)
    }

    pub fn final_alpha(&self) -> Option<f64> {
        self.records.last().map(|r| r.alpha)
    }

    /// Check the relaxed solver's residual bound
    /// `||r_k|| <= ||r_0|| * prod_{i<=k} c_i` at every iteration k >= 1,
    /// with a small floating-point allowance.
    pub fn residual_bound_ok(&self) -> bool {
        let Some(first) = self.records.first() else {
            return true;
        };
        let r0 = first.step_norm;
        let mut prod = 1.0;
        for rec in self.records.iter().skip(1) {
            let Some(c) = rec.c else {
                return false;
            };
            prod *= c;
            let bound = r0 * prod;
            if rec.step_norm > bound * (1.0 + 1e-9) + 1e-12 {
                return false;
            }
        }
        true
    }
}

fn check_shapes(
    op: &dyn LinearOperator,
    x0: &Image,
    y: &[f64],
    truth: Option<&Image>,
    context: &'static str,
) -> Result<()> {
    if x0.shape() != op.domain_shape() {
        return Err(Error::ShapeMismatch {
            context,
            expected: op.domain_shape(),
            got: x0.shape(),
        });
    }
    if y.len() != op.range_dim() {
        return Err(Error::ShapeMismatch {
            context,
            expected: op.range_shape(),
            got: (y.len(), 1),
        });
    }
    if let Some(t) = truth {
        if t.shape() != x0.shape() {
            return Err(Error::ShapeMismatch {
                context,
                expected: x0.shape(),
                got: t.shape(),
            });
        }
    }
    Ok(())
}

struct GradScratch {
    range: Vec<f64>,
    domain: Vec<f64>,
}

impl GradScratch {
    fn new(op: &dyn LinearOperator) -> Self {
        GradScratch {
            range: vec![0.0; op.range_dim()],
            domain: vec![0.0; op.domain_dim()],
        }
    }

    /// out = x - gamma * Ht(Hx - y); returns ||Hx - y||.
    fn step_into(
        &mut self,
        op: &dyn LinearOperator,
        x: &[f64],
        y: &[f64],
        gamma: f64,
        out: &mut [f64],
    ) -> f64 {
        op.apply(x, &mut self.range);
        for (r, yi) in self.range.iter_mut().zip(y) {
            *r -= yi;
        }
        let residual = vecmath::norm2(&self.range);
        op.apply_adjoint(&self.range, &mut self.domain);
        for i in 0..x.len() {
            out[i] = x[i] - gamma * self.domain[i];
        }
        residual
    }

    /// ||Hx - y|| without forming the gradient.
    fn data_residual(&mut self, op: &dyn LinearOperator, x: &[f64], y: &[f64]) -> f64 {
        op.apply(x, &mut self.range);
        for (r, yi) in self.range.iter_mut().zip(y) {
            *r -= yi;
        }
        vecmath::norm2(&self.range)
    }
}

/// One Landweber update: `x - gamma * Ht(Hx - y)`.
pub fn gradient_step(
    x: &Image,
    op: &dyn LinearOperator,
    y: &[f64],
    gamma: f64,
) -> Result<Image> {
    check_shapes(op, x, y, None, "gradient step")?;
    let mut scratch = GradScratch::new(op);
    let mut out = x.clone();
    scratch.step_into(op, &x.pixels, y, gamma, &mut out.pixels);
    Ok(out)
}

/// The relaxation update of the adaptive solver: when the projector
/// displacement grows faster than c_k allows, alpha shrinks by exactly the
/// factor that restores the bound. Returns (new alpha, triggered).
pub fn relaxation_update(alpha_prev: f64, c_k: f64, prev_dist: f64, cur_dist: f64) -> (f64, bool) {
    if cur_dist > c_k * prev_dist {
        // cur_dist > c_k * prev_dist >= 0, so the division is safe.
        (c_k * (prev_dist / cur_dist) * alpha_prev, true)
    } else {
        (alpha_prev, false)
    }
}

enum Relaxation {
    /// x_{k+1} = z_k.
    None,
    /// Fixed alpha.
    Fixed(f64),
    /// Adaptive alpha per the relaxed solver.
    Adaptive,
}

fn run_iterations(
    projector: &dyn Projector,
    op: &dyn LinearOperator,
    y: &[f64],
    cfg: &SolverConfig,
    x0: &Image,
    truth: Option<&Image>,
    relaxation: Relaxation,
) -> (Image, SolverTrace) {
    let mut scratch = GradScratch::new(op);
    let mut x = x0.clone();
    let mut v = x0.same_shape_zeros();
    let mut records = Vec::new();
    let mut status = TerminalStatus::MaxIter;
    let mut diverged = false;
    let mut first_step: Option<f64> = None;
    let mut alpha = match relaxation {
        Relaxation::None => 1.0,
        Relaxation::Fixed(a) => a,
        Relaxation::Adaptive => cfg.alpha0,
    };
    let mut prev_zdist = 0.0f64;

    for k in 0..cfg.max_iter {
        let data_residual = if cfg.skip_first_gradient && k == 0 {
            v.pixels.copy_from_slice(&x.pixels);
            scratch.data_residual(op, &x.pixels, y)
        } else {
            scratch.step_into(op, &x.pixels, y, cfg.gamma, &mut v.pixels)
        };
        let z = projector.apply(&v);
        let z_dist = z.dist2(&x);

        let mut c_used = None;
        let mut triggered = false;
        if let Relaxation::Adaptive = relaxation {
            if k >= 1 {
                let c_k = cfg.c_sequence.value(k);
                let (a, t) = relaxation_update(alpha, c_k, prev_zdist, z_dist);
                alpha = a;
                triggered = t;
                c_used = Some(c_k);
            }
            prev_zdist = z_dist;
        }

        let x_norm = x.norm2();
        let next = match relaxation {
            Relaxation::None => z,
            _ => {
                let mut n = x.clone();
                for (ni, zi) in n.pixels.iter_mut().zip(&z.pixels) {
                    *ni = (1.0 - alpha) * *ni + alpha * zi;
                }
                n
            }
        };
        let step_norm = next.dist2(&x);
        let snr_db = truth.map(|t| metrics::snr(&next, t));
        records.push(IterationRecord {
            k,
            step_norm,
            z_dist,
            alpha,
            data_residual,
            c: c_used,
            triggered,
            snr_db,
        });
        x = next;

        if !step_norm.is_finite() {
            diverged = true;
            break;
        }
        let first = *first_step.get_or_insert(step_norm);
        if step_norm > 1e6 * first && first > 0.0 {
            diverged = true;
            break;
        }
        if step_norm / (1.0 + x_norm) < cfg.stop_tol {
            status = TerminalStatus::Converged;
            break;
        }
    }

    (
        x,
        SolverTrace {
            records,
            status,
            diverged,
        },
    )
}

/// Projected gradient descent: `x_{k+1} = P(x_k - gamma * Ht(H x_k - y))`.
///
/// Stops when the relative step falls below `cfg.stop_tol` or after
/// `cfg.max_iter` iterations. Divergence (step norm exceeding 1e6 times the
/// initial step) is flagged in the trace, not raised.
pub fn pgd(
    projector: &dyn Projector,
    op: &dyn LinearOperator,
    y: &[f64],
    cfg: &SolverConfig,
    x0: &Image,
    truth: Option<&Image>,
) -> Result<(Image, SolverTrace)> {
    cfg.validate()?;
    check_shapes(op, x0, y, truth, "pgd")?;
    Ok(run_iterations(projector, op, y, cfg, x0, truth, Relaxation::None))
}

/// Averaged projected gradient descent:
/// `x_{k+1} = (1 - alpha) x_k + alpha * P(x_k - gamma * Ht(H x_k - y))`
/// with a fixed `alpha` in (0, 1).
pub fn averaged_pgd(
    projector: &dyn Projector,
    op: &dyn LinearOperator,
    y: &[f64],
    cfg: &SolverConfig,
    x0: &Image,
    alpha: f64,
    truth: Option<&Image>,
) -> Result<(Image, SolverTrace)> {
    cfg.validate()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(alloc::format!(
            "averaged iteration needs alpha in (0, 1), got {alpha}"
        )));
    }
    check_shapes(op, x0, y, truth, "averaged pgd")?;
    Ok(run_iterations(
        projector,
        op,
        y,
        cfg,
        x0,
        truth,
        Relaxation::Fixed(alpha),
    ))
}

/// Relaxed projected gradient descent with adaptive relaxation.
///
/// Per iteration: `z_k = F(x_k - gamma * Ht(H x_k - y))`; for k >= 1, if
/// `||z_k - x_k|| > c_k ||z_{k-1} - x_{k-1}||` then
/// `alpha_k = c_k (||z_{k-1} - x_{k-1}|| / ||z_k - x_k||) alpha_{k-1}`, else
/// `alpha_k = alpha_{k-1}`; then `x_{k+1} = (1 - alpha_k) x_k + alpha_k z_k`.
/// With `cfg.skip_first_gradient`, iteration 0 uses `z_0 = F(x_0)`.
///
/// The iterate sequence converges for arbitrary operators `F` whenever {c_k}
/// is eventually bounded by some C < 1; callers typically take
/// `x0 = A.reconstruct(&y)` from a [`crate::classical::ReconstructorA`].
pub fn rpgd(
    f: &dyn Projector,
    op: &dyn LinearOperator,
    y: &[f64],
    cfg: &SolverConfig,
    x0: &Image,
    truth: Option<&Image>,
) -> Result<(Image, SolverTrace)> {
    cfg.validate()?;
    check_shapes(op, x0, y, truth, "rpgd")?;
    Ok(run_iterations(f, op, y, cfg, x0, truth, Relaxation::Adaptive))
}

/// Normalized displacement of the combined operator at `x_star`:
/// `||F(x_star - gamma * Ht(H x_star - y)) - x_star|| / (1 + ||x_star||)`.
pub fn certify_fixed_point(
    f: &dyn Projector,
    op: &dyn LinearOperator,
    y: &[f64],
    x_star: &Image,
    gamma: f64,
) -> Result<f64> {
    check_shapes(op, x_star, y, None, "fixed point certificate")?;
    let mut scratch = GradScratch::new(op);
    let mut v = x_star.clone();
    scratch.step_into(op, &x_star.pixels, y, gamma, &mut v.pixels);
    let g = f.apply(&v);
    Ok(g.dist2(x_star) / (1.0 + x_star.norm2()))
}

/// Sampled local-minimizer certificate: true iff no set point within
/// `epsilon` of `x_star` improves the data residual by more than 1e-10.
pub fn certify_local_minimizer(
    x_star: &Image,
    op: &dyn LinearOperator,
    y: &[f64],
    sampler: &dyn SetSampler,
    epsilon: f64,
    n_samples: usize,
    seed: u64,
) -> Result<bool> {
    check_shapes(op, x_star, y, None, "local minimizer certificate")?;
    let mut scratch = GradScratch::new(op);
    let base = scratch.data_residual(op, &x_star.pixels, y);
    let mut rng = Rng::new(seed);
    let mut produced = 0usize;
    for _ in 0..n_samples {
        let Some(z) = sampler.sample_near(&x_star.pixels, epsilon, &mut rng) else {
            continue;
        };
        produced += 1;
        if scratch.data_residual(op, &z, y) < base - 1e-10 {
            return Ok(false);
        }
    }
    if produced == 0 {
        return Err(Error::SamplerFailure(
            "no set points within epsilon of the candidate",
        ));
    }
    Ok(true)
}
