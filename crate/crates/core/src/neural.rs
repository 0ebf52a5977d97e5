//! Small residual convolutional network trained as a projector via a
//! three-ensemble loss and a three-stage schedule.
//!
//! Architecture: conv(1->8, 3x3) -> ReLU -> conv(8->8, 3x3) -> ReLU ->
//! conv(8->1, 3x3), applied residually as `net(x) = x + conv_stack(x)`.
//! All arithmetic is f64 and the training loop is deterministic given
//! (seed, schedule, data).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::classical::ReconstructorA;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::linops::RadonTransform;
use crate::projectors::Projector;
use crate::rng::Rng;
use crate::vecmath;

pub const HIDDEN_CHANNELS: usize = 8;
pub const KERNEL: usize = 3;

/// Weights and biases of the fixed three-layer architecture, tied to the
/// training resolution. Weight layout is `[out_ch][in_ch][ky][kx]` flattened
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvNetParams {
    pub width: usize,
    pub height: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: Vec<f64>,
}

impl ConvNetParams {
    pub fn zeros(width: usize, height: usize) -> Self {
        let c = HIDDEN_CHANNELS;
        let k2 = KERNEL * KERNEL;
        ConvNetParams {
            width,
            height,
            w1: vec![0.0; c * 1 * k2],
            b1: vec![0.0; c],
            w2: vec![0.0; c * c * k2],
            b2: vec![0.0; c],
            w3: vec![0.0; 1 * c * k2],
            b3: vec![0.0; 1],
        }
    }

    /// He-normal init for the hidden layers; the last layer starts at zero so
    /// the residual net is exactly the identity before training.
    pub fn init(width: usize, height: usize, seed: u64) -> Self {
        let mut p = Self::zeros(width, height);
        let mut rng = Rng::new(seed).stream(0x1217);
        let k2 = (KERNEL * KERNEL) as f64;
        let std1 = libm::sqrt(2.0 / k2);
        let std2 = libm::sqrt(2.0 / (HIDDEN_CHANNELS as f64 * k2));
        rng.fill_normal(&mut p.w1, 0.0, std1);
        rng.fill_normal(&mut p.w2, 0.0, std2);
        p
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn n_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len() + self.w3.len() + self.b3.len()
    }

    fn arrays(&self) -> [&Vec<f64>; 6] {
        [&self.w1, &self.b1, &self.w2, &self.b2, &self.w3, &self.b3]
    }

    fn arrays_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.w3,
            &mut self.b3,
        ]
    }

    pub fn all_finite(&self) -> bool {
        self.arrays().iter().all(|a| vecmath::all_finite(a))
    }

    /// Residual application `x + conv_stack(x)`.
    pub fn forward(&self, x: &Image) -> Result<Image> {
        if x.shape() != (self.width, self.height) {
            return Err(Error::ShapeMismatch {
                context: "conv net forward",
                expected: (self.width, self.height),
                got: x.shape(),
            });
        }
        let cache = self.forward_cache(&x.pixels);
        let mut out = x.clone();
        vecmath::axpy(1.0, &cache.z3, &mut out.pixels);
        Ok(out)
    }

    fn forward_cache(&self, x: &[f64]) -> ForwardCache {
        let (w, h) = (self.width, self.height);
        let c = HIDDEN_CHANNELS;
        let nhw = w * h;
        let mut z1 = vec![0.0; c * nhw];
        conv_forward(x, 1, &self.w1, &self.b1, c, w, h, &mut z1);
        let a1: Vec<f64> = z1.iter().map(|v| v.max(0.0)).collect();
        let mut z2 = vec![0.0; c * nhw];
        conv_forward(&a1, c, &self.w2, &self.b2, c, w, h, &mut z2);
        let a2: Vec<f64> = z2.iter().map(|v| v.max(0.0)).collect();
        let mut z3 = vec![0.0; nhw];
        conv_forward(&a2, c, &self.w3, &self.b3, 1, w, h, &mut z3);
        ForwardCache { z1, a1, z2, a2, z3 }
    }

    /// SGD-with-momentum update from a clipped gradient.
    fn update(&mut self, grad: &ConvNetParams, velocity: &mut ConvNetParams, lr: f64, momentum: f64, clip: f64) {
        let gs = grad.arrays();
        let mut vs = velocity.arrays_mut();
        let mut ps = self.arrays_mut();
        for idx in 0..6 {
            let g = gs[idx];
            let v = &mut vs[idx];
            let p = &mut ps[idx];
            for i in 0..g.len() {
                let gc = g[i].clamp(-clip, clip);
                v[i] = momentum * v[i] + gc;
                p[i] -= lr * v[i];
            }
        }
    }
}

struct ForwardCache {
    z1: Vec<f64>,
    a1: Vec<f64>,
    z2: Vec<f64>,
    a2: Vec<f64>,
    z3: Vec<f64>,
}

/// Same-size 3x3 convolution with zero padding, channel-major buffers.
fn conv_forward(
    inp: &[f64],
    in_ch: usize,
    w: &[f64],
    b: &[f64],
    out_ch: usize,
    width: usize,
    height: usize,
    out: &mut [f64],
) {
    let nhw = width * height;
    for oc in 0..out_ch {
        let out_plane = &mut out[oc * nhw..(oc + 1) * nhw];
        out_plane.fill(b[oc]);
        for ic in 0..in_ch {
            let in_plane = &inp[ic * nhw..(ic + 1) * nhw];
            let wbase = ((oc * in_ch + ic) * KERNEL) * KERNEL;
            for ky in 0..KERNEL {
                let dy = ky as isize - 1;
                for kx in 0..KERNEL {
                    let dx = kx as isize - 1;
                    let wv = w[wbase + ky * KERNEL + kx];
                    if wv == 0.0 {
                        continue;
                    }
                    let y0 = (-dy).max(0) as usize;
                    let y1 = (height as isize - dy).min(height as isize) as usize;
                    let x0 = (-dx).max(0) as usize;
                    let x1 = (width as isize - dx).min(width as isize) as usize;
                    for y in y0..y1 {
                        let src = ((y as isize + dy) as usize) * width;
                        let dst = y * width;
                        for x in x0..x1 {
                            out_plane[dst + x] += wv * in_plane[src + (x as isize + dx) as usize];
                        }
                    }
                }
            }
        }
    }
}

/// Gradients of a convolution w.r.t. its weights and bias.
fn conv_backward_params(
    dout: &[f64],
    inp: &[f64],
    in_ch: usize,
    out_ch: usize,
    width: usize,
    height: usize,
    w_grad: &mut [f64],
    b_grad: &mut [f64],
) {
    let nhw = width * height;
    for oc in 0..out_ch {
        let dplane = &dout[oc * nhw..(oc + 1) * nhw];
        b_grad[oc] += dplane.iter().sum::<f64>();
        for ic in 0..in_ch {
            let in_plane = &inp[ic * nhw..(ic + 1) * nhw];
            let wbase = ((oc * in_ch + ic) * KERNEL) * KERNEL;
            for ky in 0..KERNEL {
                let dy = ky as isize - 1;
                for kx in 0..KERNEL {
                    let dx = kx as isize - 1;
                    let mut acc = 0.0;
                    let y0 = (-dy).max(0) as usize;
                    let y1 = (height as isize - dy).min(height as isize) as usize;
                    let x0 = (-dx).max(0) as usize;
                    let x1 = (width as isize - dx).min(width as isize) as usize;
                    for y in y0..y1 {
                        let src = ((y as isize + dy) as usize) * width;
                        let dst = y * width;
                        for x in x0..x1 {
                            acc += dplane[dst + x] * in_plane[src + (x as isize + dx) as usize];
                        }
                    }
                    w_grad[wbase + ky * KERNEL + kx] += acc;
                }
            }
        }
    }
}

/// Gradient of a convolution w.r.t. its input.
fn conv_backward_input(
    dout: &[f64],
    w: &[f64],
    in_ch: usize,
    out_ch: usize,
    width: usize,
    height: usize,
    din: &mut [f64],
) {
    let nhw = width * height;
    din.fill(0.0);
    for oc in 0..out_ch {
        let dplane = &dout[oc * nhw..(oc + 1) * nhw];
        for ic in 0..in_ch {
            let din_plane = &mut din[ic * nhw..(ic + 1) * nhw];
            let wbase = ((oc * in_ch + ic) * KERNEL) * KERNEL;
            for ky in 0..KERNEL {
                let dy = ky as isize - 1;
                for kx in 0..KERNEL {
                    let dx = kx as isize - 1;
                    let wv = w[wbase + ky * KERNEL + kx];
                    if wv == 0.0 {
                        continue;
                    }
                    let y0 = (-dy).max(0) as usize;
                    let y1 = (height as isize - dy).min(height as isize) as usize;
                    let x0 = (-dx).max(0) as usize;
                    let x1 = (width as isize - dx).min(width as isize) as usize;
                    for y in y0..y1 {
                        let src = ((y as isize + dy) as usize) * width;
                        let dst = y * width;
                        for x in x0..x1 {
                            din_plane[src + (x as isize + dx) as usize] += wv * dplane[dst + x];
                        }
                    }
                }
            }
        }
    }
}

/// Sum of squared l2 errors over the batch and its exact backpropagated
/// gradient, shaped like the parameters.
pub fn loss_and_grad(
    params: &ConvNetParams,
    batch: &[(&Image, &Image)],
) -> Result<(f64, ConvNetParams)> {
    if batch.is_empty() {
        return Err(Error::Config("loss needs a nonempty batch".into()));
    }
    let (w, h) = (params.width, params.height);
    let c = HIDDEN_CHANNELS;
    let nhw = w * h;
    let mut grad = ConvNetParams::zeros(w, h);
    let mut loss = 0.0;

    let mut dz3 = vec![0.0; nhw];
    let mut da2 = vec![0.0; c * nhw];
    let mut dz2 = vec![0.0; c * nhw];
    let mut da1 = vec![0.0; c * nhw];
    let mut dz1 = vec![0.0; c * nhw];

    for (input, target) in batch {
        if input.shape() != (w, h) || target.shape() != (w, h) {
            return Err(Error::ShapeMismatch {
                context: "loss batch",
                expected: (w, h),
                got: input.shape(),
            });
        }
        let cache = params.forward_cache(&input.pixels);
        // out = input + z3; d(loss)/d(out) = 2 (out - target) = d(loss)/d(z3).
        for i in 0..nhw {
            let out = input.pixels[i] + cache.z3[i];
            let err = out - target.pixels[i];
            loss += err * err;
            dz3[i] = 2.0 * err;
        }
        conv_backward_params(&dz3, &cache.a2, c, 1, w, h, &mut grad.w3, &mut grad.b3);
        conv_backward_input(&dz3, &params.w3, c, 1, w, h, &mut da2);
        for i in 0..c * nhw {
            dz2[i] = if cache.z2[i] > 0.0 { da2[i] } else { 0.0 };
        }
        conv_backward_params(&dz2, &cache.a1, c, c, w, h, &mut grad.w2, &mut grad.b2);
        conv_backward_input(&dz2, &params.w2, c, c, w, h, &mut da1);
        for i in 0..c * nhw {
            dz1[i] = if cache.z1[i] > 0.0 { da1[i] } else { 0.0 };
        }
        conv_backward_params(&dz1, &input.pixels, 1, c, w, h, &mut grad.w1, &mut grad.b1);
    }
    Ok((loss, grad))
}

/// The three perturbation families the projector is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EnsembleKind {
    /// No perturbation: inputs are the ground-truth images themselves.
    Identity,
    /// Linear reconstruction of each image's (optionally noisy) measurement.
    LinearRecon,
    /// Current network applied to the linear reconstruction; regenerated
    /// every epoch, so the perturbation tracks the training.
    Dynamic,
}

#[derive(Debug, Clone)]
pub struct PerturbationEnsemble {
    pub kind: EnsembleKind,
    /// (input, target) pairs; targets are always the ground-truth images.
    pub samples: Vec<(Image, Image)>,
}

/// Measurement corruption used when building the linear-recon ensemble.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleNoise {
    pub measurement_snr_db: Option<f64>,
    /// Probability that a training measurement also gets jittered view
    /// angles.
    pub view_jitter_prob: f64,
    pub angle_jitter_std_deg: f64,
    pub seed: u64,
}

impl EnsembleNoise {
    pub fn new(measurement_snr_db: Option<f64>, seed: u64) -> Self {
        EnsembleNoise {
            measurement_snr_db,
            view_jitter_prob: 0.2,
            angle_jitter_std_deg: 0.05,
            seed,
        }
    }
}

/// The linear-recon input A(H x) for one image, optionally with noise; the
/// draw is fully determined by (noise.seed, image index).
fn linear_recon_input(
    image: &Image,
    index: usize,
    op: &RadonTransform,
    a: &ReconstructorA,
    noise: Option<&EnsembleNoise>,
) -> Result<Image> {
    let mut sino = match noise {
        Some(cfg) => {
            let mut rng = Rng::new(cfg.seed).stream(index as u64);
            let jitter = rng.next_f64() < cfg.view_jitter_prob;
            let mut sino = if jitter {
                let geom = op.geometry();
                let angles: Vec<f64> = geom
                    .angles_deg
                    .iter()
                    .map(|ang| ang + cfg.angle_jitter_std_deg * rng.normal())
                    .collect();
                let raw = crate::sinogram::SinogramGeometry::with_raw_angles(
                    geom.width,
                    geom.height,
                    geom.pixel_size,
                    angles,
                    geom.n_offsets,
                )?;
                let jittered = RadonTransform::new(raw);
                let mut s = jittered.forward(image)?;
                s.angles_deg = geom.angles_deg.clone();
                s
            } else {
                op.forward(image)?
            };
            if let Some(db) = cfg.measurement_snr_db {
                let y_norm = vecmath::norm2(&sino.values);
                if y_norm > 1e-300 {
                    let mut n = vec![0.0; sino.values.len()];
                    rng.fill_normal(&mut n, 0.0, 1.0);
                    let ratio = libm::pow(10.0, db / 20.0);
                    let scale = y_norm / (ratio * vecmath::norm2(&n));
                    vecmath::axpy(scale, &n, &mut sino.values);
                }
            }
            sino
        }
        None => op.forward(image)?,
    };
    // Reconstruction always assumes the nominal geometry.
    sino.angles_deg = op.geometry().angles_deg.clone();
    a.reconstruct(&sino)
}

/// Build all three ensembles against the current parameters. The identity and
/// linear-recon ensembles are reproducible across calls with the same noise
/// seed; the dynamic ensemble reflects `params_current`.
pub fn build_ensembles(
    train_images: &[Image],
    op: &RadonTransform,
    a: &ReconstructorA,
    params_current: &ConvNetParams,
    noise: Option<&EnsembleNoise>,
) -> Result<Vec<PerturbationEnsemble>> {
    if train_images.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    let identity = PerturbationEnsemble {
        kind: EnsembleKind::Identity,
        samples: train_images.iter().map(|x| (x.clone(), x.clone())).collect(),
    };
    let mut linear = Vec::with_capacity(train_images.len());
    for (i, x) in train_images.iter().enumerate() {
        linear.push((linear_recon_input(x, i, op, a, noise)?, x.clone()));
    }
    let dynamic = PerturbationEnsemble {
        kind: EnsembleKind::Dynamic,
        samples: linear
            .iter()
            .map(|(inp, target)| Ok((params_current.forward(inp)?, target.clone())))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(vec![
        identity,
        PerturbationEnsemble {
            kind: EnsembleKind::LinearRecon,
            samples: linear,
        },
        dynamic,
    ])
}

/// Epoch counts and optimizer hyperparameters for the three-stage schedule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainingSchedule {
    pub t1: usize,
    pub t2: usize,
    pub t3: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub momentum: f64,
    pub grad_clip: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainingSchedule {
    pub fn new(t1: usize, t2: usize, t3: usize, seed: u64) -> Self {
        TrainingSchedule {
            t1,
            t2,
            t3,
            lr_start: 1e-2,
            lr_end: 1e-3,
            momentum: 0.99,
            grad_clip: 1e-2,
            batch_size: 2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr_end > 0.0 && self.lr_end <= self.lr_start) {
            return Err(Error::Config(alloc::format!(
                "need 0 < lr_end <= lr_start, got {} and {}",
                self.lr_end,
                self.lr_start
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(alloc::format!(
                "momentum {} must lie in [0, 1)",
                self.momentum
            )));
        }
        if !(self.grad_clip > 0.0) {
            return Err(Error::Config("grad_clip must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }

    /// Learning rate for an epoch: geometric interpolation from lr_start to
    /// lr_end across stage 1, then constant lr_end.
    pub fn learning_rate(&self, stage: usize, epoch_in_stage: usize) -> f64 {
        if stage == 1 {
            if self.t1 <= 1 {
                return self.lr_start;
            }
            let frac = epoch_in_stage as f64 / (self.t1 - 1) as f64;
            self.lr_start * libm::pow(self.lr_end / self.lr_start, frac)
        } else {
            self.lr_end
        }
    }
}

/// Loss trajectory entry.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochStats {
    pub stage: usize,
    pub epoch: usize,
    pub lr: f64,
    /// Mean per-sample loss over the epoch's pool.
    pub mean_loss: f64,
}

/// Outcome of a training run: the stage-1 checkpoint (the plain regressor)
/// and the final projector, with the loss curve.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub regressor: ConvNetParams,
    pub projector: ConvNetParams,
    pub epochs: Vec<EpochStats>,
}

/// Three-stage training: stage 1 on the linear-recon ensemble alone, stage 2
/// adds the dynamic ensemble (regenerated each epoch from the parameters at
/// the previous epoch's end), stage 3 adds the identity ensemble. SGD with
/// momentum, per-element gradient clipping, and the stage-1 learning-rate
/// decay. The stage-1 checkpoint is kept as the regressor.
pub fn train(
    schedule: &TrainingSchedule,
    train_images: &[Image],
    op: &RadonTransform,
    a: &ReconstructorA,
    noise: Option<&EnsembleNoise>,
) -> Result<TrainingRun> {
    train_with_init(schedule, None, train_images, op, a, noise)
}

/// [`train`] starting from explicit parameters, e.g. a stage-1 checkpoint.
pub fn train_with_init(
    schedule: &TrainingSchedule,
    init: Option<&ConvNetParams>,
    train_images: &[Image],
    op: &RadonTransform,
    a: &ReconstructorA,
    noise: Option<&EnsembleNoise>,
) -> Result<TrainingRun> {
    schedule.validate()?;
    if train_images.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    let (w, h) = train_images[0].shape();
    for img in train_images {
        if img.shape() != (w, h) {
            return Err(Error::ShapeMismatch {
                context: "training set",
                expected: (w, h),
                got: img.shape(),
            });
        }
    }

    let mut params = match init {
        Some(p) => {
            if p.resolution() != (w, h) {
                return Err(Error::ShapeMismatch {
                    context: "training init",
                    expected: (w, h),
                    got: p.resolution(),
                });
            }
            p.clone()
        }
        None => ConvNetParams::init(w, h, schedule.seed),
    };
    let mut velocity = ConvNetParams::zeros(w, h);
    let mut rng = Rng::new(schedule.seed).stream(0x5481);

    // The identity and linear-recon inputs never change across epochs.
    let mut linear_inputs = Vec::with_capacity(train_images.len());
    for (i, x) in train_images.iter().enumerate() {
        linear_inputs.push(linear_recon_input(x, i, op, a, noise)?);
    }

    let mut epochs = Vec::new();
    let mut regressor: Option<ConvNetParams> = None;

    for stage in 1..=3usize {
        let n_epochs = match stage {
            1 => schedule.t1,
            2 => schedule.t2,
            _ => schedule.t3,
        };
        for epoch in 0..n_epochs {
            // Dynamic perturbations from the parameters at the previous
            // epoch's end.
            let dynamic_inputs: Option<Vec<Image>> = if stage >= 2 {
                Some(
                    linear_inputs
                        .iter()
                        .map(|inp| params.forward(inp))
                        .collect::<Result<Vec<_>>>()?,
                )
            } else {
                None
            };

            // Pool of (input index, source) pairs for the active ensembles.
            #[derive(Clone, Copy)]
            enum Source {
                Identity,
                Linear,
                Dynamic,
            }
            let mut pool: Vec<(usize, Source)> = Vec::new();
            for i in 0..train_images.len() {
                pool.push((i, Source::Linear));
            }
            if stage >= 2 {
                for i in 0..train_images.len() {
                    pool.push((i, Source::Dynamic));
                }
            }
            if stage >= 3 {
                for i in 0..train_images.len() {
                    pool.push((i, Source::Identity));
                }
            }
            rng.shuffle(&mut pool);

            let lr = schedule.learning_rate(stage, epoch);
            let mut epoch_loss = 0.0;
            for chunk in pool.chunks(schedule.batch_size) {
                let batch: Vec<(&Image, &Image)> = chunk
                    .iter()
                    .map(|&(i, src)| {
                        let input = match src {
                            Source::Identity => &train_images[i],
                            Source::Linear => &linear_inputs[i],
                            Source::Dynamic => {
                                &dynamic_inputs.as_ref().expect("stage >= 2")[i]
                            }
                        };
                        (input, &train_images[i])
                    })
                    .collect();
                let (loss, grad) = loss_and_grad(&params, &batch)?;
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss { stage, epoch });
                }
                params.update(&grad, &mut velocity, lr, schedule.momentum, schedule.grad_clip);
                epoch_loss += loss;
            }
            epochs.push(EpochStats {
                stage,
                epoch,
                lr,
                mean_loss: epoch_loss / pool.len() as f64,
            });
        }
        if stage == 1 {
            regressor = Some(params.clone());
        }
    }

    Ok(TrainingRun {
        regressor: regressor.expect("stage 1 always completes"),
        projector: params,
        epochs,
    })
}

/// Mean relative idempotence defect `||P(P(v)) - P(v)|| / ||P(v)||` over the
/// given inputs; reported as a tracked metric after training, not asserted.
pub fn idempotence_defect(params: &ConvNetParams, inputs: &[Image]) -> Result<f64> {
    if inputs.is_empty() {
        return Err(Error::Config("idempotence defect needs inputs".into()));
    }
    let mut acc = 0.0;
    for v in inputs {
        let p = params.forward(v)?;
        let pp = params.forward(&p)?;
        acc += pp.dist2(&p) / p.norm2().max(1e-300);
    }
    Ok(acc / inputs.len() as f64)
}

/// A frozen network used as the nonlinear operator in the relaxed solver.
#[derive(Debug, Clone)]
pub struct NeuralProjector {
    pub params: ConvNetParams,
}

impl Projector for NeuralProjector {
    fn apply(&self, x: &Image) -> Image {
        self.params
            .forward(x)
            .expect("neural projector applied at its training resolution")
    }

    fn descriptor(&self) -> String {
        alloc::format!(
            "residual conv net projector ({}x{})",
            self.params.width,
            self.params.height
        )
    }
}
