//! Constrained least-squares image reconstruction by projected gradient descent.
//!
//! The crate provides matrix-free linear operators (a discrete Radon transform
//! with an exact adjoint), direct reconstructions (BP/FBP), a zoo of analytic
//! projectors with condition checkers, iterative solvers (Landweber, PGD,
//! averaged PGD, and relaxed PGD with adaptive relaxation), a small residual
//! convolutional network trainable as a projector, a TV-ADMM baseline, phantom
//! and measurement simulation, and SNR metrics.
//!
//! Everything is `f64`, deterministic given explicit seeds, and usable without
//! the standard library (`alloc` required). File formats and the CLI live in
//! the companion `sparsect` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classical;
pub mod error;
mod fft;
pub mod image;
pub mod linops;
pub mod metrics;
pub mod neural;
pub mod phantoms;
pub mod projectors;
pub mod rng;
pub mod sinogram;
pub mod solvers;
pub mod tv;
pub mod vecmath;

pub use error::{Error, Result};
pub use image::Image;
pub use sinogram::{Sinogram, SinogramGeometry};
