//! Exploration harness for the end-to-end benchmark; not part of the test
//! suite. Prints the method means so schedules and step sizes can be tuned.

use std::time::Instant;

use sparsect_core::classical::{ReconKind, ReconstructorA};
use sparsect_core::image::Image;
use sparsect_core::linops::{estimate_spectral_bounds, RadonTransform};
use sparsect_core::metrics::{self, regressed_snr};
use sparsect_core::neural::{train, EnsembleNoise, NeuralProjector, TrainingSchedule};
use sparsect_core::phantoms::{
    dataset_seeds, generate_phantom, simulate_measurement, MeasurementConfig, PhantomKind,
    PhantomSpec,
};
use sparsect_core::sinogram::SinogramGeometry;
use sparsect_core::solvers::{rpgd, CSequence, SolverConfig};
use sparsect_core::tv::lambda_grid_search;

const SIZE: usize = 32;

fn phantom(seed: u64) -> Image {
    generate_phantom(&PhantomSpec {
        kind: PhantomKind::RandomEllipses {
            n_ellipses: 6,
            intensity_range: (0.0, 350.0),
            seed,
        },
        size: SIZE,
    })
    .unwrap()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let t1: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(15);
    let t2: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(8);
    let t3: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(4);
    let n_train: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(475);
    let tv_grid: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(20);
    let n_views: usize = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(45);
    let c_value: f64 = args.get(7).map(|s| s.parse().unwrap()).unwrap_or(0.99);

    let start = Instant::now();
    let n_offsets = SinogramGeometry::default_n_offsets(SIZE, SIZE);
    let geom = SinogramGeometry::new(
        SIZE,
        SIZE,
        1.0,
        SinogramGeometry::uniform_angles(n_views),
        n_offsets,
    )
    .unwrap();
    let radon = RadonTransform::new(geom.clone());
    let fbp = ReconstructorA::new(ReconKind::Fbp, RadonTransform::new(geom.clone()));

    let (train_seeds, test_seeds) = dataset_seeds(31_000, n_train, 25);
    let train_images: Vec<Image> = train_seeds.iter().map(|&s| phantom(s)).collect();
    let test_images: Vec<Image> = test_seeds.iter().map(|&s| phantom(s)).collect();
    println!("[{:6.1?}] dataset built", start.elapsed());

    // Noiseless measurements with default angle jitter.
    let sims: Vec<_> = test_seeds
        .iter()
        .zip(&test_images)
        .map(|(&s, x)| {
            let cfg = MeasurementConfig::new(n_views, n_offsets, s ^ 0xdead);
            simulate_measurement(x, &cfg).unwrap()
        })
        .collect();

    let bounds = estimate_spectral_bounds(&radon, 1e-8, 5000);
    println!(
        "[{:6.1?}] lambda_max = {:.2}, lambda_min = {:.2}",
        start.elapsed(),
        bounds.lambda_max,
        bounds.lambda_min
    );

    // FBP baseline.
    let fbp_recons: Vec<Image> = sims
        .iter()
        .map(|s| fbp.reconstruct(&s.sinogram).unwrap())
        .collect();
    let fbp_mean = mean_reg_snr(&fbp_recons, &test_images);
    println!("[{:6.1?}] FBP  mean regressed SNR = {fbp_mean:.2} dB", start.elapsed());

    // TV with per-image oracle grid search.
    let mut tv_sum = 0.0;
    for (i, sim) in sims.iter().enumerate() {
        let x0 = &fbp_recons[i];
        let res = lambda_grid_search(&radon, &sim.sinogram.values, &test_images[i], tv_grid, x0)
            .unwrap();
        tv_sum += res.best_regressed_snr_db;
        if i == 0 {
            println!("  tv grid image 0: best lambda {:.3e} -> {:.2} dB", res.best_lambda, res.best_regressed_snr_db);
        }
    }
    let tv_mean = tv_sum / sims.len() as f64;
    println!("[{:6.1?}] TV   mean regressed SNR = {tv_mean:.2} dB", start.elapsed());

    // Training (noiseless).
    let schedule = TrainingSchedule::new(t1, t2, t3, 91);
    let run = train(&schedule, &train_images, &radon, &fbp, None).unwrap();
    println!(
        "[{:6.1?}] trained: first-epoch loss {:.3e}, last {:.3e}",
        start.elapsed(),
        run.epochs.first().unwrap().mean_loss,
        run.epochs.last().unwrap().mean_loss
    );

    // Regressor = stage-1 checkpoint applied to FBP.
    let reg_recons: Vec<Image> = fbp_recons
        .iter()
        .map(|f| run.regressor.forward(f).unwrap())
        .collect();
    let reg_mean = mean_reg_snr(&reg_recons, &test_images);
    println!("[{:6.1?}] REG  mean regressed SNR = {reg_mean:.2} dB", start.elapsed());

    // RPGD with the trained projector, gamma tuned over a small grid.
    let projector = NeuralProjector {
        params: run.projector.clone(),
    };
    let mut best = (f64::NEG_INFINITY, 0.0, Vec::new());
    for scale in [0.3, 0.9, 1.5] {
        let gamma = scale * 2.0 / bounds.lambda_max;
        let mut cfg = SolverConfig::new(gamma);
        cfg.c_sequence = CSequence::Constant(c_value);
        cfg.alpha0 = 1.0;
        cfg.skip_first_gradient = true;
        cfg.max_iter = 400;
        cfg.stop_tol = 1e-6;
        let recons: Vec<Image> = sims
            .iter()
            .enumerate()
            .map(|(i, sim)| {
                rpgd(
                    &projector,
                    &radon,
                    &sim.sinogram.values,
                    &cfg,
                    &fbp_recons[i],
                    None,
                )
                .unwrap()
                .0
            })
            .collect();
        let mean = mean_reg_snr(&recons, &test_images);
        println!(
            "[{:6.1?}]   rpgd gamma-scale {scale}: {mean:.2} dB",
            start.elapsed()
        );
        if mean > best.0 {
            best = (mean, scale, recons);
        }
    }
    println!("RPGD mean regressed SNR = {:.2} dB (gamma scale {})", best.0, best.1);

    // Sinogram-consistency ordering.
    let sino_rpgd = mean_sino_snr(&radon, &best.2, &sims);
    let sino_reg = mean_sino_snr(&radon, &reg_recons, &sims);
    println!("sinogram SNR: RPGD {sino_rpgd:.2} dB vs REG {sino_reg:.2} dB");

    println!("\nsummary: FBP {fbp_mean:.2} | TV {tv_mean:.2} | REG {reg_mean:.2} | RPGD {:.2}", best.0);
    println!("orderings: FBP<TV {}, TV<=RPGD {}, FBP<REG {}, sinoRPGD>=sinoREG {}",
        fbp_mean < tv_mean, tv_mean <= best.0, fbp_mean < reg_mean, sino_rpgd >= sino_reg);
    println!("total {:?}", start.elapsed());
}

fn mean_reg_snr(recons: &[Image], truths: &[Image]) -> f64 {
    recons
        .iter()
        .zip(truths)
        .map(|(r, t)| regressed_snr(r, t).0)
        .sum::<f64>()
        / recons.len() as f64
}

fn mean_sino_snr(
    radon: &RadonTransform,
    recons: &[Image],
    sims: &[sparsect_core::phantoms::SimulatedMeasurement],
) -> f64 {
    recons
        .iter()
        .zip(sims)
        .map(|(r, s)| metrics::sinogram_snr(radon, r, &s.clean).unwrap())
        .sum::<f64>()
        / recons.len() as f64
}
