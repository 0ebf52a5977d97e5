//! Per-iteration diagnosis of the relaxed solver at CT scale.

use sparsect_core::classical::{ReconKind, ReconstructorA};
use sparsect_core::image::Image;
use sparsect_core::linops::{estimate_spectral_bounds, RadonTransform};
use sparsect_core::metrics::regressed_snr;
use sparsect_core::neural::{train, NeuralProjector, TrainingSchedule};
use sparsect_core::phantoms::{
    dataset_seeds, generate_phantom, simulate_measurement, MeasurementConfig, PhantomKind,
    PhantomSpec,
};
use sparsect_core::projectors::{ConvexProjector, ConvexSetSpec, Projector};
use sparsect_core::sinogram::SinogramGeometry;
use sparsect_core::solvers::{rpgd, CSequence, SolverConfig};

const SIZE: usize = 32;
const N_VIEWS: usize = 45;

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
    let n_offsets = SinogramGeometry::default_n_offsets(SIZE, SIZE);
    let geom = SinogramGeometry::new(
        SIZE,
        SIZE,
        1.0,
        SinogramGeometry::uniform_angles(N_VIEWS),
        n_offsets,
    )
    .unwrap();
    let radon = RadonTransform::new(geom.clone());
    let fbp = ReconstructorA::new(ReconKind::Fbp, RadonTransform::new(geom.clone()));
    let bounds = estimate_spectral_bounds(&radon, 1e-8, 5000);
    println!("lambda_max {:.1}", bounds.lambda_max);

    let (train_seeds, test_seeds) = dataset_seeds(31_000, 150, 3);
    let train_images: Vec<Image> = train_seeds.iter().map(|&s| phantom(s)).collect();
    let truth = phantom(test_seeds[0]);
    let sim = simulate_measurement(
        &truth,
        &MeasurementConfig::new(N_VIEWS, n_offsets, test_seeds[0] ^ 0xdead),
    )
    .unwrap();
    let x0 = fbp.reconstruct(&sim.sinogram).unwrap();
    println!("FBP snr: {:.2}", regressed_snr(&x0, &truth).0);

    // Sanity: RPGD with a box projector should improve data consistency.
    let boxp = ConvexProjector::new(
        ConvexSetSpec::uniform_box(0.0, 350.0, SIZE * SIZE),
        SIZE * SIZE,
    )
    .unwrap();
    run_one("box", &boxp, &radon, &sim.sinogram.values, &x0, &truth, 0.9 * 2.0 / bounds.lambda_max, 2000);

    let args: Vec<String> = std::env::args().collect();
    let t1: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(40);
    let t2: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(20);
    let t3: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(10);
    let lr_end: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(1e-3);
    let mut schedule = TrainingSchedule::new(t1, t2, t3, 91);
    schedule.lr_end = lr_end;
    let run = train(&schedule, &train_images, &radon, &fbp, None).unwrap();
    println!(
        "loss curve: {:?}",
        run.epochs
            .iter()
            .map(|e| (e.stage, e.mean_loss.round()))
            .collect::<Vec<_>>()
    );
    let reg_out = run.regressor.forward(&x0).unwrap();
    println!("REG snr: {:.2}", regressed_snr(&reg_out, &truth).0);
    let proj_out = run.projector.forward(&x0).unwrap();
    println!("PROJ(fbp) snr: {:.2}", regressed_snr(&proj_out, &truth).0);

    // Behavior near the manifold.
    let p_truth = run.projector.forward(&truth).unwrap();
    println!(
        "||P(truth)-truth|| = {:.2} (||truth|| = {:.2})",
        p_truth.dist2(&truth),
        truth.norm2()
    );
    let pp = run.projector.forward(&proj_out).unwrap();
    println!("||P(P(fbp))-P(fbp)|| = {:.2}", pp.dist2(&proj_out));
    // Effective gain of one application along the truth direction.
    let dot = |a: &Image, b: &Image| -> f64 {
        a.pixels.iter().zip(&b.pixels).map(|(x, y)| x * y).sum()
    };
    let g = dot(&p_truth, &truth) / dot(&truth, &truth);
    let mut resid_vec = p_truth.clone();
    for (r, t) in resid_vec.pixels.iter_mut().zip(&truth.pixels) {
        *r -= t;
    }
    let cos = dot(&resid_vec, &truth) / (resid_vec.norm2() * truth.norm2());
    println!("gain <P(t),t>/<t,t> = {g:.5}, cos(P(t)-t, t) = {cos:.3}");
    let mut cur = truth.clone();
    for app in 1..=6 {
        cur = run.projector.forward(&cur).unwrap();
        println!(
            "  app {app}: gain vs truth {:.5}, dist {:.1}",
            dot(&cur, &truth) / dot(&truth, &truth),
            cur.dist2(&truth)
        );
    }
    let mut drift = proj_out.clone();
    for _ in 0..20 {
        drift = run.projector.forward(&drift).unwrap();
    }
    println!(
        "after 20 repeated applications: snr {:.2}, dist to first {:.2}",
        regressed_snr(&drift, &truth).0,
        drift.dist2(&proj_out)
    );

    let neural = NeuralProjector {
        params: run.projector.clone(),
    };
    for c in [0.99, 0.9, 0.8, 0.6] {
        for scale in [0.3, 0.9] {
            run_one_c(
                &format!("cnn c={c} s={scale}"),
                &neural,
                &radon,
                &sim.sinogram.values,
                &x0,
                &truth,
                scale * 2.0 / bounds.lambda_max,
                1500,
                c,
            );
        }
    }
    let reg_f = NeuralProjector {
        params: run.regressor.clone(),
    };
    run_one(
        "regressor-as-F",
        &reg_f,
        &radon,
        &sim.sinogram.values,
        &x0,
        &truth,
        0.9 * 2.0 / bounds.lambda_max,
        1500,
    );
}

fn run_one(
    tag: &str,
    f: &dyn Projector,
    radon: &RadonTransform,
    y: &[f64],
    x0: &Image,
    truth: &Image,
    gamma: f64,
    max_iter: usize,
) {
    run_one_c(tag, f, radon, y, x0, truth, gamma, max_iter, 0.99)
}

#[allow(clippy::too_many_arguments)]
fn run_one_c(
    tag: &str,
    f: &dyn Projector,
    radon: &RadonTransform,
    y: &[f64],
    x0: &Image,
    truth: &Image,
    gamma: f64,
    max_iter: usize,
    c: f64,
) {
    let mut cfg = SolverConfig::new(gamma);
    cfg.c_sequence = CSequence::Constant(c);
    cfg.skip_first_gradient = true;
    cfg.max_iter = max_iter;
    cfg.stop_tol = 1e-6;
    let (x, trace) = rpgd(f, radon, y, &cfg, x0, Some(truth)).unwrap();
    println!(
        "== {tag}: status {:?} diverged {} iters {}",
        trace.status,
        trace.diverged,
        trace.records.len()
    );
    let peak = trace
        .records
        .iter()
        .filter_map(|r| r.snr_db.map(|s| (s, r.k)))
        .fold((f64::NEG_INFINITY, 0), |acc, v| if v.0 > acc.0 { v } else { acc });
    println!("  peak snr {:.2} at k {}", peak.0, peak.1);
    for r in trace
        .records
        .iter()
        .take(6)
        .chain(trace.records.iter().skip(6).step_by(200))
    {
        println!(
            "  k {:4} alpha {:.3e} zdist {:.3e} step {:.3e} resid {:.3e} snr {:.2}",
            r.k,
            r.alpha,
            r.z_dist,
            r.step_norm,
            r.data_residual,
            r.snr_db.unwrap_or(f64::NAN)
        );
    }
    println!("  final regressed snr {:.2}", regressed_snr(&x, truth).0);
}
