//! Solver checks against independent closed-form oracles: equality-constrained
//! least squares for the affine-subspace case, KKT conditions for the box
//! case, and fixed-point displacement for the averaged iteration.

use nalgebra::{DMatrix, DVector};
use sparsect_core::image::Image;
use sparsect_core::linops::{estimate_spectral_bounds, DenseOperator, LinearOperator};
use sparsect_core::projectors::{ConvexProjector, ConvexSetSpec};
use sparsect_core::rng::Rng;
use sparsect_core::solvers::{
    averaged_pgd, averaged_step_size, certify_fixed_point, certify_local_minimizer, pgd,
    pgd_step_size, SolverConfig, TerminalStatus,
};
use sparsect_core::tv::tv_objective;
use sparsect_core::vecmath;

fn img(v: &[f64]) -> Image {
    Image::from_pixels(v.len(), 1, 1.0, v.to_vec()).unwrap()
}

fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.normal())
}

/// Well-conditioned square matrix with singular values in [1, 2].
fn conditioned_matrix(n: usize, rng: &mut Rng) -> DMatrix<f64> {
    let q = random_matrix(n, n, rng).qr().q();
    let p = random_matrix(n, n, rng).qr().q();
    let s = DVector::from_fn(n, |i, _| 1.0 + i as f64 / (n - 1) as f64);
    q * DMatrix::from_diagonal(&s) * p.transpose()
}

#[test]
fn pgd_on_affine_subspace_matches_constrained_normal_equations() {
    let n = 16;
    let k = 4;
    let mut rng = Rng::new(314);
    let h = conditioned_matrix(n, &mut rng);
    let basis_q = random_matrix(n, k, &mut rng).qr().q();
    let offset = DVector::from_fn(n, |_, _| rng.normal());
    let y = DVector::from_fn(n, |_, _| rng.normal());

    // Oracle: minimize ||H(o + Bc) - y|| over c via the normal equations.
    let hb = &h * &basis_q;
    let rhs = hb.transpose() * (&y - &h * &offset);
    let c = (hb.transpose() * &hb)
        .lu()
        .solve(&rhs)
        .expect("well-conditioned normal equations");
    let x_oracle = &offset + &basis_q * c;

    let op = DenseOperator::new(n, n, h.transpose().iter().cloned().collect()).unwrap();
    // nalgebra iterates column-major; transposing first gives row-major H.
    let basis: Vec<Vec<f64>> = (0..k)
        .map(|j| basis_q.column(j).iter().cloned().collect())
        .collect();
    let spec = ConvexSetSpec::AffineSubspace {
        basis,
        offset: offset.iter().cloned().collect(),
    };
    let proj = ConvexProjector::new(spec, n).unwrap();

    let bounds = estimate_spectral_bounds(&op, 1e-12, 100_000);
    assert!(bounds.lambda_min > 0.5, "{bounds:?}");
    let mut cfg = SolverConfig::new(pgd_step_size(&bounds));
    cfg.stop_tol = 1e-13;
    cfg.max_iter = 50_000;
    let y_flat: Vec<f64> = y.iter().cloned().collect();
    let (x, trace) = pgd(&proj, &op, &y_flat, &cfg, &img(&vec![0.0; n]), None).unwrap();
    assert_eq!(trace.status, TerminalStatus::Converged);

    let oracle_flat: Vec<f64> = x_oracle.iter().cloned().collect();
    let rel = vecmath::rel_l2_dist(&x.pixels, &oracle_flat);
    assert!(rel < 1e-8, "solution differs from oracle by {rel}");

    // Objective agreement (data term only; lambda = 0 TV objective).
    let obj_pgd = tv_objective(&op, &y_flat, 0.0, &x) * 2.0;
    let obj_oracle = tv_objective(&op, &y_flat, 0.0, &img(&oracle_flat)) * 2.0;
    assert!(
        (obj_pgd - obj_oracle).abs() <= 1e-6 * obj_oracle.max(1.0),
        "objective {obj_pgd} vs oracle {obj_oracle}"
    );
}

#[test]
fn pgd_box_solution_passes_kkt_and_local_certificate() {
    let n = 16;
    let mut rng = Rng::new(2718);
    let h = conditioned_matrix(n, &mut rng);
    let op = DenseOperator::new(n, n, h.transpose().iter().cloned().collect()).unwrap();
    // Target outside the box so some constraints go active.
    let y: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 3.0)).collect();

    let spec = ConvexSetSpec::uniform_box(0.0, 1.0, n);
    let proj = ConvexProjector::new(spec.clone(), n).unwrap();
    let bounds = estimate_spectral_bounds(&op, 1e-12, 100_000);
    let mut cfg = SolverConfig::new(pgd_step_size(&bounds));
    cfg.stop_tol = 1e-13;
    cfg.max_iter = 50_000;
    let (x, _) = pgd(&proj, &op, &y, &cfg, &img(&vec![0.5; n]), None).unwrap();

    // KKT via the clamped-gradient oracle: the projected gradient must vanish.
    let mut hx = vec![0.0; n];
    op.apply(&x.pixels, &mut hx);
    for (v, yi) in hx.iter_mut().zip(&y) {
        *v -= yi;
    }
    let mut grad = vec![0.0; n];
    op.apply_adjoint(&hx, &mut grad);
    for i in 0..n {
        let xi = x.pixels[i];
        if xi <= 1e-9 {
            assert!(grad[i] >= -1e-6, "active-low KKT violated at {i}: {}", grad[i]);
        } else if xi >= 1.0 - 1e-9 {
            assert!(grad[i] <= 1e-6, "active-high KKT violated at {i}: {}", grad[i]);
        } else {
            assert!(grad[i].abs() <= 1e-6, "interior KKT violated at {i}: {}", grad[i]);
        }
    }

    let ok = certify_local_minimizer(&x, &op, &y, &spec, 0.1, 2000, 99).unwrap();
    assert!(ok, "sampled certificate rejected a KKT point");

    // A converged iterate is a fixed point of the combined operator.
    let fp = certify_fixed_point(&proj, &op, &y, &x, cfg.gamma).unwrap();
    assert!(fp < 1e-6, "fixed point displacement {fp}");
}

#[test]
fn averaged_pgd_converges_on_rank_deficient_problems() {
    let (m, n) = (12, 24);
    let mut rng = Rng::new(161803);
    let h = random_matrix(m, n, &mut rng);
    let op = DenseOperator::new(m, n, h.transpose().iter().cloned().collect()).unwrap();
    let y: Vec<f64> = (0..m).map(|_| rng.normal()).collect();

    let bounds = estimate_spectral_bounds(&op, 1e-12, 100_000);
    assert_eq!(bounds.lambda_min, 0.0, "rank-deficiency rule");
    let gamma = averaged_step_size(&bounds);
    let proj = ConvexProjector::new(ConvexSetSpec::uniform_box(0.0, 1.0, n), n).unwrap();
    let mut cfg = SolverConfig::new(gamma);
    cfg.stop_tol = 1e-10;
    cfg.max_iter = 50_000;

    let x0_a = img(&vec![0.0; n]);
    let mut x0_b = img(&vec![0.0; n]);
    Rng::new(4).fill_uniform(&mut x0_b.pixels, 0.0, 1.0);
    for x0 in [x0_a, x0_b] {
        let (x, trace) = averaged_pgd(&proj, &op, &y, &cfg, &x0, 0.5, None).unwrap();
        assert_eq!(trace.status, TerminalStatus::Converged, "did not converge");
        // The output is a fixed point of the combined operator: apply it once
        // and measure the displacement.
        let fp = certify_fixed_point(&proj, &op, &y, &x, gamma).unwrap();
        assert!(fp < 1e-6, "fixed point displacement {fp}");
    }
}

#[test]
fn rpgd_trace_records_snr_when_truth_is_supplied() {
    use sparsect_core::projectors::IdentityProjector;
    use sparsect_core::solvers::rpgd;
    let op = sparsect_core::linops::IdentityOperator::new(4, 1);
    let truth = img(&[1.0, 2.0, 3.0, 4.0]);
    let y = truth.pixels.clone();
    let cfg = SolverConfig::new(1.0);
    let (_, trace) = rpgd(&IdentityProjector, &op, &y, &cfg, &img(&[0.0; 4]), Some(&truth)).unwrap();
    assert!(trace.records.iter().all(|r| r.snr_db.is_some()));
    // SNR should not decrease when converging toward the truth.
    let first = trace.records.first().unwrap().snr_db.unwrap();
    let last = trace.records.last().unwrap().snr_db.unwrap();
    assert!(last >= first);
}
