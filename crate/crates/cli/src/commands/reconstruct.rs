//! The reconstruct command: one reconstruction per test image with metrics,
//! per-image traces for the iterative methods, and an aggregate report.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use sparsect_core::classical::{ReconKind, ReconstructorA};
use sparsect_core::image::Image;
use sparsect_core::linops::{estimate_spectral_bounds, LinearOperator, RadonTransform, SpectralBounds};
use sparsect_core::metrics::{self, EvalReport, ImageEval};
use sparsect_core::neural::NeuralProjector;
use sparsect_core::projectors::{ConvexProjector, ConvexSetSpec};
use sparsect_core::sinogram::{Sinogram, SinogramGeometry};
use sparsect_core::solvers::{pgd, pgd_step_size, rpgd, CSequence, SolverConfig, SolverTrace};
use sparsect_core::tv::{lambda_grid_search, tv_admm, TvConfig};

use super::dataset::{DatasetManifest, SimManifest};
use crate::config::{Method, ReconstructConfig};
use crate::error::{CliError, CliResult};
use crate::io;
use crate::report::ReconReport;

struct TestCase {
    index: usize,
    truth: Image,
    sino: Sinogram,
    clean: Sinogram,
}

fn load_cases(cfg: &ReconstructConfig) -> CliResult<(Vec<TestCase>, SinogramGeometry, SimManifest)> {
    let manifest = DatasetManifest::load(&cfg.dataset)?;
    let sim = SimManifest::load(&cfg.dataset).map_err(|_| {
        CliError::Validation(format!(
            "no sim.json under {}; run `simulate` first",
            cfg.dataset.display()
        ))
    })?;

    let mut cases = Vec::new();
    let mut geometry: Option<SinogramGeometry> = None;
    for entry in &manifest.test {
        let sim_entry = sim
            .entries
            .iter()
            .find(|e| e.split == "test" && e.index == entry.index)
            .ok_or_else(|| {
                CliError::Validation(format!(
                    "no simulated measurement for test image {}",
                    entry.index
                ))
            })?;
        let truth = io::read_image(&cfg.dataset.join(&entry.file))?;
        let (sino, sidecar) = io::read_sinogram(&cfg.dataset.join(&sim_entry.file))?;
        let clean = match &sim_entry.clean_file {
            Some(f) => io::read_sinogram(&cfg.dataset.join(f))?.0,
            None => sino.clone(),
        };
        let geom = SinogramGeometry::new(
            sidecar.image_width,
            sidecar.image_height,
            sidecar.pixel_size,
            sidecar.angles_deg.clone(),
            sidecar.n_offsets,
        )?;
        match &geometry {
            None => geometry = Some(geom),
            Some(g) if *g == geom => {}
            Some(_) => {
                return Err(CliError::Validation(
                    "test sinograms have inconsistent geometries".into(),
                ))
            }
        }
        cases.push(TestCase {
            index: entry.index,
            truth,
            sino,
            clean,
        });
    }
    if cases.is_empty() {
        return Err(CliError::Validation("dataset has no simulated test images".into()));
    }
    let geometry = geometry.expect("nonempty cases");
    Ok((cases, geometry, sim))
}

fn solver_config(cfg: &ReconstructConfig, bounds: &SpectralBounds) -> SolverConfig {
    let base = match cfg.method {
        Method::Pgd => pgd_step_size(bounds),
        _ => 2.0 / bounds.lambda_max,
    };
    let mut sc = SolverConfig::new(cfg.resolved_gamma_scale() * base);
    sc.alpha0 = cfg.alpha0;
    sc.c_sequence = CSequence::Constant(cfg.c);
    sc.max_iter = cfg.max_iter;
    sc.stop_tol = cfg.stop_tol;
    sc.skip_first_gradient = cfg.resolved_skip_first_gradient();
    sc
}

pub fn cmd_reconstruct(cfg: &ReconstructConfig) -> CliResult<()> {
    let (cases, geometry, sim) = load_cases(cfg)?;
    let radon = RadonTransform::new(geometry.clone());
    let a_fbp = ReconstructorA::new(ReconKind::Fbp, RadonTransform::new(geometry.clone()));

    // Model methods need the trained parameters.
    let model = match cfg.method {
        Method::Regressor | Method::Rpgd => {
            let path = cfg.model.as_ref().ok_or_else(|| {
                CliError::Validation(format!(
                    "method {} requires --model",
                    cfg.method.as_str()
                ))
            })?;
            let (params, header) = io::read_model(path)?;
            if (params.width, params.height) != geometry.image_shape() {
                return Err(CliError::Validation(format!(
                    "model resolution {}x{} does not match images {}x{}",
                    params.width,
                    params.height,
                    geometry.width,
                    geometry.height
                )));
            }
            Some((params, header))
        }
        _ => None,
    };

    let needs_bounds = matches!(cfg.method, Method::Pgd | Method::Rpgd);
    let bounds = needs_bounds.then(|| estimate_spectral_bounds(&radon, 1e-6, 10_000));
    let solver_cfg = bounds.as_ref().map(|b| solver_config(cfg, b));

    let pgd_projector = match cfg.method {
        Method::Pgd => {
            let dim = radon.domain_dim();
            let spec = match &cfg.set_json {
                Some(path) => io::read_json::<ConvexSetSpec>(path)?,
                None => ConvexSetSpec::uniform_box(cfg.box_lo, cfg.box_hi, dim),
            };
            Some(ConvexProjector::new(spec, dim).map_err(CliError::from)?)
        }
        _ => None,
    };

    let recon_dir = cfg.out.join("recon");
    fs::create_dir_all(&recon_dir).map_err(|e| CliError::io(&recon_dir, e))?;
    let trace_dir = cfg.out.join("traces");
    fs::create_dir_all(&trace_dir).map_err(|e| CliError::io(&trace_dir, e))?;

    let mut per_image = Vec::new();
    for case in &cases {
        let mut best_lambda = None;
        let mut trace: Option<SolverTrace> = None;
        let image = match cfg.method {
            Method::Fbp => a_fbp.fbp(&case.sino)?,
            Method::Bp => a_fbp.backproject(&case.sino)?,
            Method::Tv => {
                let x0 = a_fbp.fbp(&case.sino)?;
                match cfg.tv_lambda {
                    Some(lambda) => {
                        let (img, objective) =
                            tv_admm(&radon, &case.sino.values, &TvConfig::new(lambda), &x0)?;
                        best_lambda = Some(lambda);
                        write_objective_csv(
                            &trace_dir.join(format!("{:04}.objective.csv", case.index)),
                            &objective,
                        )?;
                        img
                    }
                    None => {
                        let res = lambda_grid_search(
                            &radon,
                            &case.sino.values,
                            &case.truth,
                            cfg.tv_grid,
                            &x0,
                        )?;
                        best_lambda = Some(res.best_lambda);
                        res.image
                    }
                }
            }
            Method::Regressor => {
                let (params, _) = model.as_ref().expect("validated above");
                let x0 = a_fbp.fbp(&case.sino)?;
                params.forward(&x0)?
            }
            Method::Pgd => {
                let projector = pgd_projector.as_ref().expect("constructed above");
                let x0 = a_fbp.fbp(&case.sino)?;
                let (img, t) = pgd(
                    projector,
                    &radon,
                    &case.sino.values,
                    solver_cfg.as_ref().expect("bounds estimated"),
                    &x0,
                    Some(&case.truth),
                )?;
                trace = Some(t);
                img
            }
            Method::Rpgd => {
                let (params, _) = model.as_ref().expect("validated above");
                let projector = NeuralProjector {
                    params: params.clone(),
                };
                // Algorithm input: x0 = A y.
                let x0 = a_fbp.reconstruct(&case.sino)?;
                let (img, t) = rpgd(
                    &projector,
                    &radon,
                    &case.sino.values,
                    solver_cfg.as_ref().expect("bounds estimated"),
                    &x0,
                    Some(&case.truth),
                )?;
                trace = Some(t);
                img
            }
        };

        io::write_image(&recon_dir.join(format!("{:04}.f64", case.index)), &image)?;
        if cfg.export_pgm {
            io::write_pgm16(&recon_dir.join(format!("{:04}.pgm", case.index)), &image, None)?;
        }
        if let Some(t) = &trace {
            io::write_trace_csv(&trace_dir.join(format!("{:04}.trace.csv", case.index)), t)?;
        }

        let snr_db = metrics::snr(&image, &case.truth);
        let (regressed_snr_db, a, b) = metrics::regressed_snr(&image, &case.truth);
        let sinogram_snr_db = metrics::sinogram_snr(&radon, &image, &case.clean)?;
        per_image.push(ImageEval {
            index: case.index,
            snr_db,
            regressed_snr_db,
            a,
            b,
            sinogram_snr_db,
            best_lambda,
        });
    }

    let report = ReconReport {
        method: cfg.method.as_str().to_string(),
        n_views: geometry.n_views(),
        measurement_snr_db: sim.config.measurement_snr_db,
        config: serde_json::to_value(cfg)?,
        eval: EvalReport::from_per_image(per_image),
    };
    report.write_json(&cfg.out.join("report.json"))?;
    report.write_csv(&cfg.out.join("report.csv"))?;
    Ok(())
}

fn write_objective_csv(path: &Path, objective: &[f64]) -> CliResult<()> {
    let mut out = String::from("iter,objective\n");
    for (i, v) in objective.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| CliError::io(path, e))
}
