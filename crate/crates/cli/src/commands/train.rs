//! The train-projector command: three-stage training against the dataset,
//! writing the stage-1 regressor checkpoint, the final projector, the loss
//! curve, and a summary with the measured idempotence defect.

use std::fs;
use std::io::Write;

use serde_json::json;
use sparsect_core::classical::{ReconKind, ReconstructorA};
use sparsect_core::linops::RadonTransform;
use sparsect_core::neural::{train_with_init, EnsembleNoise, TrainingSchedule, HIDDEN_CHANNELS, KERNEL};
use sparsect_core::sinogram::SinogramGeometry;

use super::dataset::{load_split, DatasetManifest};
use crate::config::{SplitSel, TrainProjectorConfig};
use crate::error::{CliError, CliResult};
use crate::io::{self, ModelHeader};

pub fn cmd_train_projector(cfg: &TrainProjectorConfig) -> CliResult<()> {
    let manifest = DatasetManifest::load(&cfg.dataset)?;
    let size = manifest.config.size;
    let n_offsets = cfg
        .n_offsets
        .unwrap_or_else(|| SinogramGeometry::default_n_offsets(size, size));
    let geom = SinogramGeometry::new(
        size,
        size,
        1.0,
        SinogramGeometry::uniform_angles(cfg.n_views),
        n_offsets,
    )?;
    let radon = RadonTransform::new(geom.clone());
    let a = ReconstructorA::new(ReconKind::Fbp, RadonTransform::new(geom));

    let train_images = load_split(&cfg.dataset, &manifest, SplitSel::Train)?;
    if train_images.is_empty() {
        return Err(CliError::Validation("dataset has no training images".into()));
    }

    let mut schedule = TrainingSchedule::new(cfg.t1, cfg.t2, cfg.t3, cfg.seed);
    schedule.lr_start = cfg.lr_start;
    schedule.lr_end = cfg.lr_end;
    schedule.momentum = cfg.momentum;
    schedule.grad_clip = cfg.grad_clip;
    schedule.batch_size = cfg.batch_size;

    let noise = cfg.train_snr_db.map(|db| {
        let mut n = EnsembleNoise::new(Some(db), cfg.seed ^ 0x6e01);
        n.view_jitter_prob = cfg.view_jitter_prob;
        n
    });

    // Resuming from a stage-1 checkpoint skips stage 1.
    let init = match &cfg.resume_from {
        Some(path) => {
            let (params, header) = io::read_model(path)?;
            if (header.width, header.height) != (size, size) {
                return Err(CliError::Validation(format!(
                    "model resolution {}x{} does not match dataset size {size}",
                    header.width, header.height
                )));
            }
            schedule.t1 = 0;
            Some(params)
        }
        None => None,
    };

    let run = train_with_init(
        &schedule,
        init.as_ref(),
        &train_images,
        &radon,
        &a,
        noise.as_ref(),
    )?;

    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let header = |stage: &str| ModelHeader {
        version: io::MODEL_VERSION,
        stage: stage.to_string(),
        width: size,
        height: size,
        hidden_channels: HIDDEN_CHANNELS,
        kernel: KERNEL,
        schedule: schedule.clone(),
        noise: noise.clone(),
        n_views: cfg.n_views,
        n_offsets,
    };
    io::write_model(&cfg.out.join("model_regressor.bin"), &run.regressor, &header("regressor"))?;
    io::write_model(&cfg.out.join("model_projector.bin"), &run.projector, &header("projector"))?;

    // Loss curve.
    let curve_path = cfg.out.join("training_curve.csv");
    let mut curve = String::from("stage,epoch,lr,mean_loss\n");
    for e in &run.epochs {
        curve.push_str(&format!("{},{},{},{}\n", e.stage, e.epoch, e.lr, e.mean_loss));
    }
    let mut f = fs::File::create(&curve_path).map_err(|e| CliError::io(&curve_path, e))?;
    f.write_all(curve.as_bytes())
        .map_err(|e| CliError::io(&curve_path, e))?;

    // Idempotence defect on held-out linear reconstructions: a tracked
    // metric, reported but never asserted.
    let test_images = load_split(&cfg.dataset, &manifest, SplitSel::Test)?;
    let defect = if test_images.is_empty() {
        None
    } else {
        let inputs: Vec<_> = test_images
            .iter()
            .map(|x| a.reconstruct(&radon.forward(x)?))
            .collect::<Result<Vec<_>, _>>()?;
        Some(sparsect_core::neural::idempotence_defect(&run.projector, &inputs)?)
    };

    let summary_path = cfg.out.join("train_summary.json");
    let summary = json!({
        "config": serde_json::to_value(cfg)?,
        "epochs_run": run.epochs.len(),
        "first_epoch_loss": run.epochs.first().map(|e| e.mean_loss),
        "final_epoch_loss": run.epochs.last().map(|e| e.mean_loss),
        "held_out_idempotence_defect": defect,
    });
    let text = serde_json::to_string_pretty(&summary)?;
    fs::write(&summary_path, text + "\n").map_err(|e| CliError::io(&summary_path, e))?;
    Ok(())
}


