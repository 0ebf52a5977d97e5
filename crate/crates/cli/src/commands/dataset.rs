//! Dataset generation and measurement simulation.
//!
//! Layout under the dataset root:
//!   manifest.json                   phantom specs, seeds, split
//!   phantoms/{train,test}/NNNN.f64  images (+ .json sidecars)
//!   phantoms/{split}/NNNN.sino.f64  simulated measurements
//!   phantoms/{split}/NNNN.sino_clean.f64  pre-noise sinogram when noisy
//!   sim.json                        simulation config + jittered angles

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sparsect_core::image::Image;
use sparsect_core::phantoms::{
    dataset_seeds, generate_phantom, simulate_measurement, MeasurementConfig, PhantomKind,
    PhantomSpec,
};
use sparsect_core::rng::Rng;

use crate::config::{PhantomGenConfig, PhantomKindArg, SimulateConfig, SplitSel};
use crate::error::{CliError, CliResult};
use crate::io;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhantomEntry {
    pub index: usize,
    pub seed: u64,
    pub file: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub config: PhantomGenConfig,
    pub train: Vec<PhantomEntry>,
    pub test: Vec<PhantomEntry>,
}

impl DatasetManifest {
    pub fn load(dataset: &Path) -> CliResult<Self> {
        io::read_json(&dataset.join("manifest.json"))
    }

    pub fn entries(&self, split: SplitSel) -> Vec<(&'static str, &PhantomEntry)> {
        let mut out = Vec::new();
        if matches!(split, SplitSel::Train | SplitSel::Both) {
            out.extend(self.train.iter().map(|e| ("train", e)));
        }
        if matches!(split, SplitSel::Test | SplitSel::Both) {
            out.extend(self.test.iter().map(|e| ("test", e)));
        }
        out
    }
}

fn spec_for(cfg: &PhantomGenConfig, seed: u64) -> PhantomSpec {
    let kind = match cfg.kind {
        PhantomKindArg::SheppLogan => PhantomKind::SheppLogan,
        PhantomKindArg::RandomEllipses => PhantomKind::RandomEllipses {
            n_ellipses: cfg.n_ellipses,
            intensity_range: (cfg.intensity_lo, cfg.intensity_hi),
            seed,
        },
    };
    PhantomSpec {
        kind,
        size: cfg.size,
    }
}

pub fn cmd_phantom_gen(cfg: &PhantomGenConfig) -> CliResult<DatasetManifest> {
    let (train_seeds, test_seeds) = dataset_seeds(cfg.seed, cfg.train, cfg.test);
    // The split must stay disjoint by construction.
    if train_seeds.iter().any(|s| test_seeds.contains(s)) {
        return Err(CliError::Validation("train/test seeds overlap".into()));
    }

    let mut manifest = DatasetManifest {
        version: 1,
        config: cfg.clone(),
        train: Vec::new(),
        test: Vec::new(),
    };
    for (split, seeds) in [("train", &train_seeds), ("test", &test_seeds)] {
        let dir = cfg.out.join("phantoms").join(split);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        for (index, &seed) in seeds.iter().enumerate() {
            let img = generate_phantom(&spec_for(cfg, seed))?;
            let name = format!("{index:04}.f64");
            let path = dir.join(&name);
            io::write_image(&path, &img)?;
            if cfg.export_pgm {
                io::write_pgm16(&dir.join(format!("{index:04}.pgm")), &img, None)?;
            }
            let entry = PhantomEntry {
                index,
                seed,
                file: format!("phantoms/{split}/{name}"),
            };
            if split == "train" {
                manifest.train.push(entry);
            } else {
                manifest.test.push(entry);
            }
        }
    }
    let path = cfg.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

/// Load the ground-truth images of one split, ordered by index.
pub fn load_split(dataset: &Path, manifest: &DatasetManifest, split: SplitSel) -> CliResult<Vec<Image>> {
    manifest
        .entries(split)
        .iter()
        .map(|(_, e)| io::read_image(&dataset.join(&e.file)))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SimEntry {
    pub split: String,
    pub index: usize,
    pub seed: u64,
    pub file: String,
    pub clean_file: Option<String>,
    pub jittered_angles_deg: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SimManifest {
    pub version: u32,
    pub config: SimulateConfig,
    pub entries: Vec<SimEntry>,
}

impl SimManifest {
    pub fn load(dataset: &Path) -> CliResult<Self> {
        io::read_json(&dataset.join("sim.json"))
    }
}

pub fn cmd_simulate(cfg: &SimulateConfig) -> CliResult<SimManifest> {
    let manifest = DatasetManifest::load(&cfg.dataset)?;
    let n_offsets = cfg.resolve_n_offsets(manifest.config.size);
    let seed_root = Rng::new(cfg.seed);

    let mut sim = SimManifest {
        version: 1,
        config: cfg.clone(),
        entries: Vec::new(),
    };
    for (split, entry) in manifest.entries(cfg.split) {
        let img = io::read_image(&cfg.dataset.join(&entry.file))?;
        let split_tag = if split == "train" { 0u64 } else { 1u64 << 32 };
        let seed = seed_root.stream(split_tag | entry.index as u64).next_u64();
        let mcfg = MeasurementConfig {
            n_views: cfg.n_views,
            n_offsets,
            angle_jitter_std_deg: cfg.angle_jitter_std_deg,
            measurement_snr_db: cfg.measurement_snr_db,
            seed,
        };
        let sim_out = simulate_measurement(&img, &mcfg)?;

        let base: PathBuf = cfg
            .dataset
            .join("phantoms")
            .join(split)
            .join(format!("{:04}.sino.f64", entry.index));
        io::write_sinogram(&base, &sim_out.sinogram, img.shape(), img.pixel_size())?;
        let clean_file = if cfg.measurement_snr_db.is_some() {
            let clean_path = cfg
                .dataset
                .join("phantoms")
                .join(split)
                .join(format!("{:04}.sino_clean.f64", entry.index));
            io::write_sinogram(&clean_path, &sim_out.clean, img.shape(), img.pixel_size())?;
            Some(format!("phantoms/{split}/{:04}.sino_clean.f64", entry.index))
        } else {
            None
        };
        sim.entries.push(SimEntry {
            split: split.to_string(),
            index: entry.index,
            seed,
            file: format!("phantoms/{split}/{:04}.sino.f64", entry.index),
            clean_file,
            jittered_angles_deg: sim_out.jittered_angles_deg,
        });
    }
    let path = cfg.dataset.join("sim.json");
    let text = serde_json::to_string_pretty(&sim)?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(sim)
}

