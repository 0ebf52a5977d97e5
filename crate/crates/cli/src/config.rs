//! Per-command configurations. Each command accepts a JSON config file whose
//! fields are overridden by explicit CLI flags; the resolved config is
//! embedded in every report so runs can be audited and reproduced.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sparsect_core::sinogram::SinogramGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PhantomKindArg {
    SheppLogan,
    RandomEllipses,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhantomGenConfig {
    pub out: PathBuf,
    pub train: usize,
    pub test: usize,
    pub size: usize,
    pub kind: PhantomKindArg,
    pub n_ellipses: usize,
    pub intensity_lo: f64,
    pub intensity_hi: f64,
    pub seed: u64,
    pub export_pgm: bool,
}

impl Default for PhantomGenConfig {
    fn default() -> Self {
        PhantomGenConfig {
            out: PathBuf::from("dataset"),
            train: 475,
            test: 25,
            size: 32,
            kind: PhantomKindArg::RandomEllipses,
            n_ellipses: 6,
            intensity_lo: 0.0,
            intensity_hi: 350.0,
            seed: 0,
            export_pgm: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SplitSel {
    Train,
    Test,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub dataset: PathBuf,
    pub n_views: usize,
    /// Defaults to 1.5x the larger image side.
    pub n_offsets: Option<usize>,
    pub angle_jitter_std_deg: f64,
    pub measurement_snr_db: Option<f64>,
    pub seed: u64,
    pub split: SplitSel,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            dataset: PathBuf::from("dataset"),
            n_views: 45,
            n_offsets: None,
            angle_jitter_std_deg: 0.05,
            measurement_snr_db: None,
            seed: 1,
            split: SplitSel::Both,
        }
    }
}

impl SimulateConfig {
    pub fn resolve_n_offsets(&self, size: usize) -> usize {
        self.n_offsets
            .unwrap_or_else(|| SinogramGeometry::default_n_offsets(size, size))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainProjectorConfig {
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub n_views: usize,
    pub n_offsets: Option<usize>,
    pub t1: usize,
    pub t2: usize,
    pub t3: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub momentum: f64,
    pub grad_clip: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Train against noisy measurements at this SNR.
    pub train_snr_db: Option<f64>,
    pub view_jitter_prob: f64,
    /// Initialize from a model file and skip stage 1.
    pub resume_from: Option<PathBuf>,
}

impl Default for TrainProjectorConfig {
    fn default() -> Self {
        TrainProjectorConfig {
            dataset: PathBuf::from("dataset"),
            out: PathBuf::from("models"),
            n_views: 45,
            n_offsets: None,
            t1: 40,
            t2: 20,
            t3: 10,
            lr_start: 1e-2,
            lr_end: 1e-3,
            momentum: 0.99,
            grad_clip: 1e-2,
            batch_size: 2,
            seed: 0,
            train_snr_db: None,
            view_jitter_prob: 0.2,
            resume_from: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Fbp,
    Bp,
    Tv,
    Regressor,
    Pgd,
    Rpgd,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Fbp => "fbp",
            Method::Bp => "bp",
            Method::Tv => "tv",
            Method::Regressor => "regressor",
            Method::Pgd => "pgd",
            Method::Rpgd => "rpgd",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructConfig {
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub method: Method,
    pub model: Option<PathBuf>,
    /// Step size as a multiple of the method's base rule; the base is
    /// 2/(l_max + l_min) for pgd and 2/l_max for rpgd.
    pub gamma_scale: Option<f64>,
    pub c: f64,
    pub alpha0: f64,
    pub max_iter: usize,
    pub stop_tol: f64,
    /// Defaults to true for rpgd, false otherwise.
    pub skip_first_gradient: Option<bool>,
    pub tv_grid: usize,
    /// Fixed TV weight instead of the oracle grid search.
    pub tv_lambda: Option<f64>,
    pub box_lo: f64,
    pub box_hi: f64,
    /// JSON file holding an explicit constraint-set spec for pgd.
    pub set_json: Option<PathBuf>,
    pub export_pgm: bool,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        ReconstructConfig {
            dataset: PathBuf::from("dataset"),
            out: PathBuf::from("recon"),
            method: Method::Fbp,
            model: None,
            gamma_scale: None,
            c: 0.99,
            alpha0: 1.0,
            max_iter: 500,
            stop_tol: 1e-6,
            skip_first_gradient: None,
            tv_grid: 20,
            tv_lambda: None,
            box_lo: 0.0,
            box_hi: 350.0,
            set_json: None,
            export_pgm: false,
        }
    }
}

impl ReconstructConfig {
    pub fn resolved_gamma_scale(&self) -> f64 {
        self.gamma_scale.unwrap_or(match self.method {
            Method::Rpgd => 0.9,
            _ => 1.0,
        })
    }

    pub fn resolved_skip_first_gradient(&self) -> bool {
        self.skip_first_gradient
            .unwrap_or(matches!(self.method, Method::Rpgd))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceExportConfig {
    pub recon: PathBuf,
    pub out: PathBuf,
    pub mean: bool,
}
