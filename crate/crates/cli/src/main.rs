//! Command-line entry point. Every subcommand takes an optional JSON config
//! file; explicit flags override its fields. Exit codes: 0 success, 2
//! validation error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparsect::commands;
use sparsect::config::{
    Method, PhantomGenConfig, PhantomKindArg, ReconstructConfig, SimulateConfig, SplitSel,
    TraceExportConfig, TrainProjectorConfig,
};
use sparsect::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "sparsect",
    about = "Sparse-view CT reconstruction: simulate, train, reconstruct, evaluate",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a train/test phantom dataset.
    PhantomGen(PhantomGenArgs),
    /// Simulate measurements (angle jitter + optional exact-SNR noise).
    Simulate(SimulateArgs),
    /// Train the projector network (stage-1 checkpoint is the regressor).
    TrainProjector(TrainArgs),
    /// Reconstruct the test split with one method and write a report.
    Reconstruct(ReconstructArgs),
    /// Merge reconstruction reports into a scenario-by-method table.
    Evaluate(EvaluateArgs),
    /// Export solver traces as a single CSV (optionally averaged per k).
    TraceExport(TraceExportArgs),
}

fn load_config<T: Default + for<'de> serde::Deserialize<'de>>(
    path: &Option<PathBuf>,
) -> CliResult<T> {
    match path {
        Some(p) => sparsect::io::read_json(p),
        None => Ok(T::default()),
    }
}

#[derive(Args)]
struct PhantomGenArgs {
    /// JSON config with the same fields as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    train: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, value_enum)]
    kind: Option<PhantomKindArg>,
    #[arg(long)]
    n_ellipses: Option<usize>,
    #[arg(long)]
    intensity_lo: Option<f64>,
    #[arg(long)]
    intensity_hi: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write 16-bit PGM previews.
    #[arg(long)]
    export_pgm: bool,
}

impl PhantomGenArgs {
    fn resolve(&self) -> CliResult<PhantomGenConfig> {
        let mut cfg: PhantomGenConfig = load_config(&self.config)?;
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.train {
            cfg.train = v;
        }
        if let Some(v) = self.test {
            cfg.test = v;
        }
        if let Some(v) = self.size {
            cfg.size = v;
        }
        if let Some(v) = self.kind {
            cfg.kind = v;
        }
        if let Some(v) = self.n_ellipses {
            cfg.n_ellipses = v;
        }
        if let Some(v) = self.intensity_lo {
            cfg.intensity_lo = v;
        }
        if let Some(v) = self.intensity_hi {
            cfg.intensity_hi = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if self.export_pgm {
            cfg.export_pgm = true;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    views: Option<usize>,
    #[arg(long)]
    n_offsets: Option<usize>,
    #[arg(long)]
    jitter_std: Option<f64>,
    /// Measurement SNR in dB; omit for noiseless.
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    split: Option<SplitSel>,
}

impl SimulateArgs {
    fn resolve(&self) -> CliResult<SimulateConfig> {
        let mut cfg: SimulateConfig = load_config(&self.config)?;
        if let Some(v) = &self.dataset {
            cfg.dataset = v.clone();
        }
        if let Some(v) = self.views {
            cfg.n_views = v;
        }
        if let Some(v) = self.n_offsets {
            cfg.n_offsets = Some(v);
        }
        if let Some(v) = self.jitter_std {
            cfg.angle_jitter_std_deg = v;
        }
        if let Some(v) = self.snr_db {
            cfg.measurement_snr_db = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.split {
            cfg.split = v;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    views: Option<usize>,
    #[arg(long)]
    n_offsets: Option<usize>,
    #[arg(long)]
    t1: Option<usize>,
    #[arg(long)]
    t2: Option<usize>,
    #[arg(long)]
    t3: Option<usize>,
    #[arg(long)]
    lr_start: Option<f64>,
    #[arg(long)]
    lr_end: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    grad_clip: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Train against noisy measurements at this SNR (dB).
    #[arg(long)]
    train_snr_db: Option<f64>,
    #[arg(long)]
    view_jitter_prob: Option<f64>,
    /// Initialize from a model file and run stages 2+3 only.
    #[arg(long)]
    resume_from: Option<PathBuf>,
}

impl TrainArgs {
    fn resolve(&self) -> CliResult<TrainProjectorConfig> {
        let mut cfg: TrainProjectorConfig = load_config(&self.config)?;
        if let Some(v) = &self.dataset {
            cfg.dataset = v.clone();
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.views {
            cfg.n_views = v;
        }
        if let Some(v) = self.n_offsets {
            cfg.n_offsets = Some(v);
        }
        if let Some(v) = self.t1 {
            cfg.t1 = v;
        }
        if let Some(v) = self.t2 {
            cfg.t2 = v;
        }
        if let Some(v) = self.t3 {
            cfg.t3 = v;
        }
        if let Some(v) = self.lr_start {
            cfg.lr_start = v;
        }
        if let Some(v) = self.lr_end {
            cfg.lr_end = v;
        }
        if let Some(v) = self.momentum {
            cfg.momentum = v;
        }
        if let Some(v) = self.grad_clip {
            cfg.grad_clip = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.train_snr_db {
            cfg.train_snr_db = Some(v);
        }
        if let Some(v) = self.view_jitter_prob {
            cfg.view_jitter_prob = v;
        }
        if let Some(v) = &self.resume_from {
            cfg.resume_from = Some(v.clone());
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Step size as a multiple of the method's base rule.
    #[arg(long)]
    gamma_scale: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    stop_tol: Option<f64>,
    #[arg(long)]
    skip_first_gradient: Option<bool>,
    #[arg(long)]
    tv_grid: Option<usize>,
    #[arg(long)]
    tv_lambda: Option<f64>,
    #[arg(long)]
    box_lo: Option<f64>,
    #[arg(long)]
    box_hi: Option<f64>,
    /// JSON file with an explicit constraint-set spec for pgd.
    #[arg(long)]
    set_json: Option<PathBuf>,
    #[arg(long)]
    export_pgm: bool,
}

impl ReconstructArgs {
    fn resolve(&self) -> CliResult<ReconstructConfig> {
        let mut cfg: ReconstructConfig = load_config(&self.config)?;
        if let Some(v) = &self.dataset {
            cfg.dataset = v.clone();
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.method {
            cfg.method = v;
        }
        if let Some(v) = &self.model {
            cfg.model = Some(v.clone());
        }
        if let Some(v) = self.gamma_scale {
            cfg.gamma_scale = Some(v);
        }
        if let Some(v) = self.c {
            cfg.c = v;
        }
        if let Some(v) = self.alpha0 {
            cfg.alpha0 = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.stop_tol {
            cfg.stop_tol = v;
        }
        if let Some(v) = self.skip_first_gradient {
            cfg.skip_first_gradient = Some(v);
        }
        if let Some(v) = self.tv_grid {
            cfg.tv_grid = v;
        }
        if let Some(v) = self.tv_lambda {
            cfg.tv_lambda = Some(v);
        }
        if let Some(v) = self.box_lo {
            cfg.box_lo = v;
        }
        if let Some(v) = self.box_hi {
            cfg.box_hi = v;
        }
        if let Some(v) = &self.set_json {
            cfg.set_json = Some(v.clone());
        }
        if self.export_pgm {
            cfg.export_pgm = true;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Report JSON files produced by `reconstruct`.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Output basename; writes <out>.csv and <out>.json.
    #[arg(long, default_value = "table")]
    out: PathBuf,
}

#[derive(Args)]
struct TraceExportArgs {
    /// Reconstruction output directory (containing traces/).
    #[arg(long)]
    recon: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Average per iteration index across images.
    #[arg(long)]
    mean: bool,
}

fn run() -> CliResult<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::PhantomGen(args) => {
            commands::cmd_phantom_gen(&args.resolve()?)?;
        }
        Command::Simulate(args) => {
            commands::cmd_simulate(&args.resolve()?)?;
        }
        Command::TrainProjector(args) => {
            commands::cmd_train_projector(&args.resolve()?)?;
        }
        Command::Reconstruct(args) => {
            commands::cmd_reconstruct(&args.resolve()?)?;
        }
        Command::Evaluate(args) => {
            commands::cmd_evaluate(&args.reports, &args.out)?;
        }
        Command::TraceExport(args) => {
            commands::cmd_trace_export(&TraceExportConfig {
                recon: args.recon,
                out: args.out,
                mean: args.mean,
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match &e {
                CliError::Validation(_) | CliError::Io { .. } => 2u8,
                CliError::Numerical(_) => 3u8,
            };
            ExitCode::from(code)
        }
    }
}
