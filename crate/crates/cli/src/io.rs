//! On-disk formats: little-endian f64 grids with JSON sidecars, 16-bit PGM
//! export, versioned model files, and CSV solver traces.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sparsect_core::image::Image;
use sparsect_core::neural::{ConvNetParams, EnsembleNoise, TrainingSchedule, HIDDEN_CHANNELS, KERNEL};
use sparsect_core::sinogram::Sinogram;
use sparsect_core::solvers::{IterationRecord, SolverTrace, TerminalStatus};

use crate::error::{CliError, CliResult};

fn write_f64_le(path: &Path, values: &[f64]) -> CliResult<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_f64_le(path: &Path) -> CliResult<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(CliError::Validation(format!(
            "{} is not a stream of f64 values",
            path.display()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ImageSidecar {
    pub kind: String,
    pub width: usize,
    pub height: usize,
    pub pixel_size: f64,
}

/// Raw little-endian f64 pixels at `path` (conventionally `NNNN.f64`) plus a
/// JSON sidecar with the shape.
pub fn write_image(path: &Path, img: &Image) -> CliResult<()> {
    write_f64_le(path, &img.pixels)?;
    write_json(
        &sidecar_path(path),
        &ImageSidecar {
            kind: "image".into(),
            width: img.width(),
            height: img.height(),
            pixel_size: img.pixel_size(),
        },
    )
}

pub fn read_image(path: &Path) -> CliResult<Image> {
    let sidecar: ImageSidecar = read_json(&sidecar_path(path))?;
    let values = read_f64_le(path)?;
    let img = Image::from_pixels(sidecar.width, sidecar.height, sidecar.pixel_size, values)
        .map_err(CliError::from)?;
    if !img.all_finite() {
        return Err(CliError::Validation(format!(
            "{} contains non-finite pixels",
            path.display()
        )));
    }
    Ok(img)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SinogramSidecar {
    pub kind: String,
    pub n_views: usize,
    pub n_offsets: usize,
    pub angles_deg: Vec<f64>,
    pub image_width: usize,
    pub image_height: usize,
    pub pixel_size: f64,
}

pub fn write_sinogram(path: &Path, sino: &Sinogram, image_shape: (usize, usize), pixel_size: f64) -> CliResult<()> {
    write_f64_le(path, &sino.values)?;
    write_json(
        &sidecar_path(path),
        &SinogramSidecar {
            kind: "sinogram".into(),
            n_views: sino.n_views,
            n_offsets: sino.n_offsets,
            angles_deg: sino.angles_deg.clone(),
            image_width: image_shape.0,
            image_height: image_shape.1,
            pixel_size,
        },
    )
}

pub fn read_sinogram(path: &Path) -> CliResult<(Sinogram, SinogramSidecar)> {
    let sidecar: SinogramSidecar = read_json(&sidecar_path(path))?;
    let values = read_f64_le(path)?;
    let sino = Sinogram::from_values(
        sidecar.n_views,
        sidecar.n_offsets,
        sidecar.angles_deg.clone(),
        values,
    )
    .map_err(CliError::from)?;
    Ok((sino, sidecar))
}

/// 16-bit binary PGM with linear windowing; the window defaults to the image
/// range.
pub fn write_pgm16(path: &Path, img: &Image, window: Option<(f64, f64)>) -> CliResult<()> {
    let (lo, hi) = window.unwrap_or_else(|| img.min_max());
    let span = (hi - lo).max(1e-300);
    let mut out = Vec::with_capacity(64 + img.len() * 2);
    out.extend_from_slice(format!("P5\n{} {}\n65535\n", img.width(), img.height()).as_bytes());
    for &v in &img.pixels {
        let t = ((v - lo) / span).clamp(0.0, 1.0);
        let q = (t * 65535.0).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub const MODEL_MAGIC: &[u8; 4] = b"SPCT";
pub const MODEL_VERSION: u32 = 1;

/// Everything needed to audit a model file, embedded as its JSON header.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelHeader {
    pub version: u32,
    /// "regressor" (stage-1 checkpoint) or "projector" (final).
    pub stage: String,
    pub width: usize,
    pub height: usize,
    pub hidden_channels: usize,
    pub kernel: usize,
    pub schedule: TrainingSchedule,
    pub noise: Option<EnsembleNoise>,
    pub n_views: usize,
    pub n_offsets: usize,
}

/// Versioned binary layout: magic, u32 version, u64 header length, JSON
/// header, then the weight arrays (w1 b1 w2 b2 w3 b3) as little-endian f64.
pub fn write_model(path: &Path, params: &ConvNetParams, header: &ModelHeader) -> CliResult<()> {
    let header_json = serde_json::to_vec(header)?;
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
    out.extend_from_slice(&header_json);
    for arr in [&params.w1, &params.b1, &params.w2, &params.b2, &params.w3, &params.b3] {
        for v in arr.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub fn read_model(path: &Path) -> CliResult<(ConvNetParams, ModelHeader)> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let fail = |msg: &str| CliError::Validation(format!("{}: {msg}", path.display()));
    if bytes.len() < 16 || &bytes[0..4] != MODEL_MAGIC {
        return Err(fail("not a model file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != MODEL_VERSION {
        return Err(fail(&format!("unsupported model version {version}")));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if bytes.len() < 16 + header_len {
        return Err(fail("truncated header"));
    }
    let header: ModelHeader = serde_json::from_slice(&bytes[16..16 + header_len])?;
    if header.hidden_channels != HIDDEN_CHANNELS || header.kernel != KERNEL {
        return Err(fail("architecture constants do not match this build"));
    }
    let mut params = ConvNetParams::zeros(header.width, header.height);
    let mut cursor = 16 + header_len;
    for arr in [
        &mut params.w1,
        &mut params.b1,
        &mut params.w2,
        &mut params.b2,
        &mut params.w3,
        &mut params.b3,
    ] {
        let need = arr.len() * 8;
        if bytes.len() < cursor + need {
            return Err(fail("truncated weights"));
        }
        for (i, chunk) in bytes[cursor..cursor + need].chunks_exact(8).enumerate() {
            arr[i] = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        cursor += need;
    }
    if cursor != bytes.len() {
        return Err(fail("trailing bytes after weights"));
    }
    if !params.all_finite() {
        return Err(fail("non-finite weights"));
    }
    Ok((params, header))
}

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// One row per iteration: k, step_norm, z_dist, alpha, data_residual,
/// triggered, snr_db (empty when no ground truth was supplied).
pub fn write_trace_csv(path: &Path, trace: &SolverTrace) -> CliResult<()> {
    let mut out = String::new();
    out.push_str("k,step_norm,z_dist,alpha,data_residual,triggered,snr_db\n");
    for r in &trace.records {
        let snr = r.snr_db.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.k,
            fmt_f64(r.step_norm),
            fmt_f64(r.z_dist),
            fmt_f64(r.alpha),
            fmt_f64(r.data_residual),
            r.triggered as u8,
            snr
        ));
    }
    let mut file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| CliError::io(path, e))
}

fn parse_f64_field(s: &str) -> CliResult<f64> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other
            .parse()
            .map_err(|_| CliError::Validation(format!("bad float field '{other}'"))),
    }
}

pub fn read_trace_csv(path: &Path) -> CliResult<SolverTrace> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(CliError::Validation(format!(
                "{}:{}: expected 7 fields",
                path.display(),
                lineno + 1
            )));
        }
        records.push(IterationRecord {
            k: fields[0]
                .parse()
                .map_err(|_| CliError::Validation(format!("bad iteration index '{}'", fields[0])))?,
            step_norm: parse_f64_field(fields[1])?,
            z_dist: parse_f64_field(fields[2])?,
            alpha: parse_f64_field(fields[3])?,
            data_residual: parse_f64_field(fields[4])?,
            c: None,
            triggered: fields[5] == "1",
            snr_db: if fields[6].is_empty() {
                None
            } else {
                Some(parse_f64_field(fields[6])?)
            },
        });
    }
    Ok(SolverTrace {
        records,
        status: TerminalStatus::MaxIter,
        diverged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparsect_core::rng::Rng;
    use sparsect_core::sinogram::SinogramGeometry;
    use tempfile::tempdir;

    #[test]
    fn image_roundtrip_is_bitwise() {
        let dir = tempdir().unwrap();
        let mut img = Image::zeros(7, 5, 0.5);
        Rng::new(3).fill_normal(&mut img.pixels, 0.0, 2.0);
        let path = dir.path().join("0001.f64");
        write_image(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn sinogram_roundtrip_keeps_geometry() {
        let dir = tempdir().unwrap();
        let geom = SinogramGeometry::new(
            8,
            8,
            1.0,
            SinogramGeometry::uniform_angles(5),
            12,
        )
        .unwrap();
        let mut sino = Sinogram::zeros(&geom);
        Rng::new(9).fill_normal(&mut sino.values, 0.0, 1.0);
        let path = dir.path().join("0001.sino.f64");
        write_sinogram(&path, &sino, (8, 8), 1.0).unwrap();
        let (back, sidecar) = read_sinogram(&path).unwrap();
        assert_eq!(sino, back);
        assert_eq!(sidecar.image_width, 8);
        assert_eq!(sidecar.pixel_size, 1.0);
    }

    #[test]
    fn pgm_export_has_correct_header_and_size() {
        let dir = tempdir().unwrap();
        let mut img = Image::zeros(4, 3, 1.0);
        for (i, v) in img.pixels.iter_mut().enumerate() {
            *v = i as f64;
        }
        let path = dir.path().join("img.pgm");
        write_pgm16(&path, &img, None).unwrap();
        let bytes = fs::read(&path).unwrap();
        let header = b"P5\n4 3\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 4 * 3 * 2);
        // Max pixel maps to 65535 big-endian at the end.
        assert_eq!(&bytes[bytes.len() - 2..], &[0xff, 0xff]);
    }

    #[test]
    fn model_roundtrip_is_bitwise() {
        let dir = tempdir().unwrap();
        let mut params = ConvNetParams::init(16, 16, 77);
        Rng::new(8).fill_normal(&mut params.w3, 0.0, 0.1);
        let header = ModelHeader {
            version: MODEL_VERSION,
            stage: "projector".into(),
            width: 16,
            height: 16,
            hidden_channels: HIDDEN_CHANNELS,
            kernel: KERNEL,
            schedule: TrainingSchedule::new(2, 1, 1, 77),
            noise: None,
            n_views: 45,
            n_offsets: 48,
        };
        let path = dir.path().join("model_projector.bin");
        write_model(&path, &params, &header).unwrap();
        let (back, back_header) = read_model(&path).unwrap();
        assert_eq!(params, back);
        assert_eq!(back_header.stage, "projector");
        assert_eq!(back_header.n_views, 45);
    }

    #[test]
    fn corrupt_model_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        fs::write(&path, b"nope").unwrap();
        assert!(read_model(&path).is_err());
    }

    #[test]
    fn trace_csv_roundtrip() {
        let dir = tempdir().unwrap();
        let trace = SolverTrace {
            records: vec![
                IterationRecord {
                    k: 0,
                    step_norm: 1.5,
                    z_dist: 2.0,
                    alpha: 1.0,
                    data_residual: 10.0,
                    c: None,
                    triggered: false,
                    snr_db: Some(f64::INFINITY),
                },
                IterationRecord {
                    k: 1,
                    step_norm: 0.5,
                    z_dist: 1.0,
                    alpha: 0.9,
                    data_residual: 5.0,
                    c: Some(0.99),
                    triggered: true,
                    snr_db: None,
                },
            ],
            status: TerminalStatus::Converged,
            diverged: false,
        };
        let path = dir.path().join("trace.csv");
        write_trace_csv(&path, &trace).unwrap();
        let back = read_trace_csv(&path).unwrap();
        assert_eq!(back.records.len(), 2);
        assert_eq!(back.records[0].snr_db, Some(f64::INFINITY));
        assert!(back.records[1].triggered);
        assert_eq!(back.records[1].alpha, 0.9);
    }
}
