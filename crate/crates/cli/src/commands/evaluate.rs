//! The evaluate and trace-export commands: merge reconstruction reports into
//! a views-by-methods table, and flatten or average per-image solver traces.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::TraceExportConfig;
use crate::error::{CliError, CliResult};
use crate::io;
use crate::report::{f64_value, read_report, summary_table};

/// Merge reconstruction reports into a scenario-by-method table (rows are
/// (views, measurement SNR) pairs, columns are methods), written as CSV and
/// JSON next to each other.
pub fn cmd_evaluate(reports: &[PathBuf], out: &Path) -> CliResult<()> {
    if reports.is_empty() {
        return Err(CliError::Validation("evaluate needs at least one report".into()));
    }
    let stored = reports
        .iter()
        .map(|p| read_report(p))
        .collect::<CliResult<Vec<_>>>()?;
    let (header, rows) = summary_table(&stored);

    let csv_path = out.with_extension("csv");
    let mut csv = header.join(",") + "\n";
    for row in &rows {
        csv += &(row.join(",") + "\n");
    }
    fs::write(&csv_path, &csv).map_err(|e| CliError::io(&csv_path, e))?;

    let json_path = out.with_extension("json");
    let value = json!({
        "columns": header,
        "rows": rows,
        "reports": stored.iter().map(|r| json!({
            "method": r.method,
            "n_views": r.n_views,
            "measurement_snr_db": f64_value(r.measurement_snr_db),
            "mean_regressed_snr_db": f64_value(r.mean_regressed_snr_db),
            "mean_sinogram_snr_db": f64_value(r.mean_sinogram_snr_db),
        })).collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&value)?;
    fs::write(&json_path, text + "\n").map_err(|e| CliError::io(&json_path, e))?;
    Ok(())
}

/// Export the per-image traces of a reconstruction run either concatenated
/// (one row per image and iteration) or averaged per iteration index across
/// images, which is the convergence-plot form.
pub fn cmd_trace_export(cfg: &TraceExportConfig) -> CliResult<()> {
    let trace_dir = cfg.recon.join("traces");
    let mut paths: Vec<PathBuf> = fs::read_dir(&trace_dir)
        .map_err(|e| CliError::io(&trace_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".trace.csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Validation(format!(
            "no traces under {}",
            trace_dir.display()
        )));
    }

    let traces = paths
        .iter()
        .map(|p| io::read_trace_csv(p).map(|t| (p.clone(), t)))
        .collect::<CliResult<Vec<_>>>()?;

    let mut out = String::new();
    if cfg.mean {
        out.push_str("k,images,step_norm,z_dist,alpha,data_residual,snr_db\n");
        let max_k = traces
            .iter()
            .map(|(_, t)| t.records.len())
            .max()
            .unwrap_or(0);
        for k in 0..max_k {
            let rows: Vec<_> = traces
                .iter()
                .filter_map(|(_, t)| t.records.get(k))
                .collect();
            let n = rows.len() as f64;
            let mean = |f: &dyn Fn(&sparsect_core::solvers::IterationRecord) -> f64| {
                rows.iter().map(|r| f(r)).sum::<f64>() / n
            };
            let snrs: Vec<f64> = rows.iter().filter_map(|r| r.snr_db).collect();
            let snr = if snrs.is_empty() {
                String::new()
            } else {
                format!("{}", snrs.iter().sum::<f64>() / snrs.len() as f64)
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                k,
                rows.len(),
                mean(&|r| r.step_norm),
                mean(&|r| r.z_dist),
                mean(&|r| r.alpha),
                mean(&|r| r.data_residual),
                snr
            ));
        }
    } else {
        out.push_str("image,k,step_norm,z_dist,alpha,data_residual,triggered,snr_db\n");
        for (path, trace) in &traces {
            let stem = path
                .file_name()
                .map(|s| s.to_string_lossy().replace(".trace.csv", ""))
                .unwrap_or_default();
            for r in &trace.records {
                let snr = r.snr_db.map(|s| format!("{s}")).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    stem, r.k, r.step_norm, r.z_dist, r.alpha, r.data_residual, r.triggered as u8, snr
                ));
            }
        }
    }
    let mut f = fs::File::create(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    f.write_all(out.as_bytes()).map_err(|e| CliError::io(&cfg.out, e))?;
    Ok(())
}
