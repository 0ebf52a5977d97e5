//! Evaluation reports: JSON (with infinities as the string "inf"), per-image
//! CSV, and the views-by-methods summary table assembled by `evaluate`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use sparsect_core::metrics::EvalReport;

use crate::error::{CliError, CliResult};

/// Finite floats stay numbers; infinities become the sentinel strings "inf"
/// and "-inf" (JSON has no representation for them).
pub fn f64_value(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn value_to_f64(v: &Value) -> CliResult<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| CliError::Validation(format!("bad number {n}"))),
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        Value::String(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
        other => Err(CliError::Validation(format!("expected a number, got {other}"))),
    }
}

/// A reconstruction run over a test set, with the exact configuration that
/// produced it embedded for audit.
pub struct ReconReport {
    pub method: String,
    pub n_views: usize,
    /// None means noiseless measurements.
    pub measurement_snr_db: Option<f64>,
    pub config: Value,
    pub eval: EvalReport,
}

impl ReconReport {
    pub fn to_value(&self) -> Value {
        let per_image: Vec<Value> = self
            .eval
            .per_image
            .iter()
            .map(|e| {
                let mut m = Map::new();
                m.insert("index".into(), json!(e.index));
                m.insert("snr_db".into(), f64_value(e.snr_db));
                m.insert("regressed_snr_db".into(), f64_value(e.regressed_snr_db));
                m.insert("a".into(), f64_value(e.a));
                m.insert("b".into(), f64_value(e.b));
                m.insert("sinogram_snr_db".into(), f64_value(e.sinogram_snr_db));
                if let Some(l) = e.best_lambda {
                    m.insert("best_lambda".into(), f64_value(l));
                }
                Value::Object(m)
            })
            .collect();
        json!({
            "method": self.method,
            "n_views": self.n_views,
            "measurement_snr_db": self.measurement_snr_db.map(f64_value).unwrap_or(json!("inf")),
            "config": self.config,
            "mean": {
                "snr_db": f64_value(self.eval.snr_db),
                "regressed_snr_db": f64_value(self.eval.regressed_snr_db),
                "a": f64_value(self.eval.a),
                "b": f64_value(self.eval.b),
                "sinogram_snr_db": f64_value(self.eval.sinogram_snr_db),
            },
            "per_image": per_image,
        })
    }

    pub fn write_json(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(&self.to_value())?;
        fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        let fmt = |v: f64| {
            if v.is_finite() {
                format!("{v}")
            } else if v > 0.0 {
                "inf".to_string()
            } else {
                "-inf".to_string()
            }
        };
        let mut out = String::from("index,snr_db,regressed_snr_db,a,b,sinogram_snr_db,best_lambda\n");
        for e in &self.eval.per_image {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.index,
                fmt(e.snr_db),
                fmt(e.regressed_snr_db),
                fmt(e.a),
                fmt(e.b),
                fmt(e.sinogram_snr_db),
                e.best_lambda.map(fmt).unwrap_or_default()
            ));
        }
        out.push_str(&format!(
            "mean,{},{},{},{},{},\n",
            fmt(self.eval.snr_db),
            fmt(self.eval.regressed_snr_db),
            fmt(self.eval.a),
            fmt(self.eval.b),
            fmt(self.eval.sinogram_snr_db),
        ));
        let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| CliError::io(path, e))
    }
}

/// The fields `evaluate` needs back from a stored report.
pub struct StoredReport {
    pub method: String,
    pub n_views: usize,
    pub measurement_snr_db: f64,
    pub mean_regressed_snr_db: f64,
    pub mean_sinogram_snr_db: f64,
}

pub fn read_report(path: &Path) -> CliResult<StoredReport> {
    let value: Value = serde_json::from_str(
        &fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
    )?;
    let get = |v: &Value, key: &str| -> CliResult<Value> {
        v.get(key)
            .cloned()
            .ok_or_else(|| CliError::Validation(format!("{}: missing '{key}'", path.display())))
    };
    let mean = get(&value, "mean")?;
    Ok(StoredReport {
        method: get(&value, "method")?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        n_views: get(&value, "n_views")?.as_u64().unwrap_or(0) as usize,
        measurement_snr_db: value_to_f64(&get(&value, "measurement_snr_db")?)?,
        mean_regressed_snr_db: value_to_f64(&get(&mean, "regressed_snr_db")?)?,
        mean_sinogram_snr_db: value_to_f64(&get(&mean, "sinogram_snr_db")?)?,
    })
}

/// Rows are (n_views, measurement SNR) scenarios sorted views-descending,
/// SNR-descending with noiseless first; columns are methods in the canonical
/// order. Mirrors the layout of the benchmark tables.
pub fn summary_table(reports: &[StoredReport]) -> (Vec<String>, Vec<Vec<String>>) {
    const METHODS: [&str; 6] = ["fbp", "bp", "tv", "regressor", "pgd", "rpgd"];
    let mut scenarios: Vec<(usize, f64)> = reports
        .iter()
        .map(|r| (r.n_views, r.measurement_snr_db))
        .collect();
    scenarios.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal))
    });
    scenarios.dedup_by(|a, b| a.0 == b.0 && (a.1 == b.1 || (a.1.is_nan() && b.1.is_nan())));

    let mut header = vec!["n_views".to_string(), "measurement_snr_db".to_string()];
    header.extend(METHODS.iter().map(|m| m.to_string()));
    let mut rows = Vec::new();
    for (views, snr) in scenarios {
        let mut row = vec![
            views.to_string(),
            if snr.is_finite() {
                format!("{snr}")
            } else {
                "inf".to_string()
            },
        ];
        for method in METHODS {
            let cell = reports
                .iter()
                .find(|r| {
                    r.n_views == views
                        && r.method == method
                        && (r.measurement_snr_db == snr
                            || (!r.measurement_snr_db.is_finite() && !snr.is_finite()))
                })
                .map(|r| format!("{:.2}", r.mean_regressed_snr_db))
                .unwrap_or_default();
            row.push(cell);
        }
        rows.push(row);
    }
    (header, rows)
}
