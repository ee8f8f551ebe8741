//! Artifact emission: report.json, table.csv, manifest.json.
//!
//! The CSV prints every float with 17 significant digits so determinism is
//! byte-checkable across runs and worker counts.

use std::fs;
use std::io;
use std::path::Path;

use levytail::experiments::ExperimentReport;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn table_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "experiment,u,numerator,numerator_err,denominator,denominator_err,ratio,ratio_lo,ratio_hi,method\n",
    );
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.experiment,
            fmt(r.u),
            fmt(r.numerator),
            fmt(r.numerator_err),
            fmt(r.denominator),
            fmt(r.denominator_err),
            fmt(r.ratio),
            fmt(r.ratio_lo),
            fmt(r.ratio_hi),
            r.method,
        ));
    }
    out
}

fn sha256_hex(data: &[u8]) -> String {
    let digest = Sha256::digest(data);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_outputs(
    outdir: &Path,
    config: &RunConfig,
    report: &ExperimentReport,
    workers: Option<usize>,
) -> io::Result<()> {
    fs::create_dir_all(outdir)
        .map_err(|e| io::Error::new(e.kind(), format!("creating {}: {e}", outdir.display())))?;
    let write = |name: &str, data: &str| -> io::Result<()> {
        let path = outdir.join(name);
        fs::write(&path, data)
            .map_err(|e| io::Error::new(e.kind(), format!("writing {}: {e}", path.display())))
    };

    let report_json = serde_json::to_string_pretty(report).expect("report serializes");
    let csv = table_csv(report);
    write("report.json", &report_json)?;
    write("table.csv", &csv)?;

    let created_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = serde_json::json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "created_unix": created_unix,
        "config": config,
        "workers": workers,
        "verdict": report.verdict,
        "truncation_certificates": report.certificates,
        "outputs": {
            "report.json": sha256_hex(report_json.as_bytes()),
            "table.csv": sha256_hex(csv.as_bytes()),
        },
    });
    write("manifest.json", &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))
}
