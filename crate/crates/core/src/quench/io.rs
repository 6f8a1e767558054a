use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::{DegreeCurve, DistanceSeries};
use crate::quench::manifest::RunManifest;
use crate::quench::RunOutputs;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Twelve significant digits in scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{v:.11e}")
}

pub(crate) fn delta_tag(delta: f64) -> String {
    format!("{delta:.2}")
}

pub(crate) fn td_file(label: &str, delta: f64) -> String {
    format!("td_{label}_{}.csv", delta_tag(delta))
}

pub(crate) fn tvd_file(label: &str, delta: f64) -> String {
    format!("tvd_{label}_{}.csv", delta_tag(delta))
}

fn write_columns(path: &Path, header: [&str; 2], xs: &[f64], ys: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for (x, y) in xs.iter().zip(ys) {
        w.write_record([format_value(*x), format_value(*y)])?;
    }
    w.flush()?;
    Ok(())
}

fn read_columns(path: &Path, header: [&str; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
    let malformed = |reason: String| Error::Malformed { path: path.to_path_buf(), reason };
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(malformed(format!("expected header {header:?}, found {found:?}")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| malformed(format!("bad value in record {:?}", rec.position())))
        };
        xs.push(parse(0)?);
        ys.push(parse(1)?);
    }
    Ok((xs, ys))
}

fn data_files(outputs: &RunOutputs) -> Vec<String> {
    let m = &outputs.manifest;
    let mut files = vec!["fidelity.csv".to_string(), "ee_half.csv".to_string()];
    for s in &outputs.td {
        files.push(td_file(&s.label, s.delta));
    }
    for s in &outputs.tvd {
        files.push(tvd_file(&s.label, s.delta));
    }
    for sub in &m.subsystems {
        files.push(format!("degree_{}.csv", sub.label()));
        files.push(format!("degree1_{}.csv", sub.label()));
    }
    for (label, _) in &outputs.negativity {
        files.push(format!("negativity_{label}.csv"));
    }
    files.sort();
    files
}

/// Write every data file and `manifest.json`; returns the hex SHA-256 of the data files.
pub fn write_outputs(dir: &Path, outputs: &RunOutputs) -> Result<String> {
    fs::create_dir_all(dir)?;
    write_columns(&dir.join("fidelity.csv"), ["t", "fidelity"], &outputs.times, &outputs.fidelity)?;
    write_columns(&dir.join("ee_half.csv"), ["t", "ee_half"], &outputs.ee_times, &outputs.ee_half)?;
    for s in &outputs.td {
        write_columns(&dir.join(td_file(&s.label, s.delta)), ["t", "td"], &s.times, &s.values)?;
    }
    for s in &outputs.tvd {
        write_columns(&dir.join(tvd_file(&s.label, s.delta)), ["t", "tvd"], &s.times, &s.values)?;
    }
    for c in &outputs.degree {
        write_columns(&dir.join(format!("degree_{}.csv", c.label)), ["delta", "degree"], &c.deltas, &c.degree)?;
    }
    for c in &outputs.degree1 {
        write_columns(&dir.join(format!("degree1_{}.csv", c.label)), ["delta", "degree1"], &c.deltas, &c.degree)?;
    }
    for (label, series) in &outputs.negativity {
        write_columns(&dir.join(format!("negativity_{label}.csv")), ["t", "negativity"], &outputs.times, series)?;
    }

    let mut hasher = Sha256::new();
    for name in data_files(outputs) {
        hasher.update(name.as_bytes());
        hasher.update(fs::read(dir.join(&name))?);
    }
    let checksum = hex::encode(hasher.finalize());

    let mut manifest = outputs.manifest.clone();
    manifest.checksum = Some(checksum.clone());
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(checksum)
}

fn curve(dir: &Path, prefix: &str, label: &str) -> Result<DegreeCurve> {
    let (deltas, degree) = read_columns(&dir.join(format!("{prefix}_{label}.csv")), ["delta", prefix])?;
    Ok(DegreeCurve { label: label.to_string(), deltas, degree })
}

fn distance(path: PathBuf, column: &str, label: &str, delta: f64, spacing: f64) -> Result<DistanceSeries> {
    let (times, values) = read_columns(&path, ["t", column])?;
    Ok(DistanceSeries { label: label.to_string(), delta, spacing, times, values })
}

/// Read back a run directory written by [`write_outputs`].
pub fn load_run(dir: &Path) -> Result<RunOutputs> {
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    let spacing = manifest.cfg.snapshot_spacing();
    let (times, fidelity) = read_columns(&dir.join("fidelity.csv"), ["t", "fidelity"])?;
    let (ee_times, ee_half) = read_columns(&dir.join("ee_half.csv"), ["t", "ee_half"])?;
    let mut td = Vec::new();
    let mut tvd = Vec::new();
    let mut degree = Vec::new();
    let mut degree1 = Vec::new();
    for sub in &manifest.subsystems {
        let label = sub.label();
        for &d in &manifest.series_deltas {
            td.push(distance(dir.join(td_file(&label, d)), "td", &label, d, spacing)?);
            tvd.push(distance(dir.join(tvd_file(&label, d)), "tvd", &label, d, spacing)?);
        }
        degree.push(curve(dir, "degree", &label)?);
        degree1.push(curve(dir, "degree1", &label)?);
    }
    let negativity = manifest
        .negativity
        .iter()
        .map(|p| {
            let label = p.label();
            let (_, v) = read_columns(&dir.join(format!("negativity_{label}.csv")), ["t", "negativity"])?;
            Ok((label, v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutputs { manifest, times, fidelity, ee_times, ee_half, td, tvd, degree, degree1, negativity })
}
