//! Experiment orchestration: manifests, snapshot storage, analysis, and files.
//!
//! A run directory holds one CSV per series plus `manifest.json`:
//!
//! | file | columns |
//! |------|---------|
//! | `fidelity.csv` | `t, fidelity` |
//! | `ee_half.csv` | `t, ee_half` |
//! | `td_{sub}_{delta}.csv` | `t, td` |
//! | `tvd_{sub}_{delta}.csv` | `t, tvd` |
//! | `degree_{sub}.csv` | `delta, degree` |
//! | `degree1_{sub}.csv` | `delta, degree1` |
//! | `negativity_{probe}.csv` | `t, negativity` |
//!
//! Values are written with 12 significant digits, so identical manifests give
//! byte-identical data files.

mod compare;
mod io;
mod manifest;
mod store;
mod sweep;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::Result;
use crate::metrics::{degree_curve, distance_series, tvd_degree_curve, tvd_series, DegreeCurve, DistanceSeries};

pub use compare::{compare_models, write_comparison, Comparison, PeriodRow};
pub use io::{format_value, load_run, write_outputs};
pub use manifest::{
    default_delta_grid, parse_subsystem, NegativityProbe, RunManifest, DEFAULT_EE_EVERY, DEFAULT_NEGATIVITY_BLOCKS,
    DEFAULT_SERIES_DELTAS, DEFAULT_SUBSYSTEMS,
};
pub use store::{simulate, SnapshotStore};
pub use sweep::{expand_sweep, run_sweep, SweepAxes};

/// Analysed results of one run, exactly what gets written to disk.
#[derive(Clone, Debug)]
pub struct RunOutputs {
    pub manifest: RunManifest,
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub ee_times: Vec<f64>,
    pub ee_half: Vec<f64>,
    /// Trace-distance series per (subsystem, series delta).
    pub td: Vec<DistanceSeries>,
    /// Spectral total-variation series per (subsystem, series delta).
    pub tvd: Vec<DistanceSeries>,
    pub degree: Vec<DegreeCurve>,
    pub degree1: Vec<DegreeCurve>,
    pub negativity: Vec<(String, Vec<f64>)>,
}

impl RunOutputs {
    pub fn degree_for(&self, label: &str) -> Option<&DegreeCurve> {
        self.degree.iter().find(|c| c.label == label)
    }

    pub fn degree1_for(&self, label: &str) -> Option<&DegreeCurve> {
        self.degree1.iter().find(|c| c.label == label)
    }

    pub fn td_for(&self, label: &str, delta: f64) -> Option<&DistanceSeries> {
        self.td.iter().find(|s| s.label == label && (s.delta - delta).abs() < 1e-9)
    }

    pub fn negativity_for(&self, label: &str) -> Option<&[f64]> {
        self.negativity.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }
}

/// Turn a filled snapshot store into every derived series of the manifest.
pub fn analyze(manifest: &RunManifest, store: &SnapshotStore) -> Result<RunOutputs> {
    let tau = manifest.cfg.snapshot_spacing();
    let per_sub = store
        .subsystems
        .par_iter()
        .map(|series| {
            let spectra = series.spectra()?;
            let td = manifest
                .series_deltas
                .iter()
                .map(|&d| distance_series(series, d))
                .collect::<Result<Vec<_>>>()?;
            let tvd = manifest
                .series_deltas
                .iter()
                .map(|&d| tvd_series(&spectra, d))
                .collect::<Result<Vec<_>>>()?;
            let degree = degree_curve(series, &manifest.delta_grid, tau)?;
            let degree1 = tvd_degree_curve(&spectra, &manifest.delta_grid, tau)?;
            Ok((td, tvd, degree, degree1))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = RunOutputs {
        manifest: manifest.clone(),
        times: store.times.clone(),
        fidelity: store.fidelity.clone(),
        ee_times: store.ee_times.clone(),
        ee_half: store.ee_half.clone(),
        td: Vec::new(),
        tvd: Vec::new(),
        degree: Vec::new(),
        degree1: Vec::new(),
        negativity: store.negativity.clone(),
    };
    for (td, tvd, degree, degree1) in per_sub {
        out.td.extend(td);
        out.tvd.extend(tvd);
        out.degree.push(degree);
        out.degree1.push(degree1);
    }
    Ok(out)
}

/// Simulate and analyse in memory without touching the filesystem.
pub fn run(manifest: &RunManifest) -> Result<RunOutputs> {
    let store = simulate(manifest)?;
    analyze(manifest, &store)
}

/// Simulate, analyse and write a complete run directory.
///
/// The returned outputs carry the manifest as written, including the output
/// checksum and wall-clock time.
pub fn run_experiment(manifest: &RunManifest, out_dir: &Path) -> Result<RunOutputs> {
    manifest.validate()?;
    let start = Instant::now();
    let mut outputs = run(manifest)?;
    outputs.manifest.software_version = env!("CARGO_PKG_VERSION").to_string();
    outputs.manifest.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    let checksum = write_outputs(out_dir, &outputs)?;
    outputs.manifest.checksum = Some(checksum);
    Ok(outputs)
}
