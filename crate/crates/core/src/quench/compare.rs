use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{find_maxima_period, find_minima_period};
use crate::quench::io::{delta_tag, format_value};
use crate::quench::RunOutputs;

/// One degree curve per model on a shared separation grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveTable {
    pub label: String,
    pub deltas: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodRow {
    pub model: String,
    pub quantity: String,
    pub value: Option<f64>,
    pub spread: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub models: Vec<String>,
    pub degree: Vec<CurveTable>,
    pub degree1: Vec<CurveTable>,
    pub periods: Vec<PeriodRow>,
}

impl Comparison {
    /// Largest absolute deviation of any model from the first one.
    pub fn max_abs_difference(&self) -> f64 {
        let mut worst = 0.0f64;
        for table in self.degree.iter().chain(&self.degree1) {
            for col in &table.columns[1..] {
                for (a, b) in col.iter().zip(&table.columns[0]) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        let per_model = self.periods.len() / self.models.len().max(1);
        for (k, row) in self.periods.iter().enumerate().skip(per_model) {
            let base = &self.periods[k % per_model];
            if let (Some(a), Some(b)) = (row.value, base.value) {
                worst = worst.max((a - b).abs());
            } else if row.value.is_some() != base.value.is_some() {
                worst = f64::INFINITY;
            }
        }
        worst
    }
}

fn check_compatible(runs: &[RunOutputs]) -> Result<()> {
    let Some(first) = runs.first() else {
        return Err(Error::GridMismatch("nothing to compare".into()));
    };
    let a = &first.manifest;
    let labels = |r: &RunOutputs| r.manifest.subsystems.iter().map(|s| s.label()).collect::<Vec<_>>();
    for r in &runs[1..] {
        let b = &r.manifest;
        if (a.cfg.tau - b.cfg.tau).abs() > 1e-15 || a.cfg.snapshot_every != b.cfg.snapshot_every {
            return Err(Error::GridMismatch(format!("time grids differ: {:?} vs {:?}", a.cfg, b.cfg)));
        }
        if a.delta_grid != b.delta_grid || a.series_deltas != b.series_deltas {
            return Err(Error::GridMismatch("separation grids differ".into()));
        }
        if labels(first) != labels(r) {
            return Err(Error::GridMismatch(format!("subsystems differ: {:?} vs {:?}", labels(first), labels(r))));
        }
    }
    Ok(())
}

fn unique_labels(runs: &[RunOutputs]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(runs.len());
    for r in runs {
        let base = r.manifest.spec.label();
        let mut label = base.clone();
        let mut k = 2;
        while out.contains(&label) {
            label = format!("{base}#{k}");
            k += 1;
        }
        out.push(label);
    }
    out
}

fn period_rows(model: &str, run: &RunOutputs) -> Vec<PeriodRow> {
    let (q, w) = (run.manifest.deep_quantile, run.manifest.deep_window);
    let mut rows = Vec::new();
    let mut push = |quantity: String, est: Option<(f64, f64)>| {
        rows.push(PeriodRow {
            model: model.to_string(),
            quantity,
            value: est.map(|e| e.0),
            spread: est.map(|e| e.1),
        })
    };
    // revivals stand on a near-zero background, so one global threshold suffices
    let fid = find_maxima_period(&run.times, &run.fidelity, q, f64::INFINITY).ok().map(|p| (p.period, p.spread));
    push("fidelity_maxima_period".into(), fid);
    for s in &run.td {
        let est = find_minima_period(&s.times, &s.values, q, w).ok().map(|p| (p.period, p.spread));
        push(format!("td_{}_{}_minima_period", s.label, delta_tag(s.delta)), est);
    }
    for c in &run.degree {
        push(format!("degree_{}_argmin", c.label), Some((c.argmin_after_rise().0, 0.0)));
    }
    for c in &run.degree1 {
        push(format!("degree1_{}_argmin", c.label), Some((c.argmin_after_rise().0, 0.0)));
    }
    rows
}

/// Side-by-side degree curves and revival-period estimates.
///
/// Runs must share the time step, snapshot stride, separation grids and
/// subsystem catalogue; chain lengths may differ.
pub fn compare_models(runs: &[RunOutputs]) -> Result<Comparison> {
    check_compatible(runs)?;
    let models = unique_labels(runs);
    let first = &runs[0];
    let table = |pick: fn(&RunOutputs) -> &Vec<crate::metrics::DegreeCurve>| {
        pick(first)
            .iter()
            .enumerate()
            .map(|(k, c)| CurveTable {
                label: c.label.clone(),
                deltas: c.deltas.clone(),
                columns: runs.iter().map(|r| pick(r)[k].degree.clone()).collect(),
            })
            .collect::<Vec<_>>()
    };
    let degree = table(|r| &r.degree);
    let degree1 = table(|r| &r.degree1);
    let periods = runs.iter().zip(&models).flat_map(|(r, m)| period_rows(m, r)).collect();
    Ok(Comparison { models, degree, degree1, periods })
}

/// `compare_degree_{sub}.csv`, `compare_degree1_{sub}.csv` and `compare_periods.csv`.
pub fn write_comparison(dir: &Path, cmp: &Comparison) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (prefix, tables) in [("degree", &cmp.degree), ("degree1", &cmp.degree1)] {
        for t in tables {
            let mut w = csv::Writer::from_path(dir.join(format!("compare_{prefix}_{}.csv", t.label)))?;
            let mut header = vec!["delta".to_string()];
            header.extend(cmp.models.iter().cloned());
            w.write_record(&header)?;
            for (i, d) in t.deltas.iter().enumerate() {
                let mut rec = vec![format_value(*d)];
                rec.extend(t.columns.iter().map(|c| format_value(c[i])));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
    }
    let mut w = csv::Writer::from_path(dir.join("compare_periods.csv"))?;
    w.write_record(["model", "quantity", "value", "spread"])?;
    for row in &cmp.periods {
        let cell = |v: Option<f64>| v.map(format_value).unwrap_or_default();
        w.write_record([row.model.clone(), row.quantity.clone(), cell(row.value), cell(row.spread)])?;
    }
    w.flush()?;
    Ok(())
}
