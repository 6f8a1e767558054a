use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{Family, ModelSpec};
use crate::quench::manifest::RunManifest;
use crate::quench::{run_experiment, RunOutputs};

/// Parameter lists whose Cartesian product defines a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxes {
    pub family: Family,
    pub n_sites: Vec<usize>,
    pub lambda: Vec<f64>,
    pub r: Vec<usize>,
    pub g: Vec<f64>,
}

/// One manifest per sweep point. Axes that the family ignores are not expanded.
///
/// `template` resolves chain-dependent parts (subsystems, probes) for each spec.
pub fn expand_sweep<F>(axes: &SweepAxes, template: F) -> Result<Vec<RunManifest>>
where
    F: Fn(ModelSpec) -> Result<RunManifest>,
{
    let one = |v: &[f64]| if v.is_empty() { vec![0.0] } else { v.to_vec() };
    let (lambdas, ranges, gs) = match axes.family {
        Family::Pxp => (vec![0.0], vec![0], vec![0.0]),
        Family::Pxpz => (one(&axes.lambda), axes.r.clone(), vec![0.0]),
        Family::Pxpxp => (vec![0.0], vec![0], one(&axes.g)),
    };
    if axes.n_sites.is_empty() || ranges.is_empty() {
        return Err(Error::InvalidParameter("sweep axis is empty".into()));
    }
    let mut out = Vec::new();
    for &n in &axes.n_sites {
        for &lambda in &lambdas {
            for &r in &ranges {
                for &g in &gs {
                    out.push(template(axes.family.spec(n, lambda, r, g))?);
                }
            }
        }
    }
    Ok(out)
}

/// Run every manifest into `out_dir/<model label>/`, in parallel.
pub fn run_sweep(manifests: &[RunManifest], out_dir: &Path) -> Result<Vec<RunOutputs>> {
    let problems: Vec<String> = manifests
        .iter()
        .flat_map(|m| m.problems().into_iter().map(move |p| format!("{}: {p}", m.spec.label())))
        .collect();
    if !problems.is_empty() {
        return Err(Error::InvalidManifest(problems));
    }
    manifests
        .par_iter()
        .map(|m| run_experiment(m, &out_dir.join(m.spec.label())))
        .collect()
}
