use std::sync::Arc;

use crate::error::Result;
use crate::evolve::evolve_with;
use crate::hamiltonian;
use crate::hilbert::BlockadeBasis;
use crate::metrics::{negativity, shannon_entropy, RdmSeries};
use crate::quench::manifest::RunManifest;
use crate::rdm::{BlockSplitPlan, PartialTracePlan};

/// Everything retained from a trajectory; full states are dropped after each snapshot.
#[derive(Clone, Debug)]
pub struct SnapshotStore {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub ee_times: Vec<f64>,
    pub ee_half: Vec<f64>,
    /// One entry per manifest subsystem, in manifest order.
    pub subsystems: Vec<RdmSeries>,
    /// `(label, series)` per negativity probe, in manifest order.
    pub negativity: Vec<(String, Vec<f64>)>,
}

/// Evolve the Néel state under the manifest's model and fill a snapshot store.
pub fn simulate(manifest: &RunManifest) -> Result<SnapshotStore> {
    manifest.validate()?;
    let spec = &manifest.spec;
    let cfg = &manifest.cfg;
    let basis = Arc::new(BlockadeBasis::new(spec.n_sites)?);
    let h = hamiltonian::build(basis.clone(), spec)?;

    let plans = manifest
        .subsystems
        .iter()
        .map(|s| PartialTracePlan::new(&basis, s))
        .collect::<Result<Vec<_>>>()?;
    let probes = manifest
        .negativity
        .iter()
        .map(|p| Ok((p.label(), p.dims(), PartialTracePlan::new(&basis, &p.joint()?)?)))
        .collect::<Result<Vec<_>>>()?;
    let half = if manifest.ee_every > 0 { Some(BlockSplitPlan::new(&basis, spec.n_sites / 2)?) } else { None };

    let n_snap = cfg.n_snapshots();
    let mut store = SnapshotStore {
        times: Vec::with_capacity(n_snap),
        fidelity: Vec::with_capacity(n_snap),
        ee_times: Vec::new(),
        ee_half: Vec::new(),
        subsystems: manifest
            .subsystems
            .iter()
            .map(|s| RdmSeries { label: s.label(), spacing: cfg.snapshot_spacing(), rdms: Vec::with_capacity(n_snap) })
            .collect(),
        negativity: probes.iter().map(|(l, _, _)| (l.clone(), Vec::with_capacity(n_snap))).collect(),
    };

    let neel = basis.index_of(basis.neel_config()).expect("Néel state is blockaded");
    evolve_with(&h, basis.neel_state(), cfg, |k, t, psi| {
        store.times.push(t);
        store.fidelity.push(psi[neel].norm_sqr().min(1.0));
        for (plan, series) in plans.iter().zip(store.subsystems.iter_mut()) {
            series.rdms.push(plan.trace(psi, t));
        }
        for ((_, (da, db), plan), (_, out)) in probes.iter().zip(store.negativity.iter_mut()) {
            out.push(negativity(&plan.trace(psi, t).mat, *da, *db)?);
        }
        if let Some(half) = &half {
            if k % manifest.ee_every == 0 {
                store.ee_times.push(t);
                store.ee_half.push(shannon_entropy(&half.spectrum(psi)?));
            }
        }
        Ok(())
    })?;
    Ok(store)
}
