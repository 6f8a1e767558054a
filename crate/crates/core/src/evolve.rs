//! Real-time propagation with a restarted Lanczos exponential.
//!
//! Each step builds a fresh Krylov space from the current state, so the
//! propagator is exact to the residual tolerance regardless of how many steps
//! are taken. The Lanczos vectors are fully reorthogonalised; with at most 30
//! of them this costs little compared with the sparse products.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{self, ModelSpec, SparseHamiltonian};
use crate::hilbert::{BlockadeBasis, StateVector};
use crate::linalg::{axpy, dot, norm};
use crate::C64;

pub const DEFAULT_TAU: f64 = 0.01;
pub const DEFAULT_T_MAX: f64 = 40.0;
pub const MAX_KRYLOV_DIM: usize = 30;
pub const KRYLOV_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub tau: f64,
    pub t_max: f64,
    pub snapshot_every: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { tau: DEFAULT_TAU, t_max: DEFAULT_T_MAX, snapshot_every: 1 }
    }
}

impl EvolutionConfig {
    pub fn new(tau: f64, t_max: f64) -> Self {
        Self { tau, t_max, snapshot_every: 1 }
    }

    /// Checks every field and returns all problems at once.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            out.push(format!("tau must be positive, got {}", self.tau));
            return out;
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            out.push(format!("t_max must be >= 0, got {}", self.t_max));
        } else {
            let ratio = self.t_max / self.tau;
            if (ratio - ratio.round()).abs() > 1e-6 {
                out.push(format!("t_max={} is not a multiple of tau={}", self.t_max, self.tau));
            }
        }
        if self.snapshot_every == 0 {
            out.push("snapshot_every must be >= 1".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(problems.join("; ")))
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.tau).round() as usize
    }

    /// Number of snapshots including `t = 0`.
    pub fn n_snapshots(&self) -> usize {
        self.n_steps() / self.snapshot_every + 1
    }

    pub fn snapshot_spacing(&self) -> f64 {
        self.snapshot_every as f64 * self.tau
    }

    pub fn snapshot_time(&self, k: usize) -> f64 {
        (k * self.snapshot_every) as f64 * self.tau
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        (0..self.n_snapshots()).map(|k| self.snapshot_time(k)).collect()
    }
}

/// Outcome of one Krylov expansion.
#[derive(Clone, Copy, Debug)]
pub struct KrylovStats {
    pub dim: usize,
    pub error_estimate: f64,
}

/// Reusable Lanczos workspace for `exp(-i H dt) psi`.
pub struct Propagator<'h> {
    h: &'h SparseHamiltonian,
    max_dim: usize,
    tol: f64,
    vectors: Vec<Vec<C64>>,
    pool: Vec<Vec<C64>>,
    w: Vec<C64>,
}

impl<'h> Propagator<'h> {
    pub fn new(h: &'h SparseHamiltonian) -> Self {
        Self::with_limits(h, MAX_KRYLOV_DIM, KRYLOV_TOL)
    }

    pub fn with_limits(h: &'h SparseHamiltonian, max_dim: usize, tol: f64) -> Self {
        let max_dim = max_dim.clamp(1, h.dim().max(1));
        Self {
            h,
            max_dim,
            tol,
            vectors: Vec::with_capacity(max_dim + 1),
            pool: Vec::new(),
            w: vec![C64::new(0.0, 0.0); h.dim()] }
    }

    /// Overwrite `psi` with `exp(-i H dt) psi`.
    pub fn advance(&mut self, psi: &mut [C64], dt: f64) -> Result<KrylovStats> {
        let dim = self.h.dim();
        if psi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: psi.len() });
        }
        let beta0 = norm(psi);
        if dt == 0.0 || beta0 == 0.0 {
            return Ok(KrylovStats { dim: 0, error_estimate: 0.0 });
        }

        let mut alphas: Vec<f64> = Vec::with_capacity(self.max_dim);
        let mut betas: Vec<f64> = Vec::with_capacity(self.max_dim);
        let scale = 1.0 / beta0;
        let mut first = self.take_vector(dim);
        first.iter_mut().zip(psi.iter()).for_each(|(v, p)| *v = p * scale);
        self.vectors.push(first);

        let mut coeffs = Vec::new();
        let mut estimate = f64::INFINITY;
        let mut converged = false;

        for j in 0..self.max_dim {
            self.h.apply(&self.vectors[j], &mut self.w);
            let alpha = dot(&self.vectors[j], &self.w).re;
            alphas.push(alpha);
            for v in &self.vectors {
                let overlap = dot(v, &self.w);
                axpy(-overlap, v, &mut self.w);
            }
            let beta = norm(&self.w);
            let m = j + 1;
            coeffs = tridiagonal_exp(&alphas, &betas, dt);
            estimate = beta * coeffs[m - 1].norm();
            // an invariant subspace makes the expansion exact
            let exhausted = beta <= 1e-14 * (alpha.abs() + 1.0) || m == dim;
            if exhausted || estimate < self.tol {
                converged = true;
                estimate = if exhausted { 0.0 } else { estimate };
                break;
            }
            if m == self.max_dim {
                break;
            }
            betas.push(beta);
            let mut next = self.take_vector(dim);
            let inv = 1.0 / beta;
            next.iter_mut().zip(&self.w).for_each(|(n, w)| *n = w * inv);
            self.vectors.push(next);
        }

        if !converged {
            self.recycle();
            return Err(Error::KrylovNotConverged { dim: self.max_dim, estimate, tol: self.tol, tau: dt });
        }

        let m = coeffs.len();
        psi.iter_mut().for_each(|p| *p = C64::new(0.0, 0.0));
        for (c, v) in coeffs.iter().zip(&self.vectors[..m]) {
            axpy(c * beta0, v, psi);
        }
        self.recycle();
        Ok(KrylovStats { dim: m, error_estimate: estimate })
    }

    fn take_vector(&mut self, dim: usize) -> Vec<C64> {
        self.pool.pop().unwrap_or_else(|| vec![C64::new(0.0, 0.0); dim])
    }

    fn recycle(&mut self) {
        self.pool.append(&mut self.vectors);
    }
}

/// First column of `exp(-i dt T)` for the symmetric tridiagonal `T`.
fn tridiagonal_exp(alphas: &[f64], betas: &[f64], dt: f64) -> Vec<C64> {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    (0..m)
        .map(|row| {
            (0..m)
                .map(|k| {
                    let phase = C64::from_polar(1.0, -dt * eig.eigenvalues[k]);
                    phase * (eig.eigenvectors[(row, k)] * eig.eigenvectors[(0, k)])
                })
                .sum()
        })
        .collect()
}

/// One propagation step `exp(-i H tau) psi`.
pub fn step(h: &SparseHamiltonian, psi: &StateVector, tau: f64) -> Result<StateVector> {
    let mut out = psi.clone();
    Propagator::new(h).advance(out.amplitudes_mut(), tau)?;
    Ok(out)
}

/// Snapshots of a full-state trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub spec: ModelSpec,
    pub cfg: EvolutionConfig,
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
}

/// Propagate `psi0` over the grid of `cfg`, handing every snapshot to `observe`.
///
/// Full states are never retained here; the observer decides what to keep.
pub fn evolve_with<F>(h: &SparseHamiltonian, psi0: StateVector, cfg: &EvolutionConfig, mut observe: F) -> Result<()>
where
    F: FnMut(usize, f64, &StateVector) -> Result<()>,
{
    cfg.validate()?;
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi0.len() });
    }
    let mut psi = psi0;
    let mut prop = Propagator::new(h);
    observe(0, 0.0, &psi)?;
    let mut snapshot = 1;
    for s in 1..=cfg.n_steps() {
        prop.advance(psi.amplitudes_mut(), cfg.tau)?;
        if s % cfg.snapshot_every == 0 {
            observe(snapshot, cfg.snapshot_time(snapshot), &psi)?;
            snapshot += 1;
        }
    }
    Ok(())
}

/// Quench from the Néel state, keeping every snapshot in memory.
///
/// Intended for small chains; the experiment driver streams instead.
pub fn run_quench(spec: &ModelSpec, cfg: &EvolutionConfig) -> Result<Trajectory> {
    spec.validate()?;
    cfg.validate()?;
    let basis = Arc::new(BlockadeBasis::new(spec.n_sites)?);
    let h = hamiltonian::build(basis.clone(), spec)?;
    let mut times = Vec::with_capacity(cfg.n_snapshots());
    let mut states = Vec::with_capacity(cfg.n_snapshots());
    evolve_with(&h, basis.neel_state(), cfg, |_, t, psi| {
        times.push(t);
        states.push(psi.clone());
        Ok(())
    })?;
    Ok(Trajectory { spec: *spec, cfg: *cfg, times, states })
}
