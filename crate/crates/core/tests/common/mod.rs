//! Dense reference implementations on the full 2^N space.
//!
//! Everything here is written from the operator definitions (Kronecker products
//! of single-site matrices, eigendecomposition exponentials, index-loop partial
//! traces) and shares no code with the sparse pipeline beyond the public types.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use scarflow::{BlockadeBasis, Model, ModelSpec, StateVector, C64};

/// Single-site operators in the (down, up) = (0, 1) basis.
pub fn sigma_x() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn sigma_z() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])
}

/// Projector onto spin down, `(1 - sigma_z) / 2`.
pub fn proj_down() -> DMatrix<f64> {
    (DMatrix::identity(2, 2) - sigma_z()) * 0.5
}

/// `op_1 (x) op_2 (x) ... (x) op_N` where unlisted sites carry the identity.
/// Site 1 is the leftmost factor, i.e. the most significant bit.
pub fn site_product(n: usize, ops: &[(usize, DMatrix<f64>)]) -> DMatrix<f64> {
    let mut out = DMatrix::from_element(1, 1, 1.0);
    for site in 1..=n {
        let factor = ops
            .iter()
            .filter(|(s, _)| *s == site)
            .fold(DMatrix::identity(2, 2), |acc, (_, m)| acc * m);
        out = out.kronecker(&factor);
    }
    out
}

fn on_chain(n: usize, site: isize) -> Option<usize> {
    (site >= 1 && site as usize <= n).then_some(site as usize)
}

/// Dense Hamiltonian on all 2^N configurations, assembled term by term.
pub fn dense_hamiltonian(spec: &ModelSpec) -> DMatrix<f64> {
    let n = spec.n_sites;
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    for i in 1..=n as isize {
        let mut pxp = vec![(i as usize, sigma_x())];
        for nb in [i - 1, i + 1] {
            if let Some(s) = on_chain(n, nb) {
                pxp.push((s, proj_down()));
            }
        }
        h += site_product(n, &pxp);
        if let Model::Pxpz { lambda, r } = spec.model {
            for z in [i - r as isize, i + r as isize] {
                if let Some(s) = on_chain(n, z) {
                    let mut term = pxp.clone();
                    term.push((s, sigma_z()));
                    h -= site_product(n, &term) * lambda;
                }
            }
        }
    }
    if let Model::Pxpxp { g } = spec.model {
        for i in 1..=(n as isize - 2) {
            let mut term = vec![(i as usize, sigma_x()), (i as usize + 2, sigma_x()), (i as usize + 1, proj_down())];
            for p in [i - 1, i + 3] {
                if let Some(s) = on_chain(n, p) {
                    term.push((s, proj_down()));
                }
            }
            h += site_product(n, &term) * g;
        }
    }
    h
}

/// Dense Hamiltonian restricted to the rows and columns of blockaded configurations.
pub fn restrict_to_basis(full: &DMatrix<f64>, basis: &BlockadeBasis) -> DMatrix<f64> {
    let states = basis.states();
    DMatrix::from_fn(states.len(), states.len(), |r, c| full[(states[r].0 as usize, states[c].0 as usize)])
}

/// Exact propagator `exp(-iHt)` through a real symmetric eigendecomposition.
pub struct DenseExp {
    values: DVector<f64>,
    vectors: DMatrix<C64>,
    adjoint: DMatrix<C64>,
}

impl DenseExp {
    pub fn new(h: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(h.clone());
        let vectors = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        let adjoint = vectors.adjoint();
        DenseExp { values: eig.eigenvalues, vectors, adjoint }
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn evolve(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut coeff = &self.adjoint * psi;
        for (k, c) in coeff.iter_mut().enumerate() {
            *c *= C64::from_polar(1.0, -self.values[k] * t);
        }
        &self.vectors * coeff
    }
}

/// Zero-padded embedding of a basis-space state into all 2^N configurations.
pub fn embed(basis: &BlockadeBasis, psi: &StateVector) -> DVector<C64> {
    let mut full = DVector::zeros(1usize << basis.n_sites());
    for (k, s) in basis.states().iter().enumerate() {
        full[s.0 as usize] = psi[k];
    }
    full
}

/// Néel state on the full space, `|down up down up ...>`.
pub fn full_neel(n: usize) -> DVector<C64> {
    let mut psi = DVector::zeros(1usize << n);
    let idx: usize = (2..=n).step_by(2).map(|s| 1usize << (n - s)).sum();
    psi[idx] = C64::new(1.0, 0.0);
    psi
}

/// Reduced density matrix of `sites` from a full-space pure state. The first
/// listed site is the most significant bit of the subsystem index.
pub fn full_partial_trace(n: usize, psi: &DVector<C64>, sites: &[usize]) -> DMatrix<C64> {
    let k = sites.len();
    let mut rho = DMatrix::zeros(1 << k, 1 << k);
    let sub_index = |cfg: usize| {
        sites.iter().fold(0usize, |acc, &s| (acc << 1) | ((cfg >> (n - s)) & 1))
    };
    let sub_mask: usize = sites.iter().map(|&s| 1usize << (n - s)).sum();
    // deposit[j]: full-space bits of subsystem configuration j
    let deposit: Vec<usize> = (0..1usize << k)
        .map(|j| {
            sites.iter().enumerate().map(|(p, &s)| ((j >> (k - 1 - p)) & 1) << (n - s)).sum()
        })
        .collect();
    for a in 0..psi.len() {
        if psi[a] == C64::new(0.0, 0.0) {
            continue;
        }
        let env = a & !sub_mask;
        let row = sub_index(a);
        for (col, &bits) in deposit.iter().enumerate() {
            let b = env | bits;
            rho[(row, col)] += psi[a] * psi[b].conj();
        }
    }
    rho
}

/// Eigenvalues of a Hermitian matrix through the real symmetric embedding
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is that of the input, doubled.
pub fn hermitian_spectrum(m: &DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    let big = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(big).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

pub fn dense_trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    0.5 * hermitian_spectrum(&(a - b)).iter().map(|x| x.abs()).sum::<f64>()
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn gaussian_c64(rng: &mut StdRng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random density matrix `G G^dag / tr` from a complex Ginibre matrix of the given rank.
pub fn random_density(rng: &mut StdRng, dim: usize, rank: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, rank, |_, _| gaussian_c64(rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

pub fn random_pure(rng: &mut StdRng, dim: usize) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| gaussian_c64(rng));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Haar-ish random unitary from the QR factor of a complex Ginibre matrix.
pub fn random_unitary(rng: &mut StdRng, dim: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
    g.qr().q()
}

/// Random normalized state on the blockaded basis.
pub fn random_blockaded(rng: &mut StdRng, basis: &BlockadeBasis) -> StateVector {
    let amps: Vec<C64> = (0..basis.dim()).map(|_| gaussian_c64(rng)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
}

pub fn outer(psi: &DVector<C64>) -> DMatrix<C64> {
    psi * psi.adjoint()
}
