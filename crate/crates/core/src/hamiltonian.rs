//! Sparse PXP Hamiltonians on the blockaded basis.
//!
//! All three families share the same building block: a single spin flip on
//! site `i` that is allowed only when every in-chain neighbour of `i` is down.
//! The two end sites carry the one-sided boundary flips `X_1 P_2` and
//! `P_{N-1} X_N`.
//!
//! * PXP: every allowed flip has matrix element 1.
//! * PXPZ: an allowed flip on site `i` is dressed by
//!   `1 - lambda * (Z_{i-r} + Z_{i+r})`, dropping whichever `Z` falls off the chain.
//! * PXPXP: adds `g` times the correlated double flip of sites `i` and `i + 2`
//!   with `i-1`, `i+1`, `i+3` down, for `i = 1..=N-2`; projectors that fall off
//!   the chain are dropped.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{is_blockaded, site_mask, BlockadeBasis, SpinConfig};
use crate::C64;

pub const DEFAULT_LAMBDA: f64 = 0.05;
pub const DEFAULT_RANGE: usize = 3;
pub const DEFAULT_G: f64 = 0.25;

/// Dimension above which the matrix-vector product is split over rayon workers.
const PARALLEL_DIM: usize = 1 << 15;

/// Model family without parameters, as named on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pxp,
    Pxpz,
    Pxpxp,
}

impl Family {
    pub fn spec(self, n_sites: usize, lambda: f64, r: usize, g: f64) -> ModelSpec {
        match self {
            Family::Pxp => ModelSpec::pxp(n_sites),
            Family::Pxpz => ModelSpec::pxpz(n_sites, lambda, r),
            Family::Pxpxp => ModelSpec::pxpxp(n_sites, g),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pxp" => Ok(Family::Pxp),
            "pxpz" => Ok(Family::Pxpz),
            "pxpxp" => Ok(Family::Pxpxp),
            other => Err(Error::InvalidParameter(format!("unknown model family '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "UPPERCASE")]
pub enum Model {
    Pxp,
    Pxpz { lambda: f64, r: usize },
    Pxpxp { g: f64 },
}

impl Model {
    pub fn family_name(&self) -> &'static str {
        match self {
            Model::Pxp => "PXP",
            Model::Pxpz { .. } => "PXPZ",
            Model::Pxpxp { .. } => "PXPXP",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n_sites: usize,
    #[serde(flatten)]
    pub model: Model,
}

impl ModelSpec {
    pub fn pxp(n_sites: usize) -> Self {
        Self { n_sites, model: Model::Pxp }
    }

    pub fn pxpz(n_sites: usize, lambda: f64, r: usize) -> Self {
        Self { n_sites, model: Model::Pxpz { lambda, r } }
    }

    pub fn pxpxp(n_sites: usize, g: f64) -> Self {
        Self { n_sites, model: Model::Pxpxp { g } }
    }

    pub fn validate(&self) -> Result<()> {
        if !(crate::hilbert::MIN_SITES..=crate::hilbert::MAX_SITES).contains(&self.n_sites) {
            return Err(Error::SiteCount(self.n_sites));
        }
        match self.model {
            Model::Pxp => Ok(()),
            Model::Pxpz { lambda, r } => {
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
                }
                if r < 2 || r >= self.n_sites {
                    return Err(Error::DegenerateRange { r, n_sites: self.n_sites });
                }
                Ok(())
            }
            Model::Pxpxp { g } => {
                if !(g >= 0.0 && g.is_finite()) {
                    return Err(Error::InvalidParameter(format!("g must be >= 0, got {g}")));
                }
                if self.n_sites < 5 {
                    return Err(Error::InvalidParameter(format!(
                        "PXPXP needs at least 5 sites, got {}",
                        self.n_sites
                    )));
                }
                Ok(())
            }
        }
    }

    /// Short label used for directory names and comparison tables.
    pub fn label(&self) -> String {
        match self.model {
            Model::Pxp => format!("pxp_n{}", self.n_sites),
            Model::Pxpz { lambda, r } => format!("pxpz_n{}_l{}_r{}", self.n_sites, lambda, r),
            Model::Pxpxp { g } => format!("pxpxp_n{}_g{}", self.n_sites, g),
        }
    }
}

/// Real symmetric sparse operator in compressed-row form.
///
/// Columns inside each row are sorted, so iteration order (and therefore any
/// dump of the entries) is deterministic.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    basis: Arc<BlockadeBasis>,
    spec: ModelSpec,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

pub fn build_pxp(basis: Arc<BlockadeBasis>) -> SparseHamiltonian {
    let spec = ModelSpec::pxp(basis.n_sites());
    assemble(basis, spec)
}

pub fn build_pxpz(basis: Arc<BlockadeBasis>, lambda: f64, r: usize) -> Result<SparseHamiltonian> {
    let spec = ModelSpec::pxpz(basis.n_sites(), lambda, r);
    spec.validate()?;
    Ok(assemble(basis, spec))
}

pub fn build_pxpxp(basis: Arc<BlockadeBasis>, g: f64) -> Result<SparseHamiltonian> {
    let spec = ModelSpec::pxpxp(basis.n_sites(), g);
    spec.validate()?;
    Ok(assemble(basis, spec))
}

/// Build whichever family `spec` names on a basis of matching size.
pub fn build(basis: Arc<BlockadeBasis>, spec: &ModelSpec) -> Result<SparseHamiltonian> {
    spec.validate()?;
    if spec.n_sites != basis.n_sites() {
        return Err(Error::DimensionMismatch { expected: spec.n_sites, got: basis.n_sites() });
    }
    Ok(assemble(basis, *spec))
}

/// Sites adjacent to `site` that lie on the chain, as a bit mask.
#[inline]
fn neighbour_mask(n: usize, site: usize) -> u32 {
    let mut m = 0;
    if site > 1 {
        m |= site_mask(n, site - 1);
    }
    if site < n {
        m |= site_mask(n, site + 1);
    }
    m
}

fn assemble(basis: Arc<BlockadeBasis>, spec: ModelSpec) -> SparseHamiltonian {
    let n = basis.n_sites();
    let mut row_ptr = Vec::with_capacity(basis.dim() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut row: Vec<(u32, f64)> = Vec::with_capacity(2 * n);
    row_ptr.push(0);

    for &state in basis.states() {
        row.clear();
        let bits = state.bits();
        for site in 1..=n {
            if bits & neighbour_mask(n, site) != 0 {
                continue;
            }
            let mut element = 1.0;
            if let Model::Pxpz { lambda, r } = spec.model {
                let mut zsum = 0.0;
                if site > r {
                    zsum += state.sz(n, site - r);
                }
                if site + r <= n {
                    zsum += state.sz(n, site + r);
                }
                element -= lambda * zsum;
            }
            push_flip(&basis, bits ^ site_mask(n, site), element, &mut row);
        }
        if let Model::Pxpxp { g } = spec.model {
            if g != 0.0 {
                for site in 1..=n - 2 {
                    let mut guard = site_mask(n, site + 1);
                    if site > 1 {
                        guard |= site_mask(n, site - 1);
                    }
                    if site + 3 <= n {
                        guard |= site_mask(n, site + 3);
                    }
                    if bits & guard != 0 {
                        continue;
                    }
                    let flipped = bits ^ site_mask(n, site) ^ site_mask(n, site + 2);
                    push_flip(&basis, flipped, g, &mut row);
                }
            }
        }
        row.sort_by_key(|&(c, _)| c);
        for &(c, v) in &row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }

    SparseHamiltonian { basis, spec, row_ptr, cols, vals }
}

fn push_flip(basis: &BlockadeBasis, target: u32, element: f64, row: &mut Vec<(u32, f64)>) {
    if element == 0.0 {
        return;
    }
    debug_assert!(is_blockaded(target));
    let col = basis
        .index_of(SpinConfig(target))
        .expect("allowed flips stay inside the blockaded basis");
    row.push((col as u32, element));
}

impl SparseHamiltonian {
    pub fn basis(&self) -> &Arc<BlockadeBasis> {
        &self.basis
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(row, col, value)` triplets in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k] as usize, self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&(col as u32)) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(r, c, v)| self.get(c, r) == v)
    }

    /// `out = H x`
    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        let row_kernel = |r: usize, o: &mut C64| {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            *o = acc;
        };
        if self.dim() >= PARALLEL_DIM {
            out.par_iter_mut().enumerate().for_each(|(r, o)| row_kernel(r, o));
        } else {
            out.iter_mut().enumerate().for_each(|(r, o)| row_kernel(r, o));
        }
    }

    /// `<psi|H|psi>`, real for a symmetric operator.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        let mut h_psi = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(psi, &mut h_psi);
        crate::linalg::dot(psi, &h_psi).re
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// Three whitespace-separated columns `row col value`, one entry per line.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (r, c, v) in self.entries() {
            writeln!(w, "{r} {c} {v:.17e}")?;
        }
        Ok(())
    }
}
