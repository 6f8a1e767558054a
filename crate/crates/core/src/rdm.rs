//! Reduced density matrices of site subsets.
//!
//! Basis states are bucketed once per subsystem by their environment
//! configuration. Each bucket contributes an outer product of at most `2^l`
//! amplitudes, so a trace costs `O(dim * 2^l)` instead of `O(dim^2)`.
//! Subsystem configurations are indexed with the first listed site as the most
//! significant bit, matching the usual tensor-product ordering.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{site_mask, BlockadeBasis, StateVector};
use crate::linalg::hermitian_eigenvalues;
use crate::C64;

pub const MAX_SUBSYSTEM_SITES: usize = 6;
pub const EIGEN_CLAMP: f64 = -1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsystemPattern {
    Adjacent,
    OddSeparated,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemSpec {
    sites: Vec<usize>,
    pattern: SubsystemPattern,
}

impl SubsystemSpec {
    pub fn new(sites: Vec<usize>, pattern: SubsystemPattern) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Subsystem("no sites given".into()));
        }
        if sites.len() > MAX_SUBSYSTEM_SITES {
            return Err(Error::Subsystem(format!(
                "{} sites exceeds the limit of {MAX_SUBSYSTEM_SITES}",
                sites.len()
            )));
        }
        if sites[0] == 0 || sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Subsystem(format!("sites {sites:?} must be strictly increasing and 1-based")));
        }
        Ok(Self { sites, pattern })
    }

    /// `len` spins two sites apart starting at the chain centre `N/2`.
    pub fn odd_separated(n_sites: usize, len: usize) -> Result<Self> {
        let start = n_sites / 2;
        let sites = (0..len).map(|k| start + 2 * k).collect();
        let spec = Self::new(sites, SubsystemPattern::OddSeparated)?;
        spec.check_range(n_sites)?;
        Ok(spec)
    }

    /// `len` consecutive spins starting at the chain centre `N/2`.
    pub fn adjacent(n_sites: usize, len: usize) -> Result<Self> {
        let start = n_sites / 2;
        let sites = (0..len).map(|k| start + k).collect();
        let spec = Self::new(sites, SubsystemPattern::Adjacent)?;
        spec.check_range(n_sites)?;
        Ok(spec)
    }

    pub fn custom(sites: Vec<usize>) -> Result<Self> {
        Self::new(sites, SubsystemPattern::Custom)
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn pattern(&self) -> SubsystemPattern {
        self.pattern
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dim(&self) -> usize {
        1 << self.sites.len()
    }

    pub fn check_range(&self, n_sites: usize) -> Result<()> {
        match self.sites.last() {
            Some(&last) if last > n_sites => Err(Error::Subsystem(format!(
                "site {last} outside chain of {n_sites} sites"
            ))),
            _ => Ok(()),
        }
    }

    /// File-name friendly label: `odd3`, `adj2`, or `s4-7-9`.
    pub fn label(&self) -> String {
        match self.pattern {
            SubsystemPattern::OddSeparated => format!("odd{}", self.len()),
            SubsystemPattern::Adjacent => format!("adj{}", self.len()),
            SubsystemPattern::Custom => {
                let parts: Vec<String> = self.sites.iter().map(|s| s.to_string()).collect();
                format!("s{}", parts.join("-"))
            }
        }
    }
}

impl fmt::Display for SubsystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}", self.label(), self.sites)
    }
}

/// A reduced state at one snapshot time.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensityMatrix {
    pub t: f64,
    pub mat: DMatrix<C64>,
}

impl ReducedDensityMatrix {
    pub fn new(t: f64, mat: DMatrix<C64>) -> Self {
        Self { t, mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        crate::linalg::trace(&self.mat)
    }

    /// Spectrum sorted in descending order, clamped at zero and renormalised.
    pub fn eigenvalues_desc(&self) -> Result<Vec<f64>> {
        eigenvalues_desc(&self.mat)
    }
}

/// Real eigenvalues of a density matrix, descending, with roundoff negatives
/// clamped to zero and the result renormalised to unit sum.
pub fn eigenvalues_desc(rho: &DMatrix<C64>) -> Result<Vec<f64>> {
    let mut eig = hermitian_eigenvalues(rho);
    for e in eig.iter_mut() {
        if *e < EIGEN_CLAMP {
            return Err(Error::NegativeEigenvalue(*e));
        }
        if *e < 0.0 {
            *e = 0.0;
        }
    }
    let sum: f64 = eig.iter().sum();
    if sum <= 0.0 {
        return Err(Error::Unnormalized(sum));
    }
    eig.iter_mut().for_each(|e| *e /= sum);
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(eig)
}

/// Basis indices bucketed by environment, with each member's position inside
/// the kept block.
#[derive(Clone, Debug)]
struct Buckets {
    dim: usize,
    offsets: Vec<usize>,
    members: Vec<(u32, u32)>,
}

impl Buckets {
    /// `keys` yields `(environment, kept_index)` for every basis state in order.
    fn build(dim: usize, keys: impl Iterator<Item = (u32, u32)>) -> Self {
        let mut tagged: Vec<(u32, u32, u32)> = keys
            .enumerate()
            .map(|(idx, (env, kept))| (env, kept, idx as u32))
            .collect();
        tagged.sort_unstable();
        let mut offsets = vec![0];
        let mut members = Vec::with_capacity(tagged.len());
        for (k, &(env, kept, idx)) in tagged.iter().enumerate() {
            if k > 0 && tagged[k - 1].0 != env {
                offsets.push(members.len());
            }
            members.push((idx, kept));
        }
        offsets.push(members.len());
        Self { dim, offsets, members }
    }

    fn accumulate(&self, psi: &[C64]) -> DMatrix<C64> {
        let mut rho = DMatrix::<C64>::zeros(self.dim, self.dim);
        for w in self.offsets.windows(2) {
            let group = &self.members[w[0]..w[1]];
            for &(i, a) in group {
                let ai = psi[i as usize];
                if ai == C64::new(0.0, 0.0) {
                    continue;
                }
                for &(j, b) in group {
                    rho[(a as usize, b as usize)] += ai * psi[j as usize].conj();
                }
            }
        }
        rho
    }
}

/// Precomputed bucketing for repeated traces onto the same subsystem.
#[derive(Clone, Debug)]
pub struct PartialTracePlan {
    sub: SubsystemSpec,
    n_sites: usize,
    buckets: Buckets,
}

impl PartialTracePlan {
    pub fn new(basis: &BlockadeBasis, sub: &SubsystemSpec) -> Result<Self> {
        let n = basis.n_sites();
        sub.check_range(n)?;
        let masks: Vec<u32> = sub.sites().iter().map(|&s| site_mask(n, s)).collect();
        let sub_mask = masks.iter().fold(0, |a, m| a | m);
        let l = masks.len();
        let keys = basis.states().iter().map(|s| {
            let bits = s.bits();
            let kept = masks
                .iter()
                .enumerate()
                .fold(0u32, |acc, (k, m)| if bits & m != 0 { acc | (1 << (l - 1 - k)) } else { acc });
            (bits & !sub_mask, kept)
        });
        Ok(Self { sub: sub.clone(), n_sites: n, buckets: Buckets::build(sub.dim(), keys) })
    }

    pub fn subsystem(&self) -> &SubsystemSpec {
        &self.sub
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn trace(&self, psi: &StateVector, t: f64) -> ReducedDensityMatrix {
        ReducedDensityMatrix::new(t, self.buckets.accumulate(psi.amplitudes()))
    }
}

/// Trace out everything except `sub` (builds a throwaway plan).
pub fn partial_trace(basis: &BlockadeBasis, psi: &StateVector, sub: &SubsystemSpec, t: f64) -> Result<ReducedDensityMatrix> {
    if psi.len() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: psi.len() });
    }
    Ok(PartialTracePlan::new(basis, sub)?.trace(psi, t))
}

/// Reduced state of the left block `1..=cut` for an arbitrary cut.
///
/// The kept block is indexed by its blockade-allowed configurations only, so
/// the matrix stays small for half-chain cuts (Fibonacci instead of `2^cut`).
#[derive(Clone, Debug)]
pub struct BlockSplitPlan {
    cut: usize,
    buckets: Buckets,
}

impl BlockSplitPlan {
    pub fn new(basis: &BlockadeBasis, cut: usize) -> Result<Self> {
        let n = basis.n_sites();
        if cut == 0 || cut >= n {
            return Err(Error::Subsystem(format!("cut {cut} must lie strictly inside 1..{n}")));
        }
        let shift = n - cut;
        let right_mask = (1u32 << shift) - 1;
        let mut lefts: Vec<u32> = basis.states().iter().map(|s| s.bits() >> shift).collect();
        lefts.sort_unstable();
        lefts.dedup();
        let keys = basis.states().iter().map(|s| {
            let left = s.bits() >> shift;
            let kept = lefts.binary_search(&left).expect("left block enumerated above") as u32;
            (s.bits() & right_mask, kept)
        });
        let dim = lefts.len();
        Ok(Self { cut, buckets: Buckets::build(dim, keys) })
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn block_dim(&self) -> usize {
        self.buckets.dim
    }

    pub fn reduced(&self, psi: &StateVector) -> DMatrix<C64> {
        self.buckets.accumulate(psi.amplitudes())
    }

    /// Clamped, renormalised, descending Schmidt weights.
    pub fn spectrum(&self, psi: &StateVector) -> Result<Vec<f64>> {
        eigenvalues_desc(&self.reduced(psi))
    }
}
