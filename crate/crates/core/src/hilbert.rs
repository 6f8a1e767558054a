//! Rydberg-blockaded Hilbert space of an open chain.
//!
//! Configurations are stored as the integer value of the bitstring read left to
//! right, so site 1 is bit `N - 1` and site `N` is bit 0. The basis is ordered by
//! that integer value, which makes indices reproducible across runs and lets the
//! index lookup be a binary search.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::C64;

pub const MIN_SITES: usize = 2;
pub const MAX_SITES: usize = 28;

/// Bit mask of a 1-based site on an `n_sites` chain.
#[inline]
pub fn site_mask(n_sites: usize, site: usize) -> u32 {
    debug_assert!(site >= 1 && site <= n_sites);
    1u32 << (n_sites - site)
}

/// True when no two adjacent bits are both set.
#[inline]
pub fn is_blockaded(bits: u32) -> bool {
    bits & (bits >> 1) == 0
}

/// A spin configuration on the chain; bit 1 is spin up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct SpinConfig(pub u32);

impl SpinConfig {
    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_up(self, n_sites: usize, site: usize) -> bool {
        self.0 & site_mask(n_sites, site) != 0
    }

    /// `+1` for up, `-1` for down.
    #[inline]
    pub fn sz(self, n_sites: usize, site: usize) -> f64 {
        if self.is_up(n_sites, site) {
            1.0
        } else {
            -1.0
        }
    }

    /// Bitstring with site 1 first.
    pub fn to_bitstring(self, n_sites: usize) -> String {
        (1..=n_sites)
            .map(|s| if self.is_up(n_sites, s) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(s: &str) -> Option<Self> {
        if s.is_empty() || s.len() > 32 {
            return None;
        }
        let mut bits = 0u32;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return None,
                };
        }
        Some(SpinConfig(bits))
    }
}

/// All blockade-respecting configurations of an open chain, in ascending order.
#[derive(Clone, Debug)]
pub struct BlockadeBasis {
    n_sites: usize,
    states: Vec<SpinConfig>,
}

impl BlockadeBasis {
    pub fn new(n_sites: usize) -> Result<Self> {
        if !(MIN_SITES..=MAX_SITES).contains(&n_sites) {
            return Err(Error::SiteCount(n_sites));
        }
        let mut states = Vec::with_capacity(fibonacci(n_sites + 2) as usize);
        enumerate(n_sites, 0, false, &mut states);
        Ok(Self { n_sites, states })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[SpinConfig] {
        &self.states
    }

    pub fn state(&self, index: usize) -> SpinConfig {
        self.states[index]
    }

    pub fn index_of(&self, config: SpinConfig) -> Option<usize> {
        self.states.binary_search(&config).ok()
    }

    /// Néel configuration `0101...` (site 1 down).
    pub fn neel_config(&self) -> SpinConfig {
        let bits = (1..=self.n_sites)
            .filter(|s| s % 2 == 0)
            .fold(0u32, |acc, s| acc | site_mask(self.n_sites, s));
        SpinConfig(bits)
    }

    pub fn neel_state(&self) -> StateVector {
        let neel = self.neel_config();
        assert!(is_blockaded(neel.bits()));
        let idx = self
            .index_of(neel)
            .expect("Néel configuration is always in the blockaded basis");
        StateVector::basis_state(self.dim(), idx)
    }
}

fn enumerate(remaining: usize, acc: u32, prev_up: bool, out: &mut Vec<SpinConfig>) {
    if remaining == 0 {
        out.push(SpinConfig(acc));
        return;
    }
    enumerate(remaining - 1, acc << 1, false, out);
    if !prev_up {
        enumerate(remaining - 1, (acc << 1) | 1, true, out);
    }
}

/// Fibonacci numbers with F(1) = F(2) = 1.
pub fn fibonacci(n: usize) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..n {
        let next = a + b;
        a = b;
        b = next;
    }
    a
}

/// Complex amplitudes over a blockaded basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        Self(amps)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); dim])
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = C64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.0)
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> C64 {
        crate::linalg::dot(&self.0, &other.0)
    }

    /// Multiply by the global phase `exp(i theta)`.
    pub fn with_phase(mut self, theta: f64) -> Self {
        let phase = C64::from_polar(1.0, theta);
        self.0.iter_mut().for_each(|a| *a *= phase);
        self
    }
}

impl Index<usize> for StateVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for StateVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#b}", self.0)
    }
}
