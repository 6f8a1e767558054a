use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::EvolutionConfig;
use crate::hamiltonian::ModelSpec;
use crate::metrics::{grid_shift, DEFAULT_DEEP_QUANTILE, DEFAULT_DEEP_WINDOW};

fn default_deep_window() -> f64 {
    DEFAULT_DEEP_WINDOW
}
use crate::rdm::{SubsystemPattern, SubsystemSpec, MAX_SUBSYSTEM_SITES};

pub const DEFAULT_SUBSYSTEMS: [&str; 5] = ["odd1", "odd2", "odd3", "odd4", "adj2"];
pub const DEFAULT_SERIES_DELTAS: [f64; 3] = [1.0, 2.0, 3.0];
pub const DEFAULT_NEGATIVITY_BLOCKS: [usize; 5] = [1, 2, 3, 4, 5];
pub const DEFAULT_EE_EVERY: usize = 10;

/// Separations `0.05, 0.10, ..., 6.00`.
pub fn default_delta_grid() -> Vec<f64> {
    (1..=120).map(|k| (k * 5) as f64 / 100.0).collect()
}

/// Parse `odd3`, `adj2` or an explicit `4-6-9` list into a subsystem on an `n_sites` chain.
pub fn parse_subsystem(token: &str, n_sites: usize) -> Result<SubsystemSpec> {
    let token = token.trim();
    let count = |rest: &str| {
        rest.parse::<usize>()
            .map_err(|_| Error::Subsystem(format!("cannot parse subsystem size in '{token}'")))
    };
    let spec = if let Some(rest) = token.strip_prefix("odd") {
        SubsystemSpec::odd_separated(n_sites, count(rest)?)?
    } else if let Some(rest) = token.strip_prefix("adj") {
        SubsystemSpec::adjacent(n_sites, count(rest)?)?
    } else {
        let sites = token
            .split('-')
            .map(|s| s.parse::<usize>().map_err(|_| Error::Subsystem(format!("bad site list '{token}'"))))
            .collect::<Result<Vec<_>>>()?;
        SubsystemSpec::new(sites, SubsystemPattern::Custom)?
    };
    spec.check_range(n_sites)?;
    Ok(spec)
}

/// A contiguous block and a single probe spin; the probe is the transposed party.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativityProbe {
    pub block: Vec<usize>,
    pub probe: usize,
}

impl NegativityProbe {
    /// Block `N/2 .. N/2 + k - 1` with the probe on the next site to the right.
    pub fn adjacent_block(n_sites: usize, k: usize) -> Self {
        let start = n_sites / 2;
        Self { block: (start..start + k).collect(), probe: start + k }
    }

    pub fn label(&self) -> String {
        let contiguous = self.block.windows(2).all(|w| w[1] == w[0] + 1);
        if contiguous && self.block.last().map(|&b| b + 1) == Some(self.probe) {
            format!("k{}", self.block.len())
        } else {
            let parts: Vec<String> = self.block.iter().map(|s| s.to_string()).collect();
            format!("b{}_p{}", parts.join("-"), self.probe)
        }
    }

    /// Joint subsystem, with the probe as the last (least significant) spin.
    pub fn joint(&self) -> Result<SubsystemSpec> {
        if self.block.is_empty() || self.block.iter().any(|&b| b >= self.probe) {
            return Err(Error::Subsystem(format!(
                "probe {} must lie to the right of block {:?}",
                self.probe, self.block
            )));
        }
        let mut sites = self.block.clone();
        sites.push(self.probe);
        SubsystemSpec::custom(sites)
    }

    pub fn dims(&self) -> (usize, usize) {
        (1 << self.block.len(), 2)
    }
}

/// Everything needed to reproduce one quench and its analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: ModelSpec,
    pub cfg: EvolutionConfig,
    pub subsystems: Vec<SubsystemSpec>,
    /// Separations for the degree curves.
    pub delta_grid: Vec<f64>,
    /// Separations whose full distance time series are written out.
    pub series_deltas: Vec<f64>,
    pub negativity: Vec<NegativityProbe>,
    /// Half-chain entropy stride in snapshots; 0 disables it.
    pub ee_every: usize,
    pub deep_quantile: f64,
    /// Half-width (time units) of the window setting the deep-extremum threshold.
    #[serde(default = "default_deep_window")]
    pub deep_window: f64,
    #[serde(default)]
    pub software_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<String>,
}

impl RunManifest {
    /// Default catalogue: odd-separated l = 1..4, adjacent pair, blocks k = 1..5
    /// against a probe spin, separations 0.05..6.00.
    pub fn with_defaults(spec: ModelSpec, cfg: EvolutionConfig) -> Result<Self> {
        Self::from_tokens(spec, cfg, &DEFAULT_SUBSYSTEMS, &DEFAULT_NEGATIVITY_BLOCKS)
    }

    pub fn from_tokens<S: AsRef<str>>(
        spec: ModelSpec,
        cfg: EvolutionConfig,
        subsystems: &[S],
        negativity_blocks: &[usize],
    ) -> Result<Self> {
        let n = spec.n_sites;
        let subsystems = subsystems.iter().map(|t| parse_subsystem(t.as_ref(), n)).collect::<Result<Vec<_>>>()?;
        let negativity = negativity_blocks.iter().map(|&k| NegativityProbe::adjacent_block(n, k)).collect();
        Ok(Self {
            spec,
            cfg,
            subsystems,
            delta_grid: default_delta_grid(),
            series_deltas: DEFAULT_SERIES_DELTAS.to_vec(),
            negativity,
            ee_every: DEFAULT_EE_EVERY,
            deep_quantile: DEFAULT_DEEP_QUANTILE,
            deep_window: DEFAULT_DEEP_WINDOW,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: None,
            checksum: None,
        })
    }

    /// All problems with the manifest, empty when it is runnable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.spec.validate() {
            out.push(e.to_string());
        }
        out.extend(self.cfg.problems());
        if !out.is_empty() {
            return out;
        }
        let n = self.spec.n_sites;
        let snapshots = self.cfg.n_snapshots();
        let spacing = self.cfg.snapshot_spacing();

        let mut labels = std::collections::HashSet::new();
        for sub in &self.subsystems {
            if let Err(e) = sub.check_range(n) {
                out.push(e.to_string());
            }
            if !labels.insert(sub.label()) {
                out.push(format!("duplicate subsystem label {}", sub.label()));
            }
        }
        for &d in &self.delta_grid {
            // a degree needs at least two distance samples
            match grid_shift(d, spacing, snapshots.saturating_sub(1)) {
                Ok(_) => {}
                Err(e) => out.push(format!("delta_grid entry {d}: {e}")),
            }
        }
        for &d in &self.series_deltas {
            if let Err(e) = grid_shift(d, spacing, snapshots) {
                out.push(format!("series_deltas entry {d}: {e}"));
            }
        }
        for probe in &self.negativity {
            match probe.joint() {
                Ok(joint) => {
                    if let Err(e) = joint.check_range(n) {
                        out.push(format!("negativity {}: {e}", probe.label()));
                    }
                    if joint.len() > MAX_SUBSYSTEM_SITES {
                        out.push(format!("negativity {}: too many sites", probe.label()));
                    }
                }
                Err(e) => out.push(format!("negativity: {e}")),
            }
        }
        if self.ee_every > 0 && n < 2 {
            out.push("half-chain entropy needs at least 2 sites".into());
        }
        if !(self.deep_quantile > 0.0 && self.deep_quantile < 1.0) {
            out.push(format!("deep_quantile must lie in (0, 1), got {}", self.deep_quantile));
        }
        if !(self.deep_window > 0.0) {
            out.push(format!("deep_window must be positive, got {}", self.deep_window));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidManifest(problems))
        }
    }

    /// Copy without the fields that differ between otherwise identical runs.
    pub fn reproducible_part(&self) -> Self {
        Self { wall_clock_seconds: None, checksum: None, ..self.clone() }
    }

    /// Snapshot times on which half-chain entropy is recorded.
    pub fn ee_times(&self) -> Vec<f64> {
        if self.ee_every == 0 {
            return Vec::new();
        }
        (0..self.cfg.n_snapshots()).step_by(self.ee_every).map(|k| self.cfg.snapshot_time(k)).collect()
    }
}
