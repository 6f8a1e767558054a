//! Scalar diagnostics of subsystem dynamics.
//!
//! The backflow degree of a distance series `D(t)` sampled every `tau` is the sum
//! of the strictly positive forward slopes `(D(t + tau) - D(t)) / tau`. It keeps
//! the `1/tau` factor, so degrees are only comparable between runs sharing the
//! same snapshot grid.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::linalg::hermitian_trace_norm;
use crate::rdm::{eigenvalues_desc, ReducedDensityMatrix};
use crate::C64;

pub const DEFAULT_DEEP_QUANTILE: f64 = 0.1;
/// Half-width (time units) of the neighbourhood that sets the deep-extremum threshold.
pub const DEFAULT_DEEP_WINDOW: f64 = 3.0;
const NORMALIZATION_TOL: f64 = 1e-10;
const GRID_TOL: f64 = 1e-6;

/// `0.5 * || rho - sigma ||_1` for Hermitian inputs.
pub fn trace_distance(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), got: sigma.nrows() });
    }
    Ok((0.5 * hermitian_trace_norm(&(rho - sigma))).min(1.0))
}

/// Total variation distance between two descending probability vectors.
pub fn tvd(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    for v in [p, q] {
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized(sum));
        }
        if v.windows(2).any(|w| w[1] > w[0] + NORMALIZATION_TOL) {
            return Err(Error::InvalidParameter("probabilities must be sorted in descending order".into()));
        }
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Reduced states of one subsystem on a uniform snapshot grid.
#[derive(Clone, Debug)]
pub struct RdmSeries {
    pub label: String,
    pub spacing: f64,
    pub rdms: Vec<ReducedDensityMatrix>,
}

impl RdmSeries {
    pub fn times(&self) -> Vec<f64> {
        self.rdms.iter().map(|r| r.t).collect()
    }

    /// Descending clamped spectra of every snapshot.
    pub fn spectra(&self) -> Result<SpectrumSeries> {
        let spectra = self.rdms.iter().map(|r| r.eigenvalues_desc()).collect::<Result<Vec<_>>>()?;
        Ok(SpectrumSeries { label: self.label.clone(), spacing: self.spacing, times: self.times(), spectra })
    }
}

/// Descending eigenvalue lists on a uniform snapshot grid.
#[derive(Clone, Debug)]
pub struct SpectrumSeries {
    pub label: String,
    pub spacing: f64,
    pub times: Vec<f64>,
    pub spectra: Vec<Vec<f64>>,
}

/// Distance between `delta`-separated states, `values[j] = d(state[j + k], state[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceSeries {
    pub label: String,
    pub delta: f64,
    pub spacing: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Number of grid steps making up `delta`.
pub fn grid_shift(delta: f64, spacing: f64, len: usize) -> Result<usize> {
    if delta < 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("separation must be >= 0, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(0);
    }
    let ratio = delta / spacing;
    let k = ratio.round();
    if !(spacing > 0.0) || (ratio - k).abs() > GRID_TOL * ratio.max(1.0) {
        return Err(Error::OffGrid { delta, spacing });
    }
    let k = k as usize;
    if k >= len {
        return Err(Error::SeparationTooLarge { delta, len, needed: 1 });
    }
    Ok(k)
}

pub fn distance_series(series: &RdmSeries, delta: f64) -> Result<DistanceSeries> {
    let k = grid_shift(delta, series.spacing, series.rdms.len())?;
    let n = series.rdms.len() - k;
    let values = (0..n)
        .map(|j| trace_distance(&series.rdms[j + k].mat, &series.rdms[j].mat))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceSeries {
        label: series.label.clone(),
        delta,
        spacing: series.spacing,
        times: series.rdms[..n].iter().map(|r| r.t).collect(),
        values,
    })
}

pub fn tvd_series(series: &SpectrumSeries, delta: f64) -> Result<DistanceSeries> {
    let k = grid_shift(delta, series.spacing, series.spectra.len())?;
    let n = series.spectra.len() - k;
    let values = (0..n)
        .map(|j| tvd(&series.spectra[j + k], &series.spectra[j]))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceSeries {
        label: series.label.clone(),
        delta,
        spacing: series.spacing,
        times: series.times[..n].to_vec(),
        values,
    })
}

fn check_spacing(series: &DistanceSeries, tau: f64) -> Result<()> {
    if (series.spacing - tau).abs() > 1e-12 * tau.abs().max(1.0) {
        return Err(Error::SpacingMismatch { tau, spacing: series.spacing });
    }
    if series.values.len() < 2 {
        return Err(Error::SeparationTooLarge { delta: series.delta, len: series.values.len(), needed: 2 });
    }
    Ok(())
}

/// Forward differences `(v[j + 1] - v[j]) / tau`.
pub fn forward_slopes(values: &[f64], tau: f64) -> Vec<f64> {
    values.windows(2).map(|w| (w[1] - w[0]) / tau).collect()
}

/// Sum of the strictly positive forward slopes.
pub fn positive_slope_sum(values: &[f64], tau: f64) -> f64 {
    forward_slopes(values, tau).into_iter().filter(|&a| a > 0.0).sum()
}

pub fn slope_alpha(series: &DistanceSeries, tau: f64) -> Result<Vec<f64>> {
    check_spacing(series, tau)?;
    Ok(forward_slopes(&series.values, tau))
}

pub fn degree(series: &DistanceSeries, tau: f64) -> Result<f64> {
    check_spacing(series, tau)?;
    Ok(positive_slope_sum(&series.values, tau))
}

/// Backflow degree as a function of the separation.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeCurve {
    pub label: String,
    pub deltas: Vec<f64>,
    pub degree: Vec<f64>,
}

impl DegreeCurve {
    /// `(delta, value)` of the smallest degree; ties go to the smaller separation.
    pub fn argmin(&self) -> (f64, f64) {
        self.deltas
            .iter()
            .zip(&self.degree)
            .fold((f64::NAN, f64::INFINITY), |best, (&d, &v)| if v < best.1 { (d, v) } else { best })
    }

    /// Like [`argmin`](Self::argmin) but restricted to separations after the
    /// first local maximum. Every degree vanishes as `delta -> 0`, so the plain
    /// minimum of a grid starting near zero only reports the initial rise.
    pub fn argmin_after_rise(&self) -> (f64, f64) {
        let start = (0..self.degree.len().saturating_sub(1))
            .find(|&j| self.degree[j] >= self.degree[j + 1])
            .unwrap_or(0);
        let tail = DegreeCurve {
            label: String::new(),
            deltas: self.deltas[start..].to_vec(),
            degree: self.degree[start..].to_vec(),
        };
        tail.argmin()
    }

    /// Interior local minima as `(delta, value)` pairs.
    pub fn local_minima(&self) -> Vec<(f64, f64)> {
        local_minima(&self.degree).into_iter().map(|j| (self.deltas[j], self.degree[j])).collect()
    }

    pub fn value_at(&self, delta: f64) -> Option<f64> {
        self.deltas.iter().position(|&d| (d - delta).abs() < 1e-9).map(|i| self.degree[i])
    }
}

/// Trace-distance degree on every separation of `deltas`.
pub fn degree_curve(series: &RdmSeries, deltas: &[f64], tau: f64) -> Result<DegreeCurve> {
    let degree = deltas
        .par_iter()
        .map(|&d| degree(&distance_series(series, d)?, tau))
        .collect::<Result<Vec<_>>>()?;
    Ok(DegreeCurve { label: series.label.clone(), deltas: deltas.to_vec(), degree })
}

/// Spectral (total variation) degree on every separation of `deltas`.
pub fn tvd_degree_curve(spectra: &SpectrumSeries, deltas: &[f64], tau: f64) -> Result<DegreeCurve> {
    let degree = deltas
        .par_iter()
        .map(|&d| degree(&tvd_series(spectra, d)?, tau))
        .collect::<Result<Vec<_>>>()?;
    Ok(DegreeCurve { label: spectra.label.clone(), deltas: deltas.to_vec(), degree })
}

pub fn tvd_degree(series: &RdmSeries, delta: f64, tau: f64) -> Result<f64> {
    degree(&tvd_series(&series.spectra()?, delta)?, tau)
}

/// `|<psi0|psi>|^2`
pub fn fidelity(psi0: &StateVector, psi: &StateVector) -> f64 {
    psi0.inner(psi).norm_sqr().min(1.0)
}

/// Return-probability series of a stored trajectory.
pub fn fidelity_series(states: &[StateVector]) -> Vec<f64> {
    match states.first() {
        Some(first) => states.iter().map(|s| fidelity(first, s)).collect(),
        None => Vec::new(),
    }
}

/// `-sum p ln p` with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> Result<f64> {
    Ok(shannon_entropy(&eigenvalues_desc(rho)?))
}

/// Transpose the second tensor factor of a `dim_a * dim_b` matrix.
pub fn partial_transpose(rho: &DMatrix<C64>, dim_a: usize, dim_b: usize) -> Result<DMatrix<C64>> {
    let n = dim_a * dim_b;
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho.nrows() });
    }
    Ok(DMatrix::from_fn(n, n, |r, c| {
        let (a, b) = (r / dim_b, r % dim_b);
        let (a2, b2) = (c / dim_b, c % dim_b);
        rho[(a * dim_b + b2, a2 * dim_b + b)]
    }))
}

/// Sum of the magnitudes of the negative eigenvalues of the partial transpose on B.
pub fn negativity(rho: &DMatrix<C64>, dim_a: usize, dim_b: usize) -> Result<f64> {
    let pt = partial_transpose(rho, dim_a, dim_b)?;
    let eig = crate::linalg::hermitian_eigenvalues(&pt);
    Ok(0.5 * eig.iter().map(|p| p.abs() - p).sum::<f64>())
}

/// Linearly interpolated `q`-quantile.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Interior local minima, `v[j - 1] > v[j] <= v[j + 1]`.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&j| values[j] < values[j - 1] && values[j] <= values[j + 1])
        .collect()
}

/// Spacing statistics of deep extrema.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremaPeriod {
    pub period: f64,
    pub spread: f64,
    pub times: Vec<f64>,
}

/// Rolling `q`-quantile over samples within `half_width` positions of each index.
fn rolling_quantile(values: &[f64], q: f64, half_width: usize) -> Vec<f64> {
    let n = values.len();
    let mut window: Vec<f64> = Vec::with_capacity(2 * half_width + 1);
    let insert = |w: &mut Vec<f64>, v: f64| {
        let at = w.partition_point(|x| x.total_cmp(&v).is_lt());
        w.insert(at, v);
    };
    for &v in &values[..half_width.min(n)] {
        insert(&mut window, v);
    }
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        if j + half_width < n {
            insert(&mut window, values[j + half_width]);
        }
        if j > half_width {
            let old = values[j - half_width - 1];
            let at = window.partition_point(|x| x.total_cmp(&old).is_lt());
            window.remove(at);
        }
        let pos = q.clamp(0.0, 1.0) * (window.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        out.push(window[lo] + (window[hi] - window[lo]) * (pos - lo as f64));
    }
    out
}

/// Mean spacing of the deep minima of a series.
///
/// A sample is deep when it lies at or below the `quantile_level` quantile of
/// the samples within `half_window` time units of it; the local threshold keeps
/// late minima of a decaying envelope. Every contiguous deep excursion
/// contributes its lowest sample. Excursions touching either end of the series
/// are ignored because their extremum cannot be confirmed.
pub fn find_minima_period(
    times: &[f64],
    values: &[f64],
    quantile_level: f64,
    half_window: f64,
) -> Result<ExtremaPeriod> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: values.len() });
    }
    if values.len() < 3 {
        return Err(Error::TooFewExtrema(0));
    }
    let spacing = times[1] - times[0];
    let half = if half_window.is_finite() { (half_window / spacing).round() as usize } else { values.len() };
    let threshold = rolling_quantile(values, quantile_level, half);
    let mut minima = Vec::new();
    let mut j = 0;
    while j < values.len() {
        if values[j] > threshold[j] {
            j += 1;
            continue;
        }
        let start = j;
        while j < values.len() && values[j] <= threshold[j] {
            j += 1;
        }
        let end = j;
        let best = (start..end).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
        if start > 0 && end < values.len() {
            minima.push(times[best]);
        }
    }
    if minima.len() < 2 {
        return Err(Error::TooFewExtrema(minima.len()));
    }
    let gaps: Vec<f64> = minima.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64;
    Ok(ExtremaPeriod { period: mean, spread: var.sqrt(), times: minima })
}

/// Mean spacing of deep maxima (deep minima of the negated series).
pub fn find_maxima_period(
    times: &[f64],
    values: &[f64],
    quantile_level: f64,
    half_window: f64,
) -> Result<ExtremaPeriod> {
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    find_minima_period(times, &negated, quantile_level, half_window)
}

/// Largest value inside consecutive windows of width `window` covering `[t_start, t_end)`.
pub fn windowed_maxima(times: &[f64], values: &[f64], t_start: f64, t_end: f64, window: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut lo = t_start;
    while lo + window <= t_end + 1e-9 {
        let hi = lo + window;
        let best = times
            .iter()
            .zip(values)
            .filter(|(&t, _)| t >= lo - 1e-9 && t < hi - 1e-9)
            .max_by(|a, b| a.1.total_cmp(b.1));
        if let Some((&t, &v)) = best {
            out.push((t, v));
        }
        lo = hi;
    }
    out
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn linear_fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
