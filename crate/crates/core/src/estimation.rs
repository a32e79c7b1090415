//! Parameter estimation from traces: Haar wavelet log-scale diagram for the
//! Hurst exponent, per-route moments and cross-correlations.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::trace::{format_value, TraceSet};

/// Smallest coefficient count an octave needs to enter the fit.
pub const MIN_COEFFS: usize = 8;

/// Default first octave of the regression.
pub const DEFAULT_J1: usize = 3;

/// Haar log-scale diagram and the fitted line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletSpectrum<T> {
    pub octaves: Vec<usize>,
    /// `log2` of the mean squared detail coefficient per octave.
    pub log2_energy: Vec<T>,
    pub counts: Vec<usize>,
    pub fit_range: (usize, usize),
    pub slope: T,
    pub intercept: T,
    /// `(slope + 1) / 2` under the fGn convention.
    pub hurst: T,
    /// Asymptotic standard error of `hurst` for Gaussian input.
    pub hurst_std_err: T,
    /// Weighted coefficient of determination of the fit.
    pub r_squared: T,
}

impl<T: Real> WaveletSpectrum<T> {
    /// Writes `octave,log2_energy,count`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["octave", "log2_energy", "count"])?;
        for ((j, e), n) in self.octaves.iter().zip(&self.log2_energy).zip(&self.counts) {
            wtr.write_record([j.to_string(), format_value(*e), n.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Haar detail coefficients for octaves `1, 2, ...` (orthonormal pyramid).
pub fn haar_details<T: Real>(series: &[T]) -> Vec<Vec<T>> {
    let inv_sqrt2 = T::one() / T::lit(2.0).sqrt();
    let mut approx = series.to_vec();
    let mut out = Vec::new();
    while approx.len() >= 2 {
        let half = approx.len() / 2;
        let mut next = Vec::with_capacity(half);
        let mut detail = Vec::with_capacity(half);
        for k in 0..half {
            let (a, b) = (approx[2 * k], approx[2 * k + 1]);
            next.push((a + b) * inv_sqrt2);
            detail.push((a - b) * inv_sqrt2);
        }
        out.push(detail);
        approx = next;
    }
    out
}

/// Log-scale diagram of `series` with a weighted least-squares fit over
/// octaves `j1..=j2` (weights = coefficient counts). `j2 = None` picks the
/// coarsest octave with at least [`MIN_COEFFS`] coefficients.
///
/// For fGn input the detail energy scales as `2^{j(2H-1)}`, hence
/// `H = (slope + 1) / 2`.
pub fn wavelet_spectrum<T: Real>(series: &[T], j1: usize, j2: Option<usize>) -> Result<WaveletSpectrum<T>> {
    let n = series.len();
    let j1 = j1.max(1);
    let max_usable = (1..)
        .take_while(|&j| n >> j >= MIN_COEFFS)
        .last()
        .unwrap_or(0);
    let j2 = match j2 {
        Some(j2) => {
            let needed = 1usize << (j2 + 3);
            if n < needed {
                return Err(Error::SeriesTooShort { needed, got: n });
            }
            j2
        }
        None => max_usable,
    };
    if j2 <= j1 {
        if j2 == 0 {
            return Err(Error::SeriesTooShort {
                needed: 1 << (j1 + 4),
                got: n,
            });
        }
        return Err(Error::EmptyFitRange { j1, j2 });
    }

    let details = haar_details(series);
    let mut octaves = Vec::new();
    let mut log2_energy = Vec::new();
    let mut counts = Vec::new();
    for (i, d) in details.iter().enumerate() {
        let energy = d.iter().fold(T::zero(), |acc, &v| acc + v * v) / T::from_count(d.len());
        if energy <= T::zero() {
            return Err(invalid("series", "zero wavelet energy (constant series)"));
        }
        octaves.push(i + 1);
        log2_energy.push(energy.log2());
        counts.push(d.len());
    }

    let (mut sw, mut sx, mut sy) = (T::zero(), T::zero(), T::zero());
    for idx in j1 - 1..j2 {
        let w = T::from_count(counts[idx]);
        sw += w;
        sx += w * T::from_count(octaves[idx]);
        sy += w * log2_energy[idx];
    }
    let (xbar, ybar) = (sx / sw, sy / sw);
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for idx in j1 - 1..j2 {
        let w = T::from_count(counts[idx]);
        let dx = T::from_count(octaves[idx]) - xbar;
        let dy = log2_energy[idx] - ybar;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let r_squared = if syy > T::zero() {
        (sxy * sxy) / (sxx * syy)
    } else {
        T::one()
    };
    // Var(log2 mean energy_j) ~ 2 / (n_j ln^2 2)
    let ln2 = T::lit(std::f64::consts::LN_2);
    let slope_var = T::lit(2.0) / (ln2 * ln2 * sxx);
    let two = T::lit(2.0);
    Ok(WaveletSpectrum {
        octaves,
        log2_energy,
        counts,
        fit_range: (j1, j2),
        slope,
        intercept,
        hurst: (slope + T::one()) / two,
        hurst_std_err: slope_var.sqrt() / two,
        r_squared,
    })
}

/// Per-series moments, Hurst estimates and the cross-correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowStats<T> {
    pub ids: Vec<usize>,
    pub means: Vec<T>,
    pub variances: Vec<T>,
    pub spectra: Vec<Option<WaveletSpectrum<T>>>,
    /// Pearson correlations; `None` where a series is constant.
    pub correlation: Vec<Vec<Option<T>>>,
}

impl<T: Real> FlowStats<T> {
    pub fn hurst(&self, idx: usize) -> Option<T> {
        self.spectra[idx].as_ref().map(|s| s.hurst)
    }
}

/// Sample means, variances, Hurst exponents and Pearson correlations of
/// every series in `traces`.
pub fn flow_stats<T: Real>(traces: &TraceSet<T>, j1: usize, j2: Option<usize>) -> Result<FlowStats<T>> {
    let k = traces.num_series();
    let n = traces.num_bins();
    if n < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: n });
    }
    let nf = T::from_count(n);
    let rows: Vec<Vec<T>> = (0..k)
        .map(|r| traces.series.row(r).iter().copied().collect())
        .collect();
    let means: Vec<T> = rows
        .iter()
        .map(|r| r.iter().fold(T::zero(), |a, &v| a + v) / nf)
        .collect();
    let variances: Vec<T> = rows
        .iter()
        .zip(&means)
        .map(|(r, &m)| r.iter().fold(T::zero(), |a, &v| a + (v - m) * (v - m)) / (nf - T::one()))
        .collect();
    let spectra = rows
        .iter()
        .map(|r| wavelet_spectrum(r, j1, j2).ok())
        .collect();
    let mut correlation = vec![vec![None; k]; k];
    for a in 0..k {
        correlation[a][a] = Some(T::one());
        for b in a + 1..k {
            if variances[a] <= T::zero() || variances[b] <= T::zero() {
                continue;
            }
            let cov = rows[a]
                .iter()
                .zip(&rows[b])
                .fold(T::zero(), |acc, (&x, &y)| acc + (x - means[a]) * (y - means[b]))
                / (nf - T::one());
            let rho = (cov / (variances[a] * variances[b]).sqrt())
                .max(-T::one())
                .min(T::one());
            correlation[a][b] = Some(rho);
            correlation[b][a] = Some(rho);
        }
    }
    Ok(FlowStats {
        ids: traces.ids.clone(),
        means,
        variances,
        spectra,
        correlation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonHurst<T> {
    pub hurst: T,
    /// Ids of series whose estimate deviates by more than the tolerance.
    pub outliers: Vec<usize>,
}

/// Precision-weighted mean of the per-series Hurst estimates.
pub fn common_hurst<T: Real>(stats: &FlowStats<T>, tolerance: T) -> Result<CommonHurst<T>> {
    let (mut num, mut den) = (T::zero(), T::zero());
    for s in stats.spectra.iter().flatten() {
        let w = T::one() / (s.hurst_std_err * s.hurst_std_err);
        num += w * s.hurst;
        den += w;
    }
    if den == T::zero() {
        return Err(invalid("stats", "no series with a valid Hurst estimate"));
    }
    let h = num / den;
    let outliers = stats
        .ids
        .iter()
        .zip(&stats.spectra)
        .filter_map(|(&id, s)| match s {
            Some(s) if (s.hurst - h).abs() > tolerance => Some(id),
            _ => None,
        })
        .collect();
    Ok(CommonHurst { hurst: h, outliers })
}
