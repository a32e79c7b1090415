//! Prediction-based diagnostics. A monitored link is predicted from other
//! monitored links; each bin gets a two-sided Gaussian p-value and runs of
//! small p-values are flagged.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kriging::KrigingModel;
use crate::scalar::Real;
use crate::trace::{format_f64, format_value, TraceSet};

pub const DEFAULT_MIN_RUN: usize = 3;

/// `2 (1 - Phi(|z|))`.
pub fn two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyRow<T> {
    pub timestamp: f64,
    pub actual: T,
    pub predicted: T,
    pub std: T,
    pub z: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlaggedWindow {
    pub start_bin: usize,
    /// Inclusive.
    pub end_bin: usize,
    pub start: f64,
    pub end: f64,
    pub min_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport<T> {
    pub target: usize,
    pub alpha: f64,
    pub min_run: usize,
    pub rows: Vec<AnomalyRow<T>>,
    pub windows: Vec<FlaggedWindow>,
}

impl<T: Real> AnomalyReport<T> {
    /// Writes `timestamp,actual,predicted,std,z,p`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["timestamp", "actual", "predicted", "std", "z", "p"])?;
        for r in &self.rows {
            wtr.write_record([
                format_f64(r.timestamp),
                format_value(r.actual),
                format_value(r.predicted),
                format_value(r.std),
                format_f64(r.z),
                format_f64(r.p),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn windows_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.windows)?)
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p).collect()
    }
}

/// Maximal runs of at least `min_run` consecutive entries below `alpha`,
/// as inclusive `(start, end)` index pairs.
pub fn low_runs(p: &[f64], alpha: f64, min_run: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &v) in p.iter().chain(std::iter::once(&f64::INFINITY)).enumerate() {
        match (v < alpha, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= min_run {
                    out.push((s, i - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    out
}

/// Predicts `target` from the model's observed links in every bin of
/// `traces` and scores the residuals.
///
/// The model must have `target` among its unobserved links; `traces` must
/// carry the target and all observed links.
pub fn diagnose<T: Real>(
    model: &KrigingModel<T>,
    traces: &TraceSet<T>,
    target: usize,
    alpha: f64,
    min_run: usize,
) -> Result<AnomalyReport<T>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("{alpha} must lie in (0, 1)")));
    }
    if min_run == 0 {
        return Err(invalid("min_run", "must be at least 1"));
    }
    if model.observed.contains(&target) {
        return Err(invalid("target", format!("link {target} is observed")));
    }
    let pos = model
        .unobserved_position(target)
        .ok_or(Error::UnknownLink(target))?;
    let y_o = traces.select(&model.observed)?;
    let actual = traces.row(target)?;
    let std = model.mse_instant[(pos, pos)].max(T::zero()).sqrt();

    let mu_o = model.mu_o();
    let mu_t = model.mu_u()[pos];
    let gain = model.gain.row(pos);
    let predicted: Vec<T> = (0..traces.num_bins())
        .map(|b| {
            let centered: DVector<T> = y_o.column(b) - &mu_o;
            mu_t + gain.dot(&centered.transpose())
        })
        .collect();

    if std == T::zero() || std.as_f64() <= 1e-12 * mu_t.abs().as_f64().max(1.0) {
        let max_residual = actual
            .iter()
            .zip(&predicted)
            .map(|(&a, &p)| (a - p).abs().as_f64())
            .fold(0.0, f64::max);
        return Err(Error::ExactPrediction {
            link: target,
            max_residual,
        });
    }

    let rows: Vec<AnomalyRow<T>> = actual
        .iter()
        .zip(&predicted)
        .enumerate()
        .map(|(b, (&a, &p))| {
            let z = ((a - p) / std).as_f64();
            AnomalyRow {
                timestamp: traces.timestamp(b),
                actual: a,
                predicted: p,
                std,
                z,
                p: two_sided_p(z),
            }
        })
        .collect();
    let p: Vec<f64> = rows.iter().map(|r| r.p).collect();
    let windows = low_runs(&p, alpha, min_run)
        .into_iter()
        .map(|(s, e)| FlaggedWindow {
            start_bin: s,
            end_bin: e,
            start: rows[s].timestamp,
            end: rows[e].timestamp,
            min_p: p[s..=e].iter().copied().fold(1.0, f64::min),
        })
        .collect();
    Ok(AnomalyReport {
        target,
        alpha,
        min_run,
        rows,
        windows,
    })
}

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0, 1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}
