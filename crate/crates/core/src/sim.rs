//! Synthetic traffic: heavy-tailed On/Off sources and direct synthesis of
//! the two limit models (fractional Gaussian noise and α-stable increments).
//!
//! Every generator takes an explicit `seed`; independent streams are derived
//! as `(seed, stream index)` so results do not depend on thread scheduling.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::covariance::gamma_fgn;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::topology::RoutingMatrix;
use crate::trace::{TraceKind, TraceSet};

/// Deterministic RNG for stream `stream` of a seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Pareto law `P(X > x) = (x_min / x)^alpha`, `x >= x_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pareto {
    pub alpha: f64,
    pub x_min: f64,
}

impl Pareto {
    pub fn mean(&self) -> f64 {
        self.alpha * self.x_min / (self.alpha - 1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = 1.0 - rng.random::<f64>();
        self.x_min * u.powf(-1.0 / self.alpha)
    }

    /// Draw from the residual-life (integrated tail) law with density
    /// `P(X > r) / E X`, i.e. the length of the interval in progress at a
    /// stationary time origin.
    ///
    /// `P(R > r) = 1 - r (alpha-1) / (alpha x_min)` for `r < x_min` and
    /// `(x_min / r)^{alpha-1} / alpha` beyond.
    pub fn sample_residual<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = 1.0 - rng.random::<f64>();
        let a = self.alpha;
        if u > 1.0 / a {
            (1.0 - u) * a * self.x_min / (a - 1.0)
        } else {
            self.x_min * (a * u).powf(-1.0 / (a - 1.0))
        }
    }
}

/// Parameters of the On/Off source population on one route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnOffParams {
    pub alpha_on: f64,
    pub alpha_off: f64,
    pub x_min_on: f64,
    pub x_min_off: f64,
    pub num_sources: usize,
    /// Bytes per unit time while On.
    pub rate: f64,
}

impl OnOffParams {
    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha_on", self.alpha_on), ("alpha_off", self.alpha_off)] {
            if !(a > 1.0 && a.is_finite()) {
                return Err(invalid(name, format!("{a} must exceed 1 (finite mean)")));
            }
        }
        if !(self.x_min_on > 0.0 && self.x_min_off > 0.0) {
            return Err(invalid("x_min", "Pareto scales must be positive"));
        }
        if !(self.rate > 0.0) {
            return Err(invalid("rate", "must be positive"));
        }
        if self.num_sources == 0 {
            return Err(invalid("num_sources", "need at least one source"));
        }
        Ok(())
    }

    /// Checks `1 < min(alpha_on, alpha_off) < 2`.
    pub fn validate_heavy_tailed(&self) -> Result<()> {
        self.validate()?;
        let a = self.tail_index();
        if !(a > 1.0 && a < 2.0) {
            return Err(invalid("alpha", format!("min tail exponent {a} not in (1, 2)")));
        }
        Ok(())
    }

    pub fn on(&self) -> Pareto {
        Pareto {
            alpha: self.alpha_on,
            x_min: self.x_min_on,
        }
    }

    pub fn off(&self) -> Pareto {
        Pareto {
            alpha: self.alpha_off,
            x_min: self.x_min_off,
        }
    }

    pub fn tail_index(&self) -> f64 {
        self.alpha_on.min(self.alpha_off)
    }

    /// `H = (3 - alpha) / 2`.
    pub fn hurst(&self) -> f64 {
        (3.0 - self.tail_index()) / 2.0
    }

    /// Long-run fraction of time spent On.
    pub fn on_fraction(&self) -> f64 {
        let (m_on, m_off) = (self.on().mean(), self.off().mean());
        m_on / (m_on + m_off)
    }
}

/// On periods of a single source over `[0, horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityTrace {
    pub horizon: f64,
    pub on_intervals: Vec<(f64, f64)>,
}

impl ActivityTrace {
    /// Activity `X(t)` (0 or 1) at time `t`.
    pub fn is_on(&self, t: f64) -> bool {
        let i = self.on_intervals.partition_point(|&(s, _)| s <= t);
        i > 0 && t < self.on_intervals[i - 1].1
    }

    pub fn active_fraction(&self) -> f64 {
        self.on_intervals.iter().map(|(a, b)| b - a).sum::<f64>() / self.horizon
    }

    /// On-time per bin of width `delta`, scaled by `rate`.
    pub fn binned(&self, delta: f64, rate: f64) -> Vec<f64> {
        let bins = (self.horizon / delta).floor() as usize;
        let mut acc = BinAccumulator::new(bins, delta);
        for &(a, b) in &self.on_intervals {
            acc.add(a, b);
        }
        acc.finish(rate)
    }
}

/// Integrates unit-rate intervals into fixed-width bins in O(1) per interval.
struct BinAccumulator {
    delta: f64,
    bins: Vec<f64>,
    // first differences for runs of fully covered bins
    full: Vec<f64>,
}

impl BinAccumulator {
    fn new(bins: usize, delta: f64) -> Self {
        BinAccumulator {
            delta,
            bins: vec![0.0; bins],
            full: vec![0.0; bins + 1],
        }
    }

    fn add(&mut self, a: f64, b: f64) {
        let n = self.bins.len();
        let end = n as f64 * self.delta;
        let (a, b) = (a.max(0.0), b.min(end));
        if b <= a {
            return;
        }
        let ka = ((a / self.delta) as usize).min(n - 1);
        let kb = (b / self.delta) as usize;
        if ka == kb || kb == ka + 1 && kb == n {
            self.bins[ka] += b - a;
            return;
        }
        self.bins[ka] += (ka + 1) as f64 * self.delta - a;
        if kb > ka + 1 {
            self.full[ka + 1] += 1.0;
            self.full[kb.min(n)] -= 1.0;
        }
        if kb < n {
            self.bins[kb] += b - kb as f64 * self.delta;
        }
    }

    fn finish(mut self, rate: f64) -> Vec<f64> {
        let mut run = 0.0;
        for (k, v) in self.bins.iter_mut().enumerate() {
            run += self.full[k];
            *v = (*v + run * self.delta) * rate;
        }
        self.bins
    }
}

fn onoff_intervals<R: Rng + ?Sized>(params: &OnOffParams, horizon: f64, rng: &mut R) -> Vec<(f64, f64)> {
    let (on, off) = (params.on(), params.off());
    let mut out = Vec::new();
    let mut state_on = rng.random::<f64>() < params.on_fraction();
    let mut t = if state_on {
        on.sample_residual(rng)
    } else {
        off.sample_residual(rng)
    };
    if state_on {
        out.push((0.0, t.min(horizon)));
    }
    while t < horizon {
        state_on = !state_on;
        let len = if state_on { on.sample(rng) } else { off.sample(rng) };
        if state_on {
            out.push((t, (t + len).min(horizon)));
        }
        t += len;
    }
    out
}

/// One stationary On/Off source over `[0, horizon)`, started from the
/// equilibrium regime. `params.num_sources` is ignored.
pub fn simulate_onoff_source(params: &OnOffParams, horizon: f64, seed: u64) -> Result<ActivityTrace> {
    params.validate()?;
    if !(horizon > 0.0) {
        return Err(invalid("horizon", "must be positive"));
    }
    let mut rng = stream_rng(seed, 0);
    Ok(ActivityTrace {
        horizon,
        on_intervals: onoff_intervals(params, horizon, &mut rng),
    })
}

const SOURCES_PER_CHUNK: usize = 16;

/// Bytes per bin on `route_count` independent routes, each carrying
/// `params.num_sources` independent On/Off sources.
pub fn simulate_aggregate_onoff<T: Real>(
    params: &OnOffParams,
    route_count: usize,
    horizon: f64,
    delta: f64,
    seed: u64,
) -> Result<TraceSet<T>> {
    params.validate()?;
    if !(delta > 0.0) {
        return Err(invalid("delta", "must be positive"));
    }
    if horizon < delta {
        return Err(invalid("horizon", format!("{horizon} shorter than delta {delta}")));
    }
    if route_count == 0 {
        return Err(invalid("route_count", "need at least one route"));
    }
    let bins = (horizon / delta).floor() as usize;
    let horizon = bins as f64 * delta;
    let m = params.num_sources;
    let mut series = DMatrix::zeros(route_count, bins);
    for route in 0..route_count {
        // fixed chunking keeps the summation order, hence the output, reproducible
        let chunks: Vec<Vec<f64>> = (0..m.div_ceil(SOURCES_PER_CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = BinAccumulator::new(bins, delta);
                for src in c * SOURCES_PER_CHUNK..((c + 1) * SOURCES_PER_CHUNK).min(m) {
                    let stream = ((route as u64) << 32) | src as u64;
                    let mut rng = stream_rng(seed, stream);
                    for (a, b) in onoff_intervals(params, horizon, &mut rng) {
                        acc.add(a, b);
                    }
                }
                acc.finish(params.rate)
            })
            .collect();
        for chunk in &chunks {
            for (k, v) in chunk.iter().enumerate() {
                series[(route, k)] += T::lit(*v);
            }
        }
    }
    TraceSet::new(
        delta,
        0.0,
        series,
        (1..=route_count).collect(),
        TraceKind::Route,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FgnMethod {
    /// Circulant embedding, `O(T log T)`.
    CirculantEmbedding,
    /// Durbin-Levinson recursion, `O(T^2)`.
    Hosking,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FgnSample<T> {
    pub values: Vec<T>,
    pub method: FgnMethod,
}

/// Exact zero-mean fGn of length `len` with autocovariance `gamma_X`.
///
/// Uses circulant embedding and falls back to the Durbin-Levinson recursion
/// if the embedding has materially negative eigenvalues.
pub fn synthesize_fgn<T: Real>(hurst: f64, sigma: f64, len: usize, seed: u64) -> Result<FgnSample<T>> {
    check_fgn_args(hurst, sigma, len)?;
    let mut rng = stream_rng(seed, 0);
    let values = match circulant_fgn(hurst, sigma, len, &mut rng) {
        Some(v) => FgnSample {
            values: v,
            method: FgnMethod::CirculantEmbedding,
        },
        None => FgnSample {
            values: hosking_fgn(hurst, sigma, len, &mut rng),
            method: FgnMethod::Hosking,
        },
    };
    Ok(FgnSample {
        values: values.values.into_iter().map(T::lit).collect(),
        method: values.method,
    })
}

/// fGn with an explicitly chosen method (no fallback).
pub fn synthesize_fgn_with<T: Real>(
    method: FgnMethod,
    hurst: f64,
    sigma: f64,
    len: usize,
    seed: u64,
) -> Result<Vec<T>> {
    check_fgn_args(hurst, sigma, len)?;
    let mut rng = stream_rng(seed, 0);
    let v = match method {
        FgnMethod::CirculantEmbedding => circulant_fgn(hurst, sigma, len, &mut rng)
            .ok_or_else(|| Error::Validation("circulant embedding is not nonnegative definite".into()))?,
        FgnMethod::Hosking => hosking_fgn(hurst, sigma, len, &mut rng),
    };
    Ok(v.into_iter().map(T::lit).collect())
}

fn check_fgn_args(hurst: f64, sigma: f64, len: usize) -> Result<()> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(invalid("hurst", format!("{hurst} not in (0, 1)")));
    }
    if !(sigma >= 0.0) {
        return Err(invalid("sigma", "must be nonnegative"));
    }
    if len == 0 {
        return Err(invalid("len", "need at least one sample"));
    }
    Ok(())
}

fn circulant_fgn<R: Rng + ?Sized>(hurst: f64, sigma: f64, len: usize, rng: &mut R) -> Option<Vec<f64>> {
    let n = len.next_power_of_two().max(2);
    let size = 2 * n;
    let mut c: Vec<Complex<f64>> = (0..size)
        .map(|k| {
            let lag = if k <= n { k } else { size - k };
            Complex::new(gamma_fgn(hurst, sigma, lag), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(size);
    fft.process(&mut c);
    let lmax = c.iter().fold(0.0f64, |a, z| a.max(z.re.abs()));
    if c.iter().any(|z| z.re < -1e-10 * lmax.max(f64::MIN_POSITIVE)) {
        return None;
    }
    let scale = 1.0 / size as f64;
    let mut w: Vec<Complex<f64>> = c
        .iter()
        .map(|lam| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            Complex::new(a, b) * (lam.re.max(0.0) * scale).sqrt()
        })
        .collect();
    fft.process(&mut w);
    // real and imaginary parts are independent copies; keep the real one
    Some(w[..len].iter().map(|z| z.re).collect())
}

fn hosking_fgn<R: Rng + ?Sized>(hurst: f64, sigma: f64, len: usize, rng: &mut R) -> Vec<f64> {
    let gamma: Vec<f64> = (0..len).map(|k| gamma_fgn(hurst, sigma, k)).collect();
    let mut out = Vec::with_capacity(len);
    let mut phi: Vec<f64> = Vec::with_capacity(len);
    let mut v = gamma[0];
    let z: f64 = rng.sample(StandardNormal);
    out.push(v.sqrt() * z);
    for n in 1..len {
        let num = gamma[n] - (1..n).map(|k| phi[k - 1] * gamma[n - k]).sum::<f64>();
        let pnn = if v > 0.0 { num / v } else { 0.0 };
        let prev = phi.clone();
        for k in 1..n {
            phi[k - 1] = prev[k - 1] - pnn * prev[n - k - 1];
        }
        phi.push(pnn);
        v *= 1.0 - pnn * pnn;
        let mean: f64 = (1..=n).map(|k| phi[k - 1] * out[n - k]).sum();
        let z: f64 = rng.sample(StandardNormal);
        out.push(mean + v.max(0.0).sqrt() * z);
    }
    out
}

/// Strictly α-stable law `S_alpha(scale, beta, 0)`, `alpha in (1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableDist {
    pub alpha: f64,
    pub scale: f64,
    pub beta: f64,
}

impl StableDist {
    pub fn new(alpha: f64, scale: f64, beta: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(invalid("alpha", format!("{alpha} not in (1, 2)")));
        }
        if !(scale >= 0.0) {
            return Err(invalid("scale", "must be nonnegative"));
        }
        if !(beta.abs() <= 1.0) {
            return Err(invalid("beta", "skewness must lie in [-1, 1]"));
        }
        Ok(StableDist { alpha, scale, beta })
    }

    /// Closed-form characteristic function
    /// `exp(-|s t|^alpha (1 - i beta sign(t) tan(pi alpha / 2)))`.
    pub fn characteristic_function(&self, t: f64) -> Complex<f64> {
        let mag = (self.scale * t).abs().powf(self.alpha);
        let skew = self.beta * t.signum() * (PI * self.alpha / 2.0).tan();
        (Complex::new(-mag, mag * skew)).exp()
    }
}

impl Distribution<f64> for StableDist {
    /// Chambers-Mallows-Stuck transform.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        let a = self.alpha;
        let v = PI * (rng.random::<f64>() - 0.5);
        let w: f64 = rng.sample(Exp1);
        let tan_term = self.beta * (PI * a / 2.0).tan();
        let b = tan_term.atan() / a;
        let s = (1.0 + tan_term * tan_term).powf(1.0 / (2.0 * a));
        let x = s * (a * (v + b)).sin() / v.cos().powf(1.0 / a)
            * ((v - a * (v + b)).cos() / w).powf((1.0 - a) / a);
        debug_assert!(v.abs() < FRAC_PI_2);
        self.scale * x
    }
}

/// A single draw from `S_alpha(scale, beta, 0)` seeded by `seed`.
pub fn sample_stable(alpha: f64, scale: f64, beta: f64, seed: u64) -> Result<f64> {
    let dist = StableDist::new(alpha, scale, beta)?;
    Ok(dist.sample(&mut stream_rng(seed, 0)))
}

/// Which limit model drives the route fluctuations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    FastGaussian { hurst: f64 },
    SlowStable { alpha: f64, beta: f64 },
}

impl Regime {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Regime::FastGaussian { hurst } if !(hurst > 0.5 && hurst < 1.0) => {
                Err(invalid("hurst", format!("{hurst} not in (1/2, 1)")))
            }
            Regime::SlowStable { alpha, .. } if !(alpha > 1.0 && alpha < 2.0) => {
                Err(invalid("alpha", format!("{alpha} not in (1, 2)")))
            }
            Regime::SlowStable { beta, .. } if !(beta.abs() <= 1.0) => {
                Err(invalid("beta", "skewness must lie in [-1, 1]"))
            }
            _ => Ok(()),
        }
    }

    /// Fast regime matching an On/Off tail index: `H = (3 - alpha) / 2`.
    pub fn fast_from_tail(alpha: f64) -> Self {
        Regime::FastGaussian {
            hurst: (3.0 - alpha) / 2.0,
        }
    }
}

/// Deterministic route means, constant or one column per bin.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanProfile<T: Real> {
    Constant(DVector<T>),
    /// `J x T` matrix.
    PerBin(DMatrix<T>),
}

impl<T: Real> MeanProfile<T> {
    pub fn at(&self, bin: usize) -> DVector<T> {
        match self {
            MeanProfile::Constant(v) => v.clone(),
            MeanProfile::PerBin(m) => m.column(bin).into_owned(),
        }
    }

    fn len(&self) -> usize {
        match self {
            MeanProfile::Constant(v) => v.len(),
            MeanProfile::PerBin(m) => m.nrows(),
        }
    }
}

/// Per-route traffic model: `X_j(t) = mu_j(t) + r_j * sigma_j * noise_j(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeModel<T: Real> {
    pub regime: Regime,
    pub weights: Vec<T>,
    pub mean: MeanProfile<T>,
    pub scale: Vec<T>,
}

impl<T: Real> RegimeModel<T> {
    pub fn validate(&self, num_routes: usize) -> Result<()> {
        self.regime.validate()?;
        for (name, len) in [
            ("weights", self.weights.len()),
            ("scale", self.scale.len()),
            ("mean", self.mean.len()),
        ] {
            if len != num_routes {
                return Err(invalid(name, format!("has {len} entries, expected {num_routes}")));
            }
        }
        if self.weights.iter().chain(&self.scale).any(|&v| !(v >= T::zero())) {
            return Err(invalid("weights", "weights and scales must be nonnegative"));
        }
        Ok(())
    }

    /// `Sigma_X` diagonal, `r_j^2 sigma_j^2`; meaningful in the fast regime.
    pub fn sigma_x_diag(&self) -> DVector<T> {
        DVector::from_iterator(
            self.weights.len(),
            self.weights
                .iter()
                .zip(&self.scale)
                .map(|(&r, &s)| r * r * s * s),
        )
    }

    pub fn hurst(&self) -> Option<f64> {
        match self.regime {
            Regime::FastGaussian { hurst } => Some(hurst),
            Regime::SlowStable { .. } => None,
        }
    }
}

/// Route and link traces of length `len` from the limit models; link traces
/// are `A` applied to the route traces. Bins have unit width.
pub fn synthesize_route_traffic<T: Real>(
    model: &RegimeModel<T>,
    routing: &RoutingMatrix,
    len: usize,
    seed: u64,
) -> Result<(TraceSet<T>, TraceSet<T>)> {
    let j = routing.num_routes();
    model.validate(j)?;
    if len == 0 {
        return Err(invalid("len", "need at least one bin"));
    }
    if let MeanProfile::PerBin(m) = &model.mean {
        if m.ncols() < len {
            return Err(invalid("mean", format!("profile has {} bins, need {len}", m.ncols())));
        }
    }
    let noise: Vec<Vec<f64>> = (0..j)
        .into_par_iter()
        .map(|route| -> Result<Vec<f64>> {
            let s = seed ^ 0x9E37_79B9_7F4A_7C15;
            match model.regime {
                Regime::FastGaussian { hurst } => {
                    let mut rng = stream_rng(s, route as u64);
                    let sub_seed: u64 = rng.random();
                    Ok(synthesize_fgn::<f64>(hurst, 1.0, len, sub_seed)?.values)
                }
                Regime::SlowStable { alpha, beta } => {
                    let dist = StableDist::new(alpha, 1.0, beta)?;
                    let mut rng = stream_rng(s, route as u64);
                    Ok((0..len).map(|_| dist.sample(&mut rng)).collect())
                }
            }
        })
        .collect::<Result<_>>()?;

    let mut routes = DMatrix::zeros(j, len);
    for (r, series) in noise.iter().enumerate() {
        let amp = model.weights[r] * model.scale[r];
        for (t, &z) in series.iter().enumerate() {
            let mu = match &model.mean {
                MeanProfile::Constant(v) => v[r],
                MeanProfile::PerBin(m) => m[(r, t)],
            };
            routes[(r, t)] = mu + amp * T::lit(z);
        }
    }
    let links = routing.apply_series(&routes)?;
    let route_set = TraceSet::new(1.0, 0.0, routes, (1..=j).collect(), TraceKind::Route)?;
    let link_set = TraceSet::new(
        1.0,
        0.0,
        links,
        (1..=routing.num_links()).collect(),
        TraceKind::Link,
    )?;
    Ok((route_set, link_set))
}

/// Route and link traces whose bins are independent draws from the
/// one-bin marginal of `model` (the temporal dependence is dropped). Useful
/// for calibration checks that assume independent samples.
pub fn synthesize_independent_bins<T: Real>(
    model: &RegimeModel<T>,
    routing: &RoutingMatrix,
    len: usize,
    seed: u64,
) -> Result<(TraceSet<T>, TraceSet<T>)> {
    let j = routing.num_routes();
    model.validate(j)?;
    if len == 0 {
        return Err(invalid("len", "need at least one bin"));
    }
    let mut rng = stream_rng(seed, u64::MAX);
    let stable = match model.regime {
        Regime::SlowStable { alpha, beta } => Some(StableDist::new(alpha, 1.0, beta)?),
        Regime::FastGaussian { .. } => None,
    };
    let mut routes = DMatrix::zeros(j, len);
    for t in 0..len {
        let mu = model.mean.at(t);
        for r in 0..j {
            let z: f64 = match &stable {
                Some(d) => d.sample(&mut rng),
                None => rng.sample(StandardNormal),
            };
            routes[(r, t)] = mu[r] + model.weights[r] * model.scale[r] * T::lit(z);
        }
    }
    let links = routing.apply_series(&routes)?;
    Ok((
        TraceSet::new(1.0, 0.0, routes, (1..=j).collect(), TraceKind::Route)?,
        TraceSet::new(1.0, 0.0, links, (1..=routing.num_links()).collect(), TraceKind::Link)?,
    ))
}
