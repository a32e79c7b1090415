//! Network kriging and h-step spatio-temporal prediction.
//!
//! Links are split into observed (`o`) and unobserved (`u`) rows of the
//! routing matrix. With `Sigma_ab = A_a Sigma_X A_bᵗ` the instantaneous
//! predictor is
//!
//! ```text
//! Ŷ_u = A_u mu_X + C (Y_o - A_o mu_X),   C = Sigma_uo Sigma_oo^-1
//! mse = Sigma_uu - C Sigma_ou
//! ```
//!
//! and, because the space-time covariance is separable, it only needs the
//! observations at the present time. `Sigma_oo^-1` becomes the Moore-Penrose
//! inverse when observed links are linearly dependent.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::covariance::{cross_cov, gamma_fgn, TemporalCov};
use crate::error::{invalid, Error, Result};
use crate::linalg::{pseudo_inverse, spd_inverse, symmetrize, toeplitz_solve, SolveMethod};
use crate::scalar::Real;
use crate::sim::{stream_rng, StableDist};
use crate::topology::RoutingMatrix;

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Two-sided Gaussian quantile: `0.95 -> 1.959964`.
pub fn gaussian_quantile(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + confidence / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrigingModel<T: Real> {
    /// Observed link ids (1-based), in the order used by `Y_o`.
    pub observed: Vec<usize>,
    /// Unobserved link ids (1-based, ascending).
    pub unobserved: Vec<usize>,
    pub mu_x: DVector<T>,
    /// Diagonal of `Sigma_X`.
    pub sigma_x: DVector<T>,
    pub a_o: DMatrix<T>,
    pub a_u: DMatrix<T>,
    pub sigma_oo: DMatrix<T>,
    pub sigma_uo: DMatrix<T>,
    pub sigma_uu: DMatrix<T>,
    /// `Sigma_oo^-1`, or its pseudoinverse.
    pub sigma_oo_inv: DMatrix<T>,
    /// Gain `C`, `|u| x |o|`.
    pub gain: DMatrix<T>,
    pub mse_instant: DMatrix<T>,
    pub solve: SolveMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictionMethod {
    Instant,
    HStep { h: usize, m: usize },
    /// Least-squares coefficients applied to infinite-variance traffic.
    StableInstant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionResult<T: Real> {
    pub links: Vec<usize>,
    pub point: DVector<T>,
    /// `None` when the m.s.e. is undefined (stable regime).
    pub mse: Option<DMatrix<T>>,
    pub bounds: Option<Vec<(T, T)>>,
    pub confidence: f64,
    pub method: PredictionMethod,
}

impl<T: Real> PredictionResult<T> {
    fn gaussian(
        links: Vec<usize>,
        point: DVector<T>,
        mse: DMatrix<T>,
        confidence: f64,
        method: PredictionMethod,
    ) -> Self {
        let z = T::lit(gaussian_quantile(confidence));
        let bounds = (0..point.len())
            .map(|i| {
                let half = z * mse[(i, i)].max(T::zero()).sqrt();
                (point[i] - half, point[i] + half)
            })
            .collect();
        PredictionResult {
            links,
            point,
            mse: Some(mse),
            bounds: Some(bounds),
            confidence,
            method,
        }
    }

    /// Prediction standard deviations `sqrt(diag(mse))`.
    pub fn std(&self) -> Option<Vec<T>> {
        self.mse.as_ref().map(|m| {
            (0..m.nrows())
                .map(|i| m[(i, i)].max(T::zero()).sqrt())
                .collect()
        })
    }
}

/// Result of [`KrigingModel::predict_h_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct HStepPrediction<T: Real> {
    pub observed: PredictionResult<T>,
    pub unobserved: PredictionResult<T>,
    /// `c(h) = Gamma_{m+1}^-1 gamma_{m+1}(h)`; entry `j` weighs lag `j`.
    pub coefficients: Vec<T>,
    /// `sigma^2(h) = gamma_X(0) - gamma(h)ᵗ c(h)`.
    pub sigma2_h: T,
}

/// Fits the kriging model for the given observed link ids (1-based).
pub fn fit<T: Real>(
    routing: &RoutingMatrix,
    observed_link_ids: &[usize],
    mu_x: &DVector<T>,
    sigma_x: &DVector<T>,
) -> Result<KrigingModel<T>> {
    KrigingModel::fit(routing, observed_link_ids, mu_x, sigma_x)
}

impl<T: Real> KrigingModel<T> {
    pub fn fit(
        routing: &RoutingMatrix,
        observed_link_ids: &[usize],
        mu_x: &DVector<T>,
        sigma_x: &DVector<T>,
    ) -> Result<Self> {
        let l = routing.num_links();
        let j = routing.num_routes();
        if observed_link_ids.is_empty() {
            return Err(invalid("observed", "observed link set is empty"));
        }
        for &id in observed_link_ids {
            if id == 0 || id > l {
                return Err(Error::UnknownLink(id));
            }
        }
        for (name, v) in [("mu_x", mu_x), ("sigma_x", sigma_x)] {
            if v.len() != j {
                return Err(Error::DimensionMismatch {
                    expected: j,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(invalid(name, "entries must be finite"));
            }
        }
        if sigma_x.iter().any(|&v| v < T::zero()) {
            return Err(invalid("sigma_x", "route variances must be nonnegative"));
        }
        let unobserved: Vec<usize> = (1..=l)
            .filter(|id| !observed_link_ids.contains(id))
            .collect();
        let o_idx: Vec<usize> = observed_link_ids.iter().map(|i| i - 1).collect();
        let u_idx: Vec<usize> = unobserved.iter().map(|i| i - 1).collect();
        let ro = routing.select_links(&o_idx);
        let ru = routing.select_links(&u_idx);

        let sigma_oo = cross_cov(&ro, &ro, sigma_x);
        if sigma_oo.iter().all(|&v| v == T::zero()) {
            return Err(Error::Singular("kriging: observed covariance is identically zero"));
        }
        let sigma_uo = cross_cov(&ru, &ro, sigma_x);
        let sigma_uu = cross_cov(&ru, &ru, sigma_x);
        let (sigma_oo_inv, solve) = spd_inverse(&sigma_oo)?;
        let gain = &sigma_uo * &sigma_oo_inv;
        let mse_instant = symmetrize(&(&sigma_uu - &gain * sigma_uo.transpose()));
        Ok(KrigingModel {
            observed: observed_link_ids.to_vec(),
            unobserved,
            mu_x: mu_x.clone(),
            sigma_x: sigma_x.clone(),
            a_o: ro.to_dense(),
            a_u: ru.to_dense(),
            sigma_oo,
            sigma_uo,
            sigma_uu,
            sigma_oo_inv,
            gain,
            mse_instant,
            solve,
        })
    }

    pub fn mu_o(&self) -> DVector<T> {
        &self.a_o * &self.mu_x
    }

    pub fn mu_u(&self) -> DVector<T> {
        &self.a_u * &self.mu_x
    }

    /// Row of `target` among the unobserved links.
    pub fn unobserved_position(&self, target: usize) -> Option<usize> {
        self.unobserved.iter().position(|&id| id == target)
    }

    fn check_observed_len(&self, len: usize) -> Result<()> {
        if len != self.observed.len() {
            return Err(Error::DimensionMismatch {
                expected: self.observed.len(),
                got: len,
            });
        }
        Ok(())
    }

    /// Standard kriging predictor with 95% bounds.
    pub fn predict_instant(&self, y_o: &DVector<T>) -> Result<PredictionResult<T>> {
        self.predict_instant_with(y_o, None, DEFAULT_CONFIDENCE)
    }

    /// Standard kriging predictor; `mu_x` overrides the model mean for this
    /// bin (time-varying means are subtracted and added back).
    pub fn predict_instant_with(
        &self,
        y_o: &DVector<T>,
        mu_x: Option<&DVector<T>>,
        confidence: f64,
    ) -> Result<PredictionResult<T>> {
        self.check_observed_len(y_o.len())?;
        let point = self.point_instant(y_o, mu_x)?;
        Ok(PredictionResult::gaussian(
            self.unobserved.clone(),
            point,
            self.mse_instant.clone(),
            confidence,
            PredictionMethod::Instant,
        ))
    }

    fn point_instant(&self, y_o: &DVector<T>, mu_x: Option<&DVector<T>>) -> Result<DVector<T>> {
        let mu_x = mu_x.unwrap_or(&self.mu_x);
        if mu_x.len() != self.mu_x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mu_x.len(),
                got: mu_x.len(),
            });
        }
        let mu_o = &self.a_o * mu_x;
        let mu_u = &self.a_u * mu_x;
        Ok(mu_u + &self.gain * (y_o - mu_o))
    }

    /// Same linear predictor for infinite-variance (stable) traffic; no
    /// m.s.e. or Gaussian bounds are attached.
    pub fn predict_stable(&self, y_o: &DVector<T>) -> Result<PredictionResult<T>> {
        self.check_observed_len(y_o.len())?;
        Ok(PredictionResult {
            links: self.unobserved.clone(),
            point: self.point_instant(y_o, None)?,
            mse: None,
            bounds: None,
            confidence: DEFAULT_CONFIDENCE,
            method: PredictionMethod::StableInstant,
        })
    }

    /// h-step prediction of both observed and unobserved links.
    ///
    /// `history` is `|o| x (m+1)` with columns in time order
    /// `t0 - m, ..., t0`.
    pub fn predict_h_step(
        &self,
        temporal: &TemporalCov<T>,
        history: &DMatrix<T>,
        h: usize,
    ) -> Result<HStepPrediction<T>> {
        if h < 1 {
            return Err(invalid("h", "horizon must be at least 1"));
        }
        let m = temporal.m;
        self.check_observed_len(history.nrows())?;
        if history.ncols() != m + 1 {
            return Err(Error::DimensionMismatch {
                expected: m + 1,
                got: history.ncols(),
            });
        }
        let coefficients = h_step_coefficients(temporal, h)?;
        let gvec = temporal.gamma_vec(h);
        let sigma2_h = temporal.gamma(0)
            - gvec
                .iter()
                .zip(&coefficients)
                .fold(T::zero(), |acc, (&g, &c)| acc + g * c);

        let mu_o = self.mu_o();
        let mu_u = self.mu_u();
        let mut centered = DVector::zeros(self.observed.len());
        for (lag, &c) in coefficients.iter().enumerate() {
            centered += (history.column(m - lag) - &mu_o) * c;
        }
        let point_o = &mu_o + &centered;
        let point_u = mu_u + &self.gain * &centered;
        let mse_o = &self.sigma_oo * sigma2_h;
        let mse_u = symmetrize(
            &(&self.gain * &self.sigma_oo * self.gain.transpose() * sigma2_h
                + &self.mse_instant * temporal.gamma(0)),
        );
        let method = PredictionMethod::HStep { h, m };
        Ok(HStepPrediction {
            observed: PredictionResult::gaussian(
                self.observed.clone(),
                point_o,
                mse_o,
                DEFAULT_CONFIDENCE,
                method,
            ),
            unobserved: PredictionResult::gaussian(
                self.unobserved.clone(),
                point_u,
                mse_u,
                DEFAULT_CONFIDENCE,
                method,
            ),
            coefficients,
            sigma2_h,
        })
    }

    /// m.s.e. of an arbitrary unbiased linear predictor
    /// `mu_u + W (Y_o - mu_o)`: `(A_u - W A_o) Sigma_X (A_u - W A_o)ᵗ`.
    pub fn linear_predictor_mse(&self, w: &DMatrix<T>) -> Result<DMatrix<T>> {
        if w.shape() != self.gain.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.gain.len(),
                got: w.len(),
            });
        }
        let resid = &self.a_u - w * &self.a_o;
        let scaled = DMatrix::from_fn(resid.nrows(), resid.ncols(), |i, j| {
            resid[(i, j)] * self.sigma_x[j]
        });
        Ok(symmetrize(&(scaled * resid.transpose())))
    }

    /// Empirical two-sided error quantiles of the linear predictor under
    /// i.i.d. α-stable route increments (scales `sigma_x_scale`), one
    /// `(lower, upper)` per unobserved link.
    pub fn stable_error_quantiles(
        &self,
        alpha: f64,
        beta: f64,
        route_scale: &[T],
        replications: usize,
        confidence: f64,
        seed: u64,
    ) -> Result<Vec<(T, T)>> {
        if route_scale.len() != self.mu_x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mu_x.len(),
                got: route_scale.len(),
            });
        }
        if replications < 2 {
            return Err(invalid("replications", "need at least two"));
        }
        let dist = StableDist::new(alpha, 1.0, beta)?;
        let mut rng = stream_rng(seed, 0);
        let resid = &self.a_u - &self.gain * &self.a_o;
        let mut errs: Vec<Vec<f64>> = vec![Vec::with_capacity(replications); self.unobserved.len()];
        for _ in 0..replications {
            let x = DVector::from_fn(route_scale.len(), |j, _| {
                route_scale[j] * T::lit(dist.sample(&mut rng))
            });
            let e = &resid * x;
            for (k, v) in e.iter().enumerate() {
                errs[k].push(v.as_f64());
            }
        }
        let lo_p = (1.0 - confidence) / 2.0;
        Ok(errs
            .into_iter()
            .map(|mut v| {
                v.sort_by(|a, b| a.total_cmp(b));
                let q = |p: f64| v[((p * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
                (T::lit(q(lo_p)), T::lit(q(1.0 - lo_p)))
            })
            .collect())
    }
}

/// `c(h) = Gamma_{m+1}^-1 gamma_{m+1}(h)` via the Levinson recursion.
pub fn h_step_coefficients<T: Real>(temporal: &TemporalCov<T>, h: usize) -> Result<Vec<T>> {
    let col = temporal.gamma_column();
    let rhs: Vec<T> = temporal.gamma_vec(h).iter().copied().collect();
    toeplitz_solve(&col, &rhs)
}

/// Empirical relative m.s.e. `sum (Ŷ - Y)^2 / sum Y^2`.
pub fn evaluate_rmse<T: Real>(predicted: &[T], actual: &[T]) -> Result<T> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    let den = actual.iter().fold(T::zero(), |a, &y| a + y * y);
    if den == T::zero() {
        return Err(Error::ZeroDenominator);
    }
    let num = predicted
        .iter()
        .zip(actual)
        .fold(T::zero(), |a, (&p, &y)| a + (p - y) * (p - y));
    Ok(num / den)
}

/// Settings for [`verify_space_time_optimality`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityCheck {
    pub trials: usize,
    pub seed: u64,
    /// Adds `eps * gamma_{H=0.95}(|i-k|)` to each observed link's own
    /// covariance, which breaks the product form. Diagnostic only.
    pub non_separable: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub trials: usize,
    /// Largest `|beta|` on observations before `t0`.
    pub max_past_coefficient: f64,
    /// Largest deviation of present-time coefficients from the gain row.
    pub max_present_deviation: f64,
    pub threshold: f64,
    /// True when the past carries weight, i.e. present-only kriging is not optimal.
    pub violated: bool,
}

/// Computes the best linear unbiased predictor of an unobserved link at
/// `t0` from all observed links at `t0, t0-1, ..., t0-m` using the dense
/// space-time covariance `gamma(|t-s|) Sigma_Y(x, y)`, and checks that only
/// the present-time observations receive weight.
pub fn verify_space_time_optimality<T: Real>(
    model: &KrigingModel<T>,
    temporal: &TemporalCov<T>,
    check: &OptimalityCheck,
) -> Result<OptimalityReport> {
    let threshold = 1e-8;
    let d = model.observed.len();
    let m = temporal.m;
    let mut report = OptimalityReport {
        trials: check.trials,
        max_past_coefficient: 0.0,
        max_present_deviation: 0.0,
        threshold,
        violated: false,
    };
    if model.unobserved.is_empty() {
        return Ok(report);
    }
    let mut rng = stream_rng(check.seed, 0);
    for trial in 0..check.trials.max(1) {
        let hurst = if trial == 0 {
            temporal.hurst
        } else {
            T::lit(rng.random_range(0.55..0.98))
        };
        let target = rng.random_range(0..model.unobserved.len());
        let gamma = |k: usize| gamma_fgn(hurst, T::one(), k);
        let n = d * (m + 1);
        let mut sigma_dd = DMatrix::zeros(n, n);
        let mut sigma_dt = DVector::zeros(n);
        for i in 0..=m {
            for k in 0..=m {
                let g = gamma(i.abs_diff(k));
                for a in 0..d {
                    for b in 0..d {
                        sigma_dd[(i * d + a, k * d + b)] = g * model.sigma_oo[(a, b)];
                    }
                    if let Some(eps) = check.non_separable {
                        sigma_dd[(i * d + a, k * d + a)] +=
                            T::lit(eps) * gamma_fgn(T::lit(0.95), T::one(), i.abs_diff(k));
                    }
                }
            }
            for a in 0..d {
                sigma_dt[i * d + a] = gamma(i) * model.sigma_uo[(target, a)];
            }
        }
        let beta = match sigma_dd.clone().cholesky() {
            Some(ch) => ch.solve(&sigma_dt),
            None => pseudo_inverse(&sigma_dd).0 * sigma_dt,
        };
        for a in 0..d {
            let dev = (beta[a] - model.gain[(target, a)]).abs().as_f64();
            report.max_present_deviation = report.max_present_deviation.max(dev);
        }
        for v in beta.iter().skip(d) {
            report.max_past_coefficient = report.max_past_coefficient.max(v.abs().as_f64());
        }
    }
    report.violated = report.max_past_coefficient >= threshold;
    Ok(report)
}

/// Serialized form of a fitted model; matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrigingModelFile {
    pub schema_version: u32,
    pub observed: Vec<usize>,
    pub unobserved: Vec<usize>,
    pub mu_x: Vec<f64>,
    pub sigma_x: Vec<f64>,
    pub a_o: Matrix,
    pub a_u: Matrix,
    pub sigma_oo: Matrix,
    pub sigma_uo: Matrix,
    pub sigma_uu: Matrix,
    pub sigma_oo_inv: Matrix,
    pub gain: Matrix,
    pub mse_instant: Matrix,
    pub solve: SolveMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn from_dmatrix<T: Real>(m: &DMatrix<T>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)].as_f64());
            }
        }
        Matrix {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_dmatrix<T: Real>(&self) -> Result<DMatrix<T>> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: self.data.len(),
            });
        }
        Ok(DMatrix::from_fn(self.rows, self.cols, |i, j| {
            T::lit(self.data[i * self.cols + j])
        }))
    }
}

pub const MODEL_SCHEMA_VERSION: u32 = 1;

impl<T: Real> KrigingModel<T> {
    pub fn to_file(&self) -> KrigingModelFile {
        KrigingModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            observed: self.observed.clone(),
            unobserved: self.unobserved.clone(),
            mu_x: self.mu_x.iter().map(|v| v.as_f64()).collect(),
            sigma_x: self.sigma_x.iter().map(|v| v.as_f64()).collect(),
            a_o: Matrix::from_dmatrix(&self.a_o),
            a_u: Matrix::from_dmatrix(&self.a_u),
            sigma_oo: Matrix::from_dmatrix(&self.sigma_oo),
            sigma_uo: Matrix::from_dmatrix(&self.sigma_uo),
            sigma_uu: Matrix::from_dmatrix(&self.sigma_uu),
            sigma_oo_inv: Matrix::from_dmatrix(&self.sigma_oo_inv),
            gain: Matrix::from_dmatrix(&self.gain),
            mse_instant: Matrix::from_dmatrix(&self.mse_instant),
            solve: self.solve,
        }
    }

    pub fn from_file(file: &KrigingModelFile) -> Result<Self> {
        if file.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported model schema version {}",
                file.schema_version
            )));
        }
        Ok(KrigingModel {
            observed: file.observed.clone(),
            unobserved: file.unobserved.clone(),
            mu_x: DVector::from_iterator(file.mu_x.len(), file.mu_x.iter().map(|&v| T::lit(v))),
            sigma_x: DVector::from_iterator(
                file.sigma_x.len(),
                file.sigma_x.iter().map(|&v| T::lit(v)),
            ),
            a_o: file.a_o.to_dmatrix()?,
            a_u: file.a_u.to_dmatrix()?,
            sigma_oo: file.sigma_oo.to_dmatrix()?,
            sigma_uo: file.sigma_uo.to_dmatrix()?,
            sigma_uu: file.sigma_uu.to_dmatrix()?,
            sigma_oo_inv: file.sigma_oo_inv.to_dmatrix()?,
            gain: file.gain.to_dmatrix()?,
            mse_instant: file.mse_instant.to_dmatrix()?,
            solve: file.solve,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn chain() -> RoutingMatrix {
        RoutingMatrix::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap()
    }

    fn chain_model() -> KrigingModel<f64> {
        let mu = DVector::from_vec(vec![10.0, 20.0]);
        let sx = DVector::from_vec(vec![4.0, 9.0]);
        fit(&chain(), &[1, 2], &mu, &sx).unwrap()
    }

    #[test]
    fn chain_exact_combination() {
        let m = chain_model();
        assert_eq!(m.unobserved, vec![3]);
        assert_abs_diff_eq!(m.gain, DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), epsilon = 1e-12);
        assert!(m.mse_instant.amax() < 1e-10);
        let p = m.predict_instant(&DVector::from_vec(vec![13.0, 18.0])).unwrap();
        assert_abs_diff_eq!(p.point[0], 30.0 + 3.0 - 2.0, epsilon = 1e-12);
        let (lo, hi) = p.bounds.unwrap()[0];
        assert!((hi - lo).abs() < 1e-4);
    }

    #[test]
    fn chain_in_f32() {
        let mu = DVector::from_vec(vec![10.0f32, 20.0]);
        let sx = DVector::from_vec(vec![4.0f32, 9.0]);
        let m = fit(&chain(), &[1, 2], &mu, &sx).unwrap();
        assert!((m.gain[(0, 0)] - 1.0).abs() < 1e-5);
        assert!(m.mse_instant.amax() < 1e-4);
    }

    #[test]
    fn centered_input_returns_mean() {
        let m = chain_model();
        let p = m.predict_instant(&m.mu_o()).unwrap();
        assert_abs_diff_eq!(p.point, m.mu_u(), epsilon = 1e-12);
    }

    #[test]
    fn observe_everything() {
        let mu = DVector::from_vec(vec![1.0, 2.0]);
        let sx = DVector::from_vec(vec![1.0, 1.0]);
        let m = fit(&chain(), &[1, 2, 3], &mu, &sx).unwrap();
        assert!(m.unobserved.is_empty());
        assert_eq!(m.solve, SolveMethod::Pseudoinverse { rank: 2 });
        let p = m.predict_instant(&DVector::from_vec(vec![1.0, 2.0, 3.0])).unwrap();
        assert_eq!(p.point.len(), 0);
    }

    #[test]
    fn fit_errors() {
        let mu = DVector::from_vec(vec![1.0, 2.0]);
        let sx = DVector::from_vec(vec![1.0, 1.0]);
        assert!(fit(&chain(), &[], &mu, &sx).is_err());
        assert!(matches!(fit(&chain(), &[9], &mu, &sx), Err(Error::UnknownLink(9))));
        assert!(fit(&chain(), &[1], &mu, &DVector::zeros(2)).is_err());
        assert!(fit(&chain(), &[1], &mu, &DVector::zeros(3)).is_err());
        let m = chain_model();
        assert!(m.predict_instant(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn duplicate_observation_uses_pseudoinverse() {
        let mu = DVector::from_vec(vec![10.0, 20.0]);
        let sx = DVector::from_vec(vec![4.0, 9.0]);
        let dup = fit(&chain(), &[1, 1, 2], &mu, &sx).unwrap();
        assert!(matches!(dup.solve, SolveMethod::Pseudoinverse { rank: 2 }));
        let plain = chain_model();
        let y_dup = DVector::from_vec(vec![13.0, 13.0, 18.0]);
        let y = DVector::from_vec(vec![13.0, 18.0]);
        let a = dup.predict_instant(&y_dup).unwrap();
        let b = plain.predict_instant(&y).unwrap();
        assert_abs_diff_eq!(a.point, b.point, epsilon = 1e-9);
        assert_abs_diff_eq!(a.mse.unwrap(), b.mse.unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn white_noise_h_step_is_mean() {
        let m = chain_model();
        let temporal = TemporalCov::new(0.5, 1.0, 3).unwrap();
        let hist = DMatrix::from_fn(2, 4, |i, j| (i * 7 + j) as f64);
        let p = m.predict_h_step(&temporal, &hist, 2).unwrap();
        assert!(p.coefficients.iter().all(|c| c.abs() < 1e-14));
        assert_abs_diff_eq!(p.sigma2_h, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.observed.point, m.mu_o(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.unobserved.point, m.mu_u(), epsilon = 1e-12);
    }

    #[test]
    fn m_zero_coefficient_is_autocorrelation() {
        for &h in &[0.6, 0.75, 0.9] {
            let t = TemporalCov::new(h, 1.0, 0).unwrap();
            for step in 1..5 {
                let c = h_step_coefficients(&t, step).unwrap();
                assert_abs_diff_eq!(c[0], t.gamma(step) / t.gamma(0), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn h_step_errors() {
        let m = chain_model();
        let t = TemporalCov::new(0.8, 1.0, 2).unwrap();
        assert!(m.predict_h_step(&t, &DMatrix::zeros(2, 3), 0).is_err());
        assert!(m.predict_h_step(&t, &DMatrix::zeros(2, 2), 1).is_err());
        assert!(m.predict_h_step(&t, &DMatrix::zeros(3, 3), 1).is_err());
    }

    #[test]
    fn rmse_values() {
        assert_eq!(evaluate_rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(evaluate_rmse(&[0.0, 0.0], &[3.0, -1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(evaluate_rmse(&[1.0, 2.0], &[2.0, 2.0]).unwrap(), 0.125);
        assert!(matches!(evaluate_rmse(&[1.0], &[0.0]), Err(Error::ZeroDenominator)));
        assert!(evaluate_rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn optimality_on_chain() {
        let mu = DVector::from_vec(vec![1.0, 1.0]);
        let sx = DVector::from_vec(vec![1.0, 2.0]);
        let m = fit(&chain(), &[1, 2], &mu, &sx).unwrap();
        let t = TemporalCov::new(0.8, 1.0, 3).unwrap();
        let check = OptimalityCheck {
            trials: 5,
            seed: 1,
            non_separable: None,
        };
        let r = verify_space_time_optimality(&m, &t, &check).unwrap();
        assert!(!r.violated && r.max_past_coefficient < 1e-8, "{r:?}");
        assert!(r.max_present_deviation < 1e-8);

        let perturbed = OptimalityCheck {
            non_separable: Some(0.5),
            ..check
        };
        let r = verify_space_time_optimality(&m, &t, &perturbed).unwrap();
        assert!(r.violated, "{r:?}");

        let single = fit(&chain(), &[3], &mu, &sx).unwrap();
        let t0 = TemporalCov::new(0.8, 1.0, 0).unwrap();
        let r = verify_space_time_optimality(&single, &t0, &check).unwrap();
        assert_eq!(r.max_past_coefficient, 0.0);
        assert!(r.max_present_deviation < 1e-12);
    }

    #[test]
    fn model_json_round_trip() {
        let m = chain_model();
        let back = KrigingModel::<f64>::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn quantile_constant() {
        assert_abs_diff_eq!(gaussian_quantile(0.95), 1.959964, epsilon = 1e-6);
    }
}
