//! Second-order structure of the network model.
//!
//! The functional fBm over the finite ground set `E = {1..J}` has covariance
//!
//! ```text
//! phi(f, g) = sigma^2 / 2 * ( |f|^{2H} + |g|^{2H} - |f - g|^{2H} ),
//! |f|^{2H}  = sum_u |f(u)|^{2H} mu(u)
//! ```
//!
//! Link `l` at time `t` is `B(t f_l)` with `f_l(u) = r(u)^{1/H} 1{u in A_l}`,
//! which yields a separable space-time covariance: shared routes times the
//! fBm temporal kernel.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{min_eigenvalue, toeplitz};
use crate::scalar::Real;
use crate::topology::RoutingMatrix;

pub use crate::linalg::{kron, kron_solve};

/// Functional fBm on a finite ground set with weights `mu(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FfbmSpec<T: Real> {
    pub weights: Vec<T>,
    pub hurst: T,
    pub sigma: T,
}

impl<T: Real> FfbmSpec<T> {
    pub fn new(weights: Vec<T>, hurst: T, sigma: T) -> Result<Self> {
        if !(hurst > T::zero() && hurst <= T::one()) {
            return Err(invalid("hurst", format!("{hurst} not in (0, 1]")));
        }
        if !(sigma > T::zero()) {
            return Err(invalid("sigma", format!("{sigma} must be positive")));
        }
        if weights.iter().any(|&w| !(w >= T::zero())) {
            return Err(invalid("weights", "measure weights must be nonnegative"));
        }
        Ok(FfbmSpec {
            weights,
            hurst,
            sigma,
        })
    }

    /// Counting measure on `{1..size}`.
    pub fn counting(size: usize, hurst: T, sigma: T) -> Result<Self> {
        Self::new(vec![T::one(); size], hurst, sigma)
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    /// `|f|_{2H}^{2H}`.
    pub fn norm_pow(&self, f: &[T]) -> T {
        assert_eq!(f.len(), self.weights.len(), "function length must equal |E|");
        let p = self.hurst + self.hurst;
        f.iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&v, &w)| acc + v.abs().powf(p) * w)
    }

    fn norm_pow_diff(&self, f: &[T], g: &[T]) -> T {
        assert_eq!(f.len(), g.len());
        let p = self.hurst + self.hurst;
        f.iter()
            .zip(g)
            .zip(&self.weights)
            .fold(T::zero(), |acc, ((&a, &b), &w)| acc + (a - b).abs().powf(p) * w)
    }
}

/// `phi_{2H}(f, g)`.
pub fn phi<T: Real>(spec: &FfbmSpec<T>, f: &[T], g: &[T]) -> T {
    let half_var = spec.sigma * spec.sigma * T::lit(0.5);
    half_var * (spec.norm_pow(f) + spec.norm_pow(g) - spec.norm_pow_diff(f, g))
}

/// `Var(B(f + g) - B(f) - B(g)) = sigma^2 (2|f| + 2|g| - |f - g| - |f + g|)`,
/// all norms raised to `2H`. Vanishes iff `f g = 0` a.e. when `H != 1`.
pub fn additivity_defect<T: Real>(spec: &FfbmSpec<T>, f: &[T], g: &[T]) -> T {
    let sum: Vec<T> = f.iter().zip(g).map(|(&a, &b)| a + b).collect();
    let two = T::lit(2.0);
    spec.sigma
        * spec.sigma
        * (two * spec.norm_pow(f) + two * spec.norm_pow(g)
            - spec.norm_pow_diff(f, g)
            - spec.norm_pow(&sum))
}

/// `f_l(u) = r(u)^{1/H} 1{u in A_l}`; `r = None` means `r ≡ 1`.
pub fn link_function<T: Real>(
    routing: &RoutingMatrix,
    link: usize,
    hurst: T,
    r_weights: Option<&[T]>,
) -> Vec<T> {
    let mut f = vec![T::zero(); routing.num_routes()];
    for &j in routing.route_set(link) {
        f[j] = match r_weights {
            Some(r) => r[j].powf(T::one() / hurst),
            None => T::one(),
        };
    }
    f
}

/// `E B(t f_{l1}) B(s f_{l2})` evaluated through `phi`. Links are 0-based.
pub fn space_time_cov<T: Real>(
    routing: &RoutingMatrix,
    spec: &FfbmSpec<T>,
    l1: usize,
    l2: usize,
    t: T,
    s: T,
    r_weights: Option<&[T]>,
) -> T {
    let f1: Vec<T> = link_function(routing, l1, spec.hurst, r_weights)
        .into_iter()
        .map(|v| v * t)
        .collect();
    let f2: Vec<T> = link_function(routing, l2, spec.hurst, r_weights)
        .into_iter()
        .map(|v| v * s)
        .collect();
    phi(spec, &f1, &f2)
}

/// Closed form for `r ≡ 1`: `mu(A_{l1} ∩ A_{l2}) * sigma^2/2 (|t|^{2H} + |s|^{2H} - |t-s|^{2H})`.
pub fn space_time_cov_shared<T: Real>(
    routing: &RoutingMatrix,
    spec: &FfbmSpec<T>,
    l1: usize,
    l2: usize,
    t: T,
    s: T,
) -> T {
    let shared = routing
        .route_set(l1)
        .iter()
        .filter(|j| routing.route_set(l2).binary_search(j).is_ok())
        .fold(T::zero(), |acc, &j| acc + spec.weights[j]);
    shared * fbm_cov(spec.hurst, spec.sigma, t, s)
}

/// fBm covariance `sigma^2/2 (|t|^{2H} + |s|^{2H} - |t - s|^{2H})`.
pub fn fbm_cov<T: Real>(hurst: T, sigma: T, t: T, s: T) -> T {
    let p = hurst + hurst;
    sigma * sigma * T::lit(0.5) * (t.abs().powf(p) + s.abs().powf(p) - (t - s).abs().powf(p))
}

/// fGn autocovariance `gamma_X(k) = sigma^2/2 (|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H})`.
pub fn gamma_fgn<T: Real>(hurst: T, sigma: T, k: usize) -> T {
    let p = hurst + hurst;
    let kf = T::from_count(k);
    let one = T::one();
    sigma
        * sigma
        * T::lit(0.5)
        * ((kf + one).powf(p) + (kf - one).abs().powf(p) - T::lit(2.0) * kf.powf(p))
}

/// Temporal structure of the fGn increments: `Gamma_{m+1}` and `gamma_{m+1}(h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalCov<T> {
    pub hurst: T,
    pub sigma: T,
    /// Number of past lags; the window has `m + 1` samples.
    pub m: usize,
}

impl<T: Real> TemporalCov<T> {
    pub fn new(hurst: T, sigma: T, m: usize) -> Result<Self> {
        if !(hurst > T::zero() && hurst < T::one()) {
            return Err(invalid("hurst", format!("{hurst} not in (0, 1)")));
        }
        if !(sigma > T::zero()) {
            return Err(invalid("sigma", "must be positive"));
        }
        Ok(TemporalCov { hurst, sigma, m })
    }

    pub fn gamma(&self, k: usize) -> T {
        gamma_fgn(self.hurst, self.sigma, k)
    }

    /// First column of `Gamma_{m+1}`.
    pub fn gamma_column(&self) -> Vec<T> {
        (0..=self.m).map(|k| self.gamma(k)).collect()
    }

    /// `Gamma_{m+1} = (gamma_X(|i-j|))_{0<=i,j<=m}`.
    pub fn gamma_matrix(&self) -> DMatrix<T> {
        toeplitz(&self.gamma_column())
    }

    /// `gamma_{m+1}(h) = (gamma_X(h + j))_{0<=j<=m}`.
    pub fn gamma_vec(&self, h: usize) -> DVector<T> {
        DVector::from_fn(self.m + 1, |j, _| self.gamma(h + j))
    }
}

/// Route covariance `Sigma_X` (diagonal) and link covariance `Sigma_Y = A Sigma_X Aᵗ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialCov<T: Real> {
    pub sigma_x: DVector<T>,
    pub sigma_y: DMatrix<T>,
}

/// `Sigma_Y[l1][l2] = sum over shared routes of Sigma_X[j]`, symmetric by construction.
pub fn build_sigma_y<T: Real>(routing: &RoutingMatrix, sigma_x: &DVector<T>) -> Result<SpatialCov<T>> {
    if sigma_x.len() != routing.num_routes() {
        return Err(Error::DimensionMismatch {
            expected: routing.num_routes(),
            got: sigma_x.len(),
        });
    }
    if sigma_x.iter().any(|&v| !(v >= T::zero())) {
        return Err(invalid("sigma_x", "route variances must be nonnegative"));
    }
    Ok(SpatialCov {
        sigma_x: sigma_x.clone(),
        sigma_y: cross_cov(routing, routing, sigma_x),
    })
}

/// `A_1 Sigma_X A_2ᵗ` for two row selections of the same routing matrix.
pub fn cross_cov<T: Real>(a1: &RoutingMatrix, a2: &RoutingMatrix, sigma_x: &DVector<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(a1.num_links(), a2.num_links());
    for i in 0..a1.num_links() {
        let s1 = a1.route_set(i);
        for k in 0..a2.num_links() {
            let s2 = a2.route_set(k);
            let (mut p, mut q) = (0, 0);
            let mut acc = T::zero();
            while p < s1.len() && q < s2.len() {
                match s1[p].cmp(&s2[q]) {
                    std::cmp::Ordering::Less => p += 1,
                    std::cmp::Ordering::Greater => q += 1,
                    std::cmp::Ordering::Equal => {
                        acc += sigma_x[s1[p]];
                        p += 1;
                        q += 1;
                    }
                }
            }
            out[(i, k)] = acc;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub is_psd: bool,
}

/// Assembles the Gram matrix `[phi(f_i, f_j)]` and reports its smallest
/// eigenvalue. Eigenvalues `>= -1e-9 * trace / n` count as nonnegative.
pub fn check_psd<T: Real>(spec: &FfbmSpec<T>, functions: &[Vec<T>]) -> Result<PsdReport> {
    if functions.len() < 2 {
        return Err(invalid("functions", "need at least two functions"));
    }
    let gram = gram_matrix(spec, functions);
    let n = functions.len();
    let tol = T::lit(1e-9) * gram.trace().abs() / T::from_count(n);
    let lmin = min_eigenvalue(&gram);
    Ok(PsdReport {
        min_eigenvalue: lmin.as_f64(),
        tolerance: tol.as_f64(),
        is_psd: lmin >= -tol,
    })
}

/// Covariance matrix `[phi(f_i, f_j)]` of `B(f_1), ..., B(f_n)`. Computed
/// without assuming `H <= 1`, so it can exhibit the failure for `H > 1`.
pub fn gram_matrix<T: Real>(spec: &FfbmSpec<T>, functions: &[Vec<T>]) -> DMatrix<T> {
    let n = functions.len();
    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = phi(spec, &functions[i], &functions[j]);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    gram
}

/// `phi` without the `H <= 1` guard, for diagnostics beyond the valid range.
pub fn phi_unchecked<T: Real>(hurst: T, sigma: T, weights: &[T], f: &[T], g: &[T]) -> T {
    let spec = FfbmSpec {
        weights: weights.to_vec(),
        hurst,
        sigma,
    };
    phi(&spec, f, g)
}

/// Kernel of `Lambda(f)` at `(x, u)`: `1{0 <= x <= f(u)}` for `f(u) >= 0`,
/// `-1{f(u) <= x < 0}` otherwise.
fn lsm_kernel<T: Real>(fu: T, x: T) -> T {
    if fu >= T::zero() {
        if x >= T::zero() && x < fu {
            T::one()
        } else {
            T::zero()
        }
    } else if x >= fu && x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Scale functional `|| sum_k theta_k Lambda(f_k) ||_alpha^alpha` of the
/// functional Lévy stable motion, i.e.
/// `sum_u mu(u) ∫ |sum_k theta_k k_{f_k}(x, u)|^alpha dx`.
///
/// The integrand is piecewise constant in `x` with breakpoints at `0` and the
/// values `f_k(u)`, so the integral is evaluated exactly interval by interval.
pub fn lsm_scale_alpha<T: Real>(alpha: T, weights: &[T], terms: &[(T, &[T])]) -> T {
    let mut total = T::zero();
    for (u, &w) in weights.iter().enumerate() {
        if w == T::zero() {
            continue;
        }
        let mut cuts: Vec<T> = Vec::with_capacity(terms.len() + 1);
        cuts.push(T::zero());
        cuts.extend(terms.iter().map(|(_, f)| f[u]));
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite function values"));
        cuts.dedup();
        for win in cuts.windows(2) {
            let (lo, hi) = (win[0], win[1]);
            let mid = (lo + hi) * T::lit(0.5);
            let height = terms
                .iter()
                .fold(T::zero(), |acc, &(theta, f)| acc + theta * lsm_kernel(f[u], mid));
            total += w * (hi - lo) * height.abs().powf(alpha);
        }
    }
    total
}
