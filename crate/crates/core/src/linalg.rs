//! Structured linear algebra: Kronecker products, Kronecker-factored solves,
//! symmetric Toeplitz solves and symmetric (pseudo-)inverses.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == T::zero() {
                continue;
            }
            out.view_mut((i * br, j * bc), (br, bc))
                .zip_apply(b, |o, v| *o = aij * v);
        }
    }
    out
}

/// Solves `(gamma ⊗ sigma) x = rhs` using only the two factors.
///
/// Relies on `(Γ ⊗ Σ)^{-1} = Γ^{-1} ⊗ Σ^{-1}` and `(A ⊗ B) vec(X) = vec(B X Aᵗ)`,
/// so `rhs` is read as the column-major `dim(Σ) x dim(Γ)` matrix whose
/// column `i` is the block belonging to index `i` of `Γ`.
pub fn kron_solve<T: Real>(
    gamma: &DMatrix<T>,
    sigma: &DMatrix<T>,
    rhs: &DVector<T>,
) -> Result<DVector<T>> {
    let ng = gamma.nrows();
    let ns = sigma.nrows();
    if !gamma.is_square() || !sigma.is_square() {
        return Err(Error::Validation("kron_solve factors must be square".into()));
    }
    if rhs.len() != ng * ns {
        return Err(Error::DimensionMismatch {
            expected: ng * ns,
            got: rhs.len(),
        });
    }
    let r = DMatrix::from_column_slice(ns, ng, rhs.as_slice());
    let y = sigma
        .clone()
        .lu()
        .solve(&r)
        .ok_or(Error::Singular("kron_solve: sigma factor"))?;
    // X = Y Γ^{-T}  <=>  Γ Xᵗ = Yᵗ
    let xt = gamma
        .clone()
        .lu()
        .solve(&y.transpose())
        .ok_or(Error::Singular("kron_solve: gamma factor"))?;
    let x = xt.transpose();
    Ok(DVector::from_column_slice(x.as_slice()))
}

/// Solves the symmetric Toeplitz system `T x = b` where `first_col` is the
/// first column of `T`, by the Levinson recursion in `O(n^2)`.
///
/// Requires every leading principal minor to be nonsingular, which holds
/// for positive definite autocovariance matrices.
pub fn toeplitz_solve<T: Real>(first_col: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let n = first_col.len();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let t0 = first_col[0];
    if t0 <= T::zero() {
        return Err(Error::Singular("toeplitz_solve: nonpositive diagonal"));
    }
    let mut f = vec![T::one() / t0];
    let mut x = vec![rhs[0] / t0];
    let tiny = T::default_epsilon() * T::lit(16.0);
    for k in 1..n {
        let eps_f = (0..k).fold(T::zero(), |acc, i| acc + first_col[k - i] * f[i]);
        let denom = T::one() - eps_f * eps_f;
        if denom.abs() <= tiny {
            return Err(Error::Singular("toeplitz_solve: Levinson breakdown"));
        }
        let mut next = vec![T::zero(); k + 1];
        for i in 0..=k {
            let fwd = if i < k { f[i] } else { T::zero() };
            let bwd = if i > 0 { f[k - i] } else { T::zero() };
            next[i] = (fwd - eps_f * bwd) / denom;
        }
        f = next;
        let eps_x = (0..k).fold(T::zero(), |acc, i| acc + first_col[k - i] * x[i]);
        let scale = rhs[k] - eps_x;
        x.push(T::zero());
        for i in 0..=k {
            // backward vector is the reversed forward vector
            x[i] += scale * f[k - i];
        }
    }
    Ok(x)
}

/// Dense symmetric Toeplitz matrix from its first column.
pub fn toeplitz<T: Real>(first_col: &[T]) -> DMatrix<T> {
    let n = first_col.len();
    DMatrix::from_fn(n, n, |i, j| first_col[i.abs_diff(j)])
}

/// How a symmetric positive semi-definite system was inverted.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SolveMethod {
    /// Cholesky factorization of the matrix as given.
    Cholesky,
    /// Cholesky after adding `jitter` to the diagonal.
    JitteredCholesky { jitter: f64 },
    /// Moore-Penrose pseudoinverse; the matrix had numerical rank `rank`.
    Pseudoinverse { rank: usize },
}

/// Numerical rank threshold: singular values at or below
/// `n * sigma_max * 1e-12` count as zero.
pub fn rank_tolerance<T: Real>(n: usize, sigma_max: T) -> T {
    T::from_count(n.max(1)) * sigma_max * T::lit(1e-12)
}

/// Moore-Penrose pseudoinverse with the crate's rank rule. Returns the
/// inverse and the numerical rank.
pub fn pseudo_inverse<T: Real>(m: &DMatrix<T>) -> (DMatrix<T>, usize) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (DMatrix::zeros(c, r), 0);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = rank_tolerance(r.max(c), smax);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let pinv = svd
        .pseudo_inverse(tol)
        .expect("SVD computed with both singular vector sets");
    (pinv, rank)
}

/// Inverse of a symmetric PSD matrix: Cholesky when it has full numerical
/// rank (with a diagonal jitter retry), pseudoinverse otherwise.
pub fn spd_inverse<T: Real>(m: &DMatrix<T>) -> Result<(DMatrix<T>, SolveMethod)> {
    let n = m.nrows();
    if !m.is_square() {
        return Err(Error::Validation("spd_inverse expects a square matrix".into()));
    }
    if n == 0 {
        return Ok((DMatrix::zeros(0, 0), SolveMethod::Cholesky));
    }
    let eig = m.clone().symmetric_eigen();
    let smax = eig.eigenvalues.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    if smax == T::zero() {
        return Err(Error::Singular("spd_inverse: zero matrix"));
    }
    let tol = rank_tolerance(n, smax);
    let rank = eig.eigenvalues.iter().filter(|&&v| v > tol).count();
    if rank < n {
        let (pinv, rank) = pseudo_inverse(m);
        return Ok((symmetrize(&pinv), SolveMethod::Pseudoinverse { rank }));
    }
    if let Some(ch) = m.clone().cholesky() {
        return Ok((symmetrize(&ch.inverse()), SolveMethod::Cholesky));
    }
    let jitter = T::lit(1e-10) * m.trace() / T::from_count(n);
    let mut jittered = m.clone();
    for i in 0..n {
        jittered[(i, i)] += jitter;
    }
    let ch = jittered
        .cholesky()
        .ok_or(Error::Singular("spd_inverse: jittered Cholesky"))?;
    Ok((
        symmetrize(&ch.inverse()),
        SolveMethod::JitteredCholesky {
            jitter: jitter.as_f64(),
        },
    ))
}

pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue<T: Real>(m: &DMatrix<T>) -> T {
    let eig = symmetrize(m).symmetric_eigen();
    eig.eigenvalues
        .iter()
        .copied()
        .fold(T::max_value().unwrap(), |a, b| a.min(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kron_matches_nalgebra() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.3, -2.0, 4.0, 1.0]);
        assert_abs_diff_eq!(kron(&a, &b), a.kronecker(&b), epsilon = 1e-15);
    }

    #[test]
    fn kron_solve_identity_gamma_is_block_diagonal() {
        let g = DMatrix::<f64>::identity(3, 3);
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let rhs = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let x = kron_solve(&g, &s, &rhs).unwrap();
        let sinv = s.clone().try_inverse().unwrap();
        for blk in 0..3 {
            let b = DVector::from_column_slice(&rhs.as_slice()[2 * blk..2 * blk + 2]);
            let want = &sinv * b;
            assert_abs_diff_eq!(x[2 * blk], want[0], epsilon = 1e-13);
            assert_abs_diff_eq!(x[2 * blk + 1], want[1], epsilon = 1e-13);
        }
    }

    #[test]
    fn kron_solve_matches_dense_inverse() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]);
        let s = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 2.0]);
        let rhs = DVector::from_vec(vec![0.7, -1.2, 2.5, 0.1]);
        let dense = kron(&g, &s).try_inverse().unwrap() * &rhs;
        let fact = kron_solve(&g, &s, &rhs).unwrap();
        assert!((dense - fact).amax() < 1e-12);
        // (Γ⊗Σ)(Γ⁻¹⊗Σ⁻¹) = I
        let prod = kron(&g, &s)
            * kron(
                &g.clone().try_inverse().unwrap(),
                &s.clone().try_inverse().unwrap(),
            );
        assert!((prod - DMatrix::identity(4, 4)).amax() < 1e-10);
    }

    #[test]
    fn kron_solve_singular_factor() {
        let g = DMatrix::<f64>::identity(2, 2);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let rhs = DVector::from_element(4, 1.0);
        assert!(matches!(kron_solve(&g, &s, &rhs), Err(Error::Singular(_))));
    }

    #[test]
    fn toeplitz_solve_matches_dense() {
        let col = [2.0, 0.9, 0.4, 0.1, -0.05];
        let rhs = [1.0, -2.0, 0.5, 3.0, 0.0];
        let x = toeplitz_solve(&col, &rhs).unwrap();
        let dense = toeplitz(&col)
            .lu()
            .solve(&DVector::from_column_slice(&rhs))
            .unwrap();
        for i in 0..5 {
            assert_abs_diff_eq!(x[i], dense[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn pinv_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (p, rank) = pseudo_inverse(&m);
        assert_eq!(rank, 1);
        assert_abs_diff_eq!(p, DMatrix::from_element(2, 2, 0.25), epsilon = 1e-14);
        let (inv, method) = spd_inverse(&m).unwrap();
        assert_eq!(method, SolveMethod::Pseudoinverse { rank: 1 });
        assert_abs_diff_eq!(inv, p, epsilon = 1e-14);
    }

    #[test]
    fn spd_inverse_full_rank_uses_cholesky() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let (inv, method) = spd_inverse(&m).unwrap();
        assert_eq!(method, SolveMethod::Cholesky);
        assert_abs_diff_eq!(inv * m, DMatrix::identity(2, 2), epsilon = 1e-14);
        assert!(spd_inverse(&DMatrix::<f64>::zeros(2, 2)).is_err());
    }
}
