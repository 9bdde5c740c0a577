//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative singular-value cutoff for numerical rank.
pub const RANK_TOL: f64 = 1e-10;
/// Relative eigenvalue floor for positive definiteness.
pub const PD_TOL: f64 = 1e-12;
/// Relative tolerance for the Hermitian check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Singular values, largest first.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `RANK_TOL · σ_max`.
pub fn numerical_rank(m: &CMatrix) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > RANK_TOL * top).count(),
        _ => 0,
    }
}

/// Squared Frobenius norm.
pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| a.total_cmp(b));
    e
}

/// Reject matrices that are not square and Hermitian within tolerance.
pub fn check_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::InvalidLaw(format!(
            "covariance must be square and nonempty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let gap = (m[(i, j)] - m[(j, i)].conj()).norm();
            if gap > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidLaw(format!("covariance is not Hermitian at ({i},{j})")));
            }
        }
    }
    Ok(())
}

/// Hermitian with minimum eigenvalue above `PD_TOL · max eigenvalue`.
pub fn check_positive_definite(m: &CMatrix) -> Result<()> {
    check_hermitian(m)?;
    let e = hermitian_eigenvalues(m);
    let (lo, hi) = (e[0], e[e.len() - 1]);
    if !(hi > 0.0) || !(lo > PD_TOL * hi) {
        return Err(Error::InvalidLaw(format!(
            "covariance is not positive definite (eigenvalues in [{lo:e}, {hi:e}])"
        )));
    }
    Ok(())
}

/// Cholesky factor of a PD Hermitian matrix.
pub fn cholesky(m: &CMatrix) -> Result<Cholesky<Complex64, Dyn>> {
    m.clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidLaw("covariance has no Cholesky factor".into()))
}

/// Natural log-determinant of a PD Hermitian matrix, via Cholesky.
pub fn hermitian_log_det(m: &CMatrix) -> Result<f64> {
    let chol = cholesky(m)?;
    Ok(log_det_from_cholesky(&chol))
}

pub(crate) fn log_det_from_cholesky(chol: &Cholesky<Complex64, Dyn>) -> f64 {
    let l = chol.l_dirty();
    2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>()
}

/// `T × M` matrix whose orthonormal columns span the row space of the
/// `M × T` input (as the column space of its adjoint). Requires full row rank.
pub fn row_space_basis(x: &CMatrix) -> Result<CMatrix> {
    let (m, t) = x.shape();
    if m == 0 || m > t {
        return Err(Error::Dimension(format!("row-space basis needs 1 <= M <= T, got {m}x{t}")));
    }
    let svd = x.adjoint().svd(true, false);
    let s = &svd.singular_values;
    let top = s.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) || s.iter().any(|&v| !(v > RANK_TOL * top)) {
        return Err(Error::InvalidParameter("input matrix is rank deficient".into()));
    }
    Ok(svd.u.expect("requested U").columns(0, m).into_owned())
}

/// `x` scaled down onto the ball `‖x‖_F² ≤ radius_sq` if it lies outside.
pub fn project_to_ball(mut x: CMatrix, radius_sq: f64) -> CMatrix {
    let e = frobenius_sq(&x);
    if e > radius_sq {
        x *= Complex64::from((radius_sq / e).sqrt());
    }
    x
}

/// Rank by Gaussian elimination with partial pivoting. Exact on small
/// integer-entry matrices; an independent check on [`numerical_rank`].
pub fn elimination_rank(m: &DMatrix<f64>) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let pivot = (rank..rows).max_by(|&i, &j| a[(i, c)].abs().total_cmp(&a[(j, c)].abs()));
        let Some(p) = pivot else { break };
        if a[(p, c)].abs() < 1e-9 {
            continue;
        }
        a.swap_rows(p, rank);
        for r in rank + 1..rows {
            let f = a[(r, c)] / a[(rank, c)];
            for k in c..cols {
                a[(r, k)] -= f * a[(rank, k)];
            }
        }
        rank += 1;
    }
    rank
}
