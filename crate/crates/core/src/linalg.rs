//! Small dense linear-algebra helpers shared by the estimators and diagnostics.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Default residual tolerance for [`top_eigvec`].
pub const EIG_TOL: f64 = 1e-10;
/// Default iteration cap handed to the QR sweeps.
pub const EIG_MAX_ITER: usize = 10_000;

/// Leading eigenpair of a symmetric matrix.
///
/// "Leading" means the algebraically largest eigenvalue, not the largest in
/// magnitude. The eigenvector is unit-norm with its largest-magnitude entry
/// made positive (lowest index wins a tie). The residual `‖Av − λv‖₂` must be
/// at most `tol · max(1, ‖A‖₂)`.
pub fn top_eigvec(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<(f64, DVector<f64>)> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::invalid(format!(
            "top_eigvec needs a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("top_eigvec tolerance must be positive"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if n == 1 {
        return Ok((a[(0, 0)], DVector::from_element(1, 1.0)));
    }

    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, max_iter).ok_or(
        Error::NoConvergence {
            max_iter,
            residual: f64::NAN,
        },
    )?;
    let top = argmax(eig.eigenvalues.as_slice());
    let lambda = eig.eigenvalues[top];
    let mut v: DVector<f64> = eig.eigenvectors.column(top).into_owned();
    let norm = v.norm();
    if !(norm > 0.0) {
        return Err(Error::NoConvergence {
            max_iter,
            residual: f64::NAN,
        });
    }
    v /= norm;
    fix_sign(v.as_mut_slice());

    let scale = eig
        .eigenvalues
        .iter()
        .fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let residual = (a * &v - &v * lambda).norm();
    if !(residual <= tol * scale) {
        return Err(Error::NoConvergence { max_iter, residual });
    }
    Ok((lambda, v))
}

/// Spectral norm of a symmetric matrix, i.e. its largest absolute eigenvalue.
pub fn sym_spectral_norm(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let values = SymmetricEigen::try_new(a.clone(), f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::NoConvergence {
            max_iter: EIG_MAX_ITER,
            residual: f64::NAN,
        })?
        .eigenvalues;
    Ok(values.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())))
}

/// Makes the entry of largest absolute value positive. Ties go to the lowest index.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// `A[idx, idx]`, in the order given by `idx`.
pub fn principal_submatrix(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

/// Indices of the `k` largest scores, returned in ascending index order.
///
/// Ties are resolved in favour of the lower index.
pub fn top_k_indices(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| rank_desc(scores[i], scores[j]).then(i.cmp(&j)));
    let mut chosen: Vec<usize> = order.into_iter().take(k).collect();
    chosen.sort_unstable();
    chosen
}

/// First index holding the maximum value.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if x.total_cmp(&xs[best]) == Ordering::Greater {
            best = i;
        }
    }
    best
}

fn rank_desc(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}

/// Scatters `values` (indexed like `idx`) into a zero vector of length `n`.
pub fn zero_pad(values: &DVector<f64>, idx: &[usize], n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n);
    for (value, &i) in values.iter().zip(idx) {
        out[i] = *value;
    }
    out
}
