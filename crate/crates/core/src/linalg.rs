//! Thin bridge between `ndarray` storage and `faer` dense factorizations.

use faer::linalg::solvers::Solve;
use faer::Mat;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

fn to_faer(a: &Array2<C64>) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> Array2<C64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigenvalues and right eigenvectors (as columns) of a general complex matrix.
pub(crate) fn eigen(a: &Array2<C64>) -> Result<(Vec<C64>, Array2<C64>)> {
    let evd = to_faer(a)
        .eigen()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, from_faer(evd.U())))
}

/// `A^{-1}` through partially pivoted LU; `None` if the result is not finite.
pub(crate) fn inverse(a: &Array2<C64>) -> Option<Array2<C64>> {
    let n = a.nrows();
    let lu = to_faer(a).partial_piv_lu();
    let inv = lu.solve(Mat::<C64>::identity(n, n));
    let out = from_faer(inv.as_ref());
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Solves `A x = b`; `None` if the solution is not finite.
pub(crate) fn solve(a: &Array2<C64>, b: &Array1<C64>) -> Option<Array1<C64>> {
    let lu = to_faer(a).partial_piv_lu();
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = lu.solve(rhs);
    let out: Array1<C64> = (0..b.len()).map(|i| x[(i, 0)]).collect();
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Induced 1-norm (maximum absolute column sum).
pub(crate) fn norm_1(a: &Array2<C64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn mat_vec(a: &Array2<C64>, x: &[C64]) -> Vec<C64> {
    a.rows()
        .into_iter()
        .map(|r| r.iter().zip(x).map(|(m, v)| m * v).sum())
        .collect()
}
