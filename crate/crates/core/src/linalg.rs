//! Thin helpers over `ndarray-linalg` for the dense matrices used throughout.

use crate::{Error, Result, C64};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use ndarray_linalg::{Eigh, Inverse, Lapack, Scalar, UPLO};
use num_traits::ToPrimitive;

pub type RMat = Array2<f64>;
pub type CMat = Array2<C64>;
pub type RVec = Array1<f64>;
pub type CVec = Array1<C64>;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
pub fn eigh(a: &RMat) -> Result<(RVec, RMat)> {
    Ok(a.eigh(UPLO::Lower)?)
}

pub fn inverse<A: Scalar + Lapack>(a: &Array2<A>, what: &str) -> Result<Array2<A>> {
    a.inv().map_err(|_| Error::Singular(what.to_string()))
}

pub fn to_complex(a: &RMat) -> CMat {
    a.mapv(|x| C64::new(x, 0.0))
}

pub fn conj(a: &CMat) -> CMat {
    a.mapv(|z| z.conj())
}

pub fn frobenius<A: Scalar>(a: &Array2<A>) -> f64 {
    a.iter()
        .map(|x| {
            let m = x.abs().to_f64().unwrap_or(f64::NAN);
            m * m
        })
        .sum::<f64>()
        .sqrt()
}

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
pub fn sym_norm(a: &RMat) -> Result<f64> {
    let (w, _) = eigh(a)?;
    Ok(w.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
}

/// Maximum absolute column sum.
pub fn norm1<A: Scalar>(a: &Array2<A>) -> f64 {
    a.axis_iter(Axis(1))
        .map(|c| c.iter().map(|x| x.abs().to_f64().unwrap_or(f64::NAN)).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖A − Aᵀ‖_F / ‖A‖_F`; zero for the empty matrix.
pub fn symmetry_residual<A: Scalar>(a: ArrayView2<A>) -> f64 {
    let d = &a - &a.t();
    let n = frobenius(&a.to_owned());
    if n == 0.0 {
        0.0
    } else {
        frobenius(&d) / n
    }
}

/// `Q Qᵀ` for a matrix with orthonormal columns.
pub fn projector(q: &RMat) -> RMat {
    q.dot(&q.t())
}

pub fn identity(n: usize) -> RMat {
    Array2::eye(n)
}

/// Numerical rank from the singular values of a general matrix.
pub fn numerical_rank(a: &RMat, rel_tol: f64) -> Result<usize> {
    use ndarray_linalg::SVD;
    if a.is_empty() {
        return Ok(0);
    }
    let (_, s, _) = a.svd(false, false)?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    Ok(s.iter().filter(|&&x| x > rel_tol * smax).count())
}
