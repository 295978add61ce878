use nalgebra::{DMatrix, DVector};

use super::FactorPair;
use crate::error::{Error, Result};

/// Singular values `σ_i ≤ DEFAULT_TRUNC_TOL·σ₁` are dropped.
pub const DEFAULT_TRUNC_TOL: f64 = 1e-12;

/// Lowest-rank factorization of `U·Vᵀ`: QR of each factor, SVD of `R_U R_Vᵀ`,
/// keep `σ_i > trunc_tol·σ₁`. Returns `(Q_U Û, Q_V V̂ Σ)`, so the left factor
/// has orthonormal columns.
pub fn rank_reveal(u: &DMatrix<f64>, v: &DMatrix<f64>, trunc_tol: f64) -> Result<FactorPair> {
    rank_reveal_with_spectrum(u, v, trunc_tol).map(|(f, _)| f)
}

/// [`rank_reveal`] plus the full singular spectrum (descending, before
/// truncation).
pub fn rank_reveal_with_spectrum(
    u: &DMatrix<f64>,
    v: &DMatrix<f64>,
    trunc_tol: f64,
) -> Result<(FactorPair, Vec<f64>)> {
    if u.ncols() != v.ncols() {
        return Err(Error::DimensionMismatch {
            expected: u.ncols(),
            found: v.ncols(),
        });
    }
    if u.ncols() == 0 || u.nrows() == 0 || v.nrows() == 0 {
        return Err(Error::DegenerateProblem("rank reveal of an empty factor".into()));
    }
    let qu = u.clone().qr();
    let qv = v.clone().qr();
    let core = qu.r() * qv.r().transpose();
    let (cu, cv, sigma) = truncated_svd(core, trunc_tol)?;
    let left = qu.q() * cu;
    let right = qv.q() * cv;
    Ok((FactorPair { u: left, v: right }, sigma))
}

/// Truncated SVD of a dense iterate, in the same `(Û, V̂Σ)` convention.
pub(crate) fn factor_dense(x: &DMatrix<f64>, trunc_tol: f64) -> Result<(FactorPair, Vec<f64>)> {
    let (u, v, sigma) = truncated_svd(x.clone(), trunc_tol)?;
    Ok((FactorPair { u, v }, sigma))
}

/// `(Û_kept, V̂_kept·Σ_kept, σ descending)`.
fn truncated_svd(
    x: DMatrix<f64>,
    trunc_tol: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<f64>)> {
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NumericalFailure("rank reveal input is not finite".into()));
    }
    let svd = x.svd(true, true);
    let su = svd.u.ok_or_else(|| Error::NumericalFailure("SVD failed".into()))?;
    let svt = svd.v_t.ok_or_else(|| Error::NumericalFailure("SVD failed".into()))?;
    let s: &DVector<f64> = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let s1 = sigma.first().copied().unwrap_or(0.0);
    if s1.is_nan() || s1 <= 0.0 {
        return Err(Error::DegenerateProblem("all singular values are zero".into()));
    }
    let keep: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| s[i] > trunc_tol * s1)
        .collect();
    let left = DMatrix::from_fn(su.nrows(), keep.len(), |r, c| su[(r, keep[c])]);
    let right = DMatrix::from_fn(svt.ncols(), keep.len(), |r, c| svt[(keep[c], r)] * s[keep[c]]);
    Ok((left, right, sigma))
}
