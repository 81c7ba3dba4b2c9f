//! SVD-backed kernels shared by the solvers: rank detection, left
//! null-space bases, projection residuals and least squares.
//!
//! Rank decisions use a relative threshold: singular values below
//! `rel_eps * sigma_max` count as zero.

use nalgebra::{DMatrix, DVector};

/// Default relative singular-value threshold for rank decisions.
pub const DEFAULT_RANK_EPS: f64 = 1e-9;

/// Number of singular values above `rel_eps * max`.
fn count_rank(singular_values: &[f64], rel_eps: f64) -> usize {
    let max = singular_values.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    let tol = rel_eps * max;
    singular_values.iter().filter(|&&s| s > tol).count()
}

/// Numerical rank of `a`.
pub fn rank(a: &DMatrix<f64>, rel_eps: f64) -> usize {
    let svd = a.clone().svd(false, false);
    count_rank(svd.singular_values.as_slice(), rel_eps)
}

/// Distance from `b` to the column space of `a`: the norm of the
/// component of `b` orthogonal to every column, which equals `‖Nᵀb‖` for
/// any orthonormal left null-space basis `N`.
pub fn projection_residual(a: &DMatrix<f64>, b: &DVector<f64>, rel_eps: f64) -> f64 {
    let svd = a.clone().svd(true, false);
    let u = svd.u.as_ref().expect("u requested");
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = rel_eps * max;
    let mut residual = b.clone();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            let col = u.column(i);
            let coeff = col.dot(b);
            residual.axpy(-coeff, &col, 1.0);
        }
    }
    residual.norm()
}

/// Orthonormal basis of the left null space of `a` (all vectors `n` with
/// `nᵀa = 0`). Returns an `m × (m - rank)` matrix, possibly with zero
/// columns.
///
/// The basis is recovered from the projector `I - U_r U_rᵀ`, whose
/// singular values are exactly 1 on the complement and 0 on the range,
/// so the 0.5 cutoff is unambiguous.
pub fn left_null_space(a: &DMatrix<f64>, rel_eps: f64) -> DMatrix<f64> {
    let m = a.nrows();
    let svd = a.clone().svd(true, false);
    let u = svd.u.as_ref().expect("u requested");
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = rel_eps * max;

    let mut projector = DMatrix::<f64>::identity(m, m);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            let col = u.column(i).clone_owned();
            projector -= &col * col.transpose();
        }
    }

    let proj_svd = projector.svd(true, false);
    let pu = proj_svd.u.expect("u requested");
    let cols: Vec<usize> = proj_svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.5)
        .map(|(i, _)| i)
        .collect();
    let mut basis = DMatrix::<f64>::zeros(m, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        basis.set_column(j, &pu.column(i));
    }
    basis
}

/// Least-squares solution of `a x = b` together with the numerical rank
/// of `a`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_eps: f64) -> (DVector<f64>, usize) {
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = rel_eps * max;
    let r = svd
        .singular_values
        .iter()
        .filter(|&&s| s > tol)
        .count();
    let x = svd.solve(b, tol).expect("u/v requested");
    (x, r)
}
