//! Dense linear-algebra helpers shared by the operator and POVM modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result, C64};

const EIGEN_EPS: f64 = 1e-14;
const EIGEN_MAX_ITER: usize = 10_000;

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |A - A†|` entrywise.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    assert!(m.is_square(), "hermiticity defect of a non-square matrix");
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> Result<(DVector<f64>, DMatrix<C64>)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
        Error::NumericalFailure(format!(
            "Hermitian eigensolver did not converge (n = {n}, max_iter = {EIGEN_MAX_ITER})"
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

pub fn min_eigenvalue(m: &DMatrix<C64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(f64::INFINITY);
    }
    let (values, _) = hermitian_eigen(m)?;
    Ok(values[0])
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Diagonal and first off-diagonal if `m` is a real symmetric tridiagonal
/// matrix (to `tol`).
pub fn as_real_tridiagonal(m: &DMatrix<C64>, tol: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            let z = m[(i, j)];
            let band = i.abs_diff(j) <= 1;
            if (!band && z.norm() > tol) || z.im.abs() > tol {
                return None;
            }
        }
    }
    let diag = (0..n).map(|i| m[(i, i)].re).collect();
    let off: Vec<f64> = (0..n.saturating_sub(1)).map(|i| m[(i + 1, i)].re).collect();
    if (0..n.saturating_sub(1)).any(|i| (m[(i, i + 1)].re - off[i]).abs() > tol) {
        return None;
    }
    Some((diag, off))
}

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q == 0.0 {
        q = -tiny;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves `(T - s) y = b` for a symmetric tridiagonal `T`, replacing
/// vanishing pivots by a tiny value.
fn shifted_solve(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let tiny = 1e-300;
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0] - shift;
    if pivot.abs() < tiny {
        pivot = tiny;
    }
    if n > 1 {
        c[0] = off[0] / pivot;
    }
    d[0] = b[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - shift - off[i - 1] * c[i - 1];
        if pivot.abs() < tiny {
            pivot = tiny;
        }
        if i < n - 1 {
            c[i] = off[i] / pivot;
        }
        d[i] = (b[i] - off[i - 1] * d[i - 1]) / pivot;
    }
    let mut y = vec![0.0; n];
    y[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        y[i] = d[i] - c[i] * y[i + 1];
    }
    y
}

/// Lowest eigenpair of a real symmetric tridiagonal matrix by Sturm
/// bisection followed by inverse iteration. The eigenvector has unit
/// Euclidean norm.
pub fn lowest_tridiagonal(diag: &[f64], off: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::Shape("tridiagonal bands have inconsistent lengths".into()));
    }
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);

    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..4 {
        let y = shifted_solve(diag, off, lambda, &v);
        let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NumericalFailure(format!(
                "inverse iteration broke down near eigenvalue {lambda}"
            )));
        }
        v = y.into_iter().map(|a| a / norm).collect();
    }
    // Rayleigh quotient of the converged vector.
    let mut rq = 0.0;
    for i in 0..n {
        let mut tv = diag[i] * v[i];
        if i > 0 {
            tv += off[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            tv += off[i] * v[i + 1];
        }
        rq += v[i] * tv;
    }
    Ok((rq, v))
}
