//! Dense Cholesky helpers for the handful-of-variables systems in this crate.

/// Relative pivot threshold below which a Gram matrix is treated as singular.
pub(crate) const SINGULAR_RTOL: f64 = 1e-12;

/// In-place lower Cholesky factor of the row-major `n×n` matrix `a`.
/// Returns `None` when a pivot falls below `rtol · max(diag)`.
pub(crate) fn cholesky(a: &[f64], n: usize, rtol: f64) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if diag.is_nan() || diag <= rtol * scale {
            return None;
        }
        let djj = diag.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / djj;
        }
    }
    Some(l)
}

/// Solves `A x = b` for symmetric positive-definite `A`.
pub(crate) fn solve_spd(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let l = cholesky(a, n, SINGULAR_RTOL)?;
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}

/// Diagonal entries of `A⁻¹` for symmetric positive-definite `A`.
pub(crate) fn inverse_diagonal(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(solve_spd(a, n, &e)?[i]);
    }
    Some(out)
}

/// Positive semi-definiteness up to an absolute tolerance: `A + tol·I` must
/// admit a Cholesky factorization.
pub(crate) fn is_psd(a: &[f64], n: usize, tol: f64) -> bool {
    if n == 0 {
        return true;
    }
    let mut shifted = a.to_vec();
    for i in 0..n {
        shifted[i * n + i] += tol;
    }
    cholesky(&shifted, n, 0.0).is_some()
}
