//! Small dense solves used by instance builders and finalization.

/// Solves A x = b for symmetric positive definite A (row-major), via
/// Cholesky. Panics on non-PD input.
pub fn solve_spd(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                assert!(s > 0.0, "matrix not positive definite");
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Thomas algorithm for a symmetric positive definite tridiagonal system
/// with diagonal `diag` and subdiagonal `off` (off[i] couples i and i+1).
pub fn solve_tridiag(diag: &[f64], off: &[f64], b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1));
    if n == 0 {
        return vec![];
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = diag[0];
    d[0] = b[0];
    for i in 1..n {
        let w = off[i - 1] / c[i - 1];
        c[i] = diag[i] - w * off[i - 1];
        d[i] = b[i] - w * d[i - 1];
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1] / c[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (d[i] - off[i] * x[i + 1]) / c[i];
    }
    x
}
