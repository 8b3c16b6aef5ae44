//! Dense real linear algebra in `f64`.

use nalgebra::{DMatrix, DVector};

/// Least-squares solution of `A x ≈ b` with Tikhonov term `ridge · ‖x‖²`.
///
/// Returns the solution and the relative residual `‖A x − b‖ / ‖b‖`
/// (zero when `b = 0`).
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, ridge: f64) -> (DVector<f64>, f64) {
    let bnorm = b.norm();
    if a.ncols() == 0 || bnorm == 0.0 {
        return (DVector::zeros(a.ncols()), if bnorm == 0.0 { 0.0 } else { 1.0 });
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u computed");
    let vt = svd.v_t.as_ref().expect("v_t computed");
    let smax = svd.singular_values.max();
    let utb = u.transpose() * b;
    let mut y = DVector::zeros(svd.singular_values.len());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > 1e-14 * smax {
            y[i] = s * utb[i] / (s * s + ridge);
        }
    }
    let x = vt.transpose() * y;
    let r = (a * &x - b).norm() / bnorm;
    (x, r)
}

/// Singular values in decreasing order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    s
}

/// Numerical rank with threshold `rel_tol · σ_max`.
pub fn rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > rel_tol * top).count()
}
