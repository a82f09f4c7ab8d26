//! Small dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Operator 2-norm (largest singular value).
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Reciprocal 2-norm condition number `sigma_min / sigma_max`; 0 for a zero matrix.
pub fn rcond(m: &CMatrix) -> f64 {
    let sv = singular_values(m);
    if sv.is_empty() {
        return 1.0;
    }
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * max && s > 0.0).count()
}

/// LU solve; `None` when the factorization hits an exact zero pivot.
pub fn lu_solve(a: &CMatrix, rhs: &CMatrix) -> Option<CMatrix> {
    if a.nrows() == 0 {
        return Some(CMatrix::zeros(0, rhs.ncols()));
    }
    a.clone().lu().solve(rhs)
}

pub fn inverse(a: &CMatrix) -> Option<CMatrix> {
    if a.nrows() == 0 {
        return Some(CMatrix::zeros(0, 0));
    }
    a.clone().try_inverse()
}

/// Minimum-norm least-squares solution through the SVD; singular values
/// below `rel_tol * sigma_max` are treated as zero.
pub fn lstsq(a: &CMatrix, rhs: &CMatrix, rel_tol: f64) -> CMatrix {
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (rel_tol * max).max(f64::MIN_POSITIVE);
    svd.solve(rhs, eps)
        .unwrap_or_else(|_| CMatrix::zeros(a.ncols(), rhs.ncols()))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest absolute deviation from the identity of `s^dagger s`, measured in the 2-norm.
pub fn unitarity_defect(s: &CMatrix) -> f64 {
    let n = s.nrows();
    op_norm(&(s.adjoint() * s - identity(n)))
}

/// Spectral radius estimate `||K^(2^j)||^(1/2^j)` by repeated squaring.
pub fn spectral_radius_estimate(k: &CMatrix, squarings: u32) -> f64 {
    if k.nrows() == 0 {
        return 0.0;
    }
    // invariant: K^power = exp(log_scale) * p
    let mut p = k.clone();
    let mut log_scale = 0.0f64;
    let mut power = 1.0f64;
    for _ in 0..squarings {
        let n = op_norm(&p);
        if n == 0.0 {
            return 0.0;
        }
        p /= C64::from(n);
        log_scale += n.ln();
        p = &p * &p;
        log_scale *= 2.0;
        power *= 2.0;
    }
    let n = op_norm(&p);
    if n == 0.0 {
        return 0.0;
    }
    ((log_scale + n.ln()) / power).exp()
}
