//! Dense ≤4×4 linear algebra, Lyapunov/Riccati solvers and the fixed-step
//! integrator shared by every other module.

mod mat;
mod riccati;
mod rk4;

pub use mat::{Mat, MAX_DIM};
pub use riccati::{care_residual, lqr_gain, lyapunov_residual, solve_care, solve_lyapunov};
pub use rk4::rk4_step;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Residual bound for Lyapunov solves (max-norm).
pub const LYAP_RES: f64 = 1e-10;
/// Residual bound for Riccati solves (max-norm).
pub const CARE_RES: f64 = 1e-8;
/// Symmetry tolerance for solver outputs.
pub const SYM_TOL: f64 = 1e-12;

/// Roots of `λ² − tr(A)λ + det(A)` for a 2×2 matrix.
pub fn eig2(a: &Mat) -> (Complex64, Complex64) {
    assert!(a.rows() == 2 && a.cols() == 2, "eig2 needs a 2x2 matrix");
    let tr = a.trace();
    let det = det2(a);
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // larger-magnitude root first, the other through Vieta to avoid cancellation
        let r1 = if half >= 0.0 { half + s } else { half - s };
        let r2 = if r1 != 0.0 { det / r1 } else { tr - r1 };
        (Complex64::new(r1, 0.0), Complex64::new(r2, 0.0))
    } else {
        let s = (-disc).sqrt();
        (Complex64::new(half, s), Complex64::new(half, -s))
    }
}

fn det2(a: &Mat) -> f64 {
    a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]
}

/// Characteristic polynomial coefficients `[c1, ..., cn]` of
/// `det(λI − A) = λⁿ + c1·λⁿ⁻¹ + … + cn` (Faddeev–LeVerrier).
pub fn char_poly(a: &Mat) -> Vec<f64> {
    assert!(a.is_square(), "characteristic polynomial of non-square matrix");
    let n = a.rows();
    let mut coeffs = Vec::with_capacity(n);
    let mut m = Mat::zeros(n, n);
    let mut c_prev = 1.0;
    for k in 1..=n {
        m = *a * m + Mat::identity(n).scale(c_prev);
        let c = -(*a * m).trace() / k as f64;
        coeffs.push(c);
        c_prev = c;
    }
    coeffs
}

/// True iff every eigenvalue of `a` has a strictly negative real part.
pub fn is_hurwitz(a: &Mat) -> bool {
    assert!(a.is_square(), "is_hurwitz on non-square matrix");
    if !a.is_finite() {
        return false;
    }
    if a.rows() == 2 {
        return a.trace() < 0.0 && det2(a) > 0.0;
    }
    // Routh–Hurwitz on det(λI − A) = λⁿ + a1 λⁿ⁻¹ + … + an
    let c = char_poly(a);
    if c.iter().any(|&ci| !(ci > 0.0)) {
        return false;
    }
    match c.as_slice() {
        [_] => true,
        [_, _] => true,
        [a1, a2, a3] => a1 * a2 > *a3,
        [a1, a2, a3, a4] => a1 * a2 * a3 > a3 * a3 + a1 * a1 * a4,
        _ => unreachable!("dimension capped at {MAX_DIM}"),
    }
}

/// Solves the dense system `m·x = b` (row-major `m`, `n×n`) by Gaussian
/// elimination with partial pivoting.
pub(crate) fn solve_linear(mut m: Vec<f64>, mut b: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(m.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = 1e-13 * scale.max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .expect("non-empty range");
        let p = m[pivot * n + col];
        if p.abs() <= tol {
            return Err(Error::SingularSystem { pivot: p });
        }
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        for i in col + 1..n {
            let f = m[i * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[i * n + j] -= f * m[col * n + j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= m[i * n + j] * x[j];
        }
        x[i] = s / m[i * n + i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a_fwd() -> Mat {
        Mat::from_rows(&[[-1.453, 0.9672], [5.181, -1.639]])
    }

    #[test]
    fn eig2_identity_and_factorable() {
        let (a, b) = eig2(&-Mat::identity(2));
        assert_eq!((a.re, a.im, b.re, b.im), (-1.0, 0.0, -1.0, 0.0));

        let (a, b) = eig2(&Mat::from_rows(&[[0.0, 1.0], [-2.0, -3.0]]));
        let mut roots = [a.re, b.re];
        roots.sort_by(f64::total_cmp);
        assert!((roots[0] + 2.0).abs() < 1e-15 && (roots[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn eig2_forward_plant_is_unstable() {
        // det = (−1.453)(−1.639) − 0.9672·5.181 < 0 → one real positive root
        let det = 1.453 * 1.639 - 0.9672 * 5.181;
        assert!(det < 0.0);
        let tr: f64 = -1.453 - 1.639;
        let expected = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
        let (a, b) = eig2(&a_fwd());
        let hi = a.re.max(b.re);
        assert!(hi > 0.0);
        assert!((hi - expected).abs() < 1e-12);
        assert_eq!(a.im, 0.0);
    }

    #[test]
    fn eig2_complex_pair() {
        let (a, b) = eig2(&Mat::from_rows(&[[-1.0, 2.0], [-2.0, -1.0]]));
        assert_eq!(a.re, -1.0);
        assert_eq!(b.re, -1.0);
        assert!((a.im - 2.0).abs() < 1e-15 && (b.im + 2.0).abs() < 1e-15);
    }

    #[test]
    fn hurwitz_checks() {
        assert!(is_hurwitz(&-Mat::identity(2)));
        assert!(!is_hurwitz(&a_fwd()));
        assert!(is_hurwitz(&-Mat::identity(3)));
        assert!(is_hurwitz(&-Mat::identity(4)));
        assert!(!is_hurwitz(&Mat::diag(&[-1.0, -2.0, 0.5])));
        assert!(!is_hurwitz(&Mat::diag(&[-1.0, -2.0, -3.0, 0.0])));
        // eigenvalues −1 ± 2i and −3, +0.1
        let a = Mat::from_rows(&[
            [-1.0, 2.0, 0.0, 0.0],
            [-2.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, -3.0, 0.0],
            [0.0, 0.0, 1.0, 0.1],
        ]);
        assert!(!is_hurwitz(&a));
        let mut b = a;
        b[(3, 3)] = -0.1;
        assert!(is_hurwitz(&b));
        // 3×3 companion matrix of (s+1)(s²+0.01s+4): stable but lightly damped
        let c = Mat::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-4.0, -4.01, -1.01]]);
        assert!(is_hurwitz(&c));
        // (s−0.2)(s²+2s+5) expanded: s³ + 1.8s² + 4.6s − 1
        let d = Mat::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, -4.6, -1.8]]);
        assert!(!is_hurwitz(&d));
    }

    #[test]
    fn char_poly_matches_diagonal() {
        // (λ+1)(λ+2)(λ+3) = λ³ + 6λ² + 11λ + 6
        let c = char_poly(&Mat::diag(&[-1.0, -2.0, -3.0]));
        for (got, want) in c.iter().zip([6.0, 11.0, 6.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_solve_and_singular() {
        let x = solve_linear(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0], 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(matches!(
            solve_linear(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0], 2),
            Err(Error::SingularSystem { .. })
        ));
    }
}
