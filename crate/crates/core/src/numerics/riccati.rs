use super::{is_hurwitz, solve_linear, Mat, CARE_RES, LYAP_RES, SYM_TOL};
use crate::error::{Error, Result};

const NEWTON_MAX_ITER: usize = 60;
const INIT_GAIN_GRID: [f64; 9] = [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5];

/// Solves `AᵀP + PA = −Q` for symmetric positive-definite `P`.
///
/// The n² unknowns are solved jointly as one dense linear system (the
/// Kronecker-sum form of the equation); at n ≤ 4 that is at most 16×16.
pub fn solve_lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    if !is_hurwitz(a) {
        return Err(Error::NotHurwitz);
    }
    if q.rows() != a.rows() || !q.is_spd(SYM_TOL) {
        return Err(Error::NotPositiveDefinite("Lyapunov weight Q"));
    }
    let p = lyapunov_unchecked(a, q)?;
    let res = lyapunov_residual(a, &p, q);
    if res > LYAP_RES * (1.0 + q.max_abs()) {
        return Err(Error::SingularSystem { pivot: res });
    }
    Ok(p)
}

/// `AᵀP + PA = −Q` without the Hurwitz/definiteness guards; `Q` may be
/// semidefinite or indefinite as long as the Kronecker system is regular.
pub(super) fn lyapunov_unchecked(a: &Mat, q: &Mat) -> Result<Mat> {
    let n = a.rows();
    let nn = n * n;
    let mut m = vec![0.0; nn * nn];
    let mut rhs = vec![0.0; nn];
    // equation (i,j): Σ_k A_ki P_kj + Σ_k P_ik A_kj = −Q_ij, unknown P_kl at k·n + l
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                m[row * nn + k * n + j] += a[(k, i)];
                m[row * nn + i * n + k] += a[(k, j)];
            }
            rhs[row] = -q[(i, j)];
        }
    }
    let x = solve_linear(m, rhs, nn)?;
    let mut p = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] = 0.5 * (x[i * n + j] + x[j * n + i]);
        }
    }
    Ok(p)
}

/// Max-norm residual of `AᵀP + PA + Q`.
pub fn lyapunov_residual(a: &Mat, p: &Mat, q: &Mat) -> f64 {
    (a.transpose() * *p + *p * *a + *q).max_abs()
}

/// Max-norm residual of `AᵀP + PA − PBR⁻¹BᵀP + Q`.
pub fn care_residual(a: &Mat, b: &Mat, q: &Mat, r_inv: &Mat, p: &Mat) -> f64 {
    let pb = *p * *b;
    (a.transpose() * *p + *p * *a - pb * *r_inv * pb.transpose() + *q).max_abs()
}

/// Stabilizing solution of the continuous algebraic Riccati equation
/// `AᵀP + PA − PBRw⁻¹BᵀP + Qw = 0` by Newton–Kleinman iteration.
pub fn solve_care(a: &Mat, b: &Mat, qw: &Mat, rw: &Mat) -> Result<Mat> {
    let n = a.rows();
    assert!(a.is_square() && b.rows() == n, "CARE dimension mismatch");
    if !qw.is_spd(SYM_TOL) || qw.rows() != n {
        return Err(Error::NotPositiveDefinite("state weight Qw"));
    }
    if !rw.is_spd(SYM_TOL) || rw.rows() != b.cols() {
        return Err(Error::NotPositiveDefinite("input weight Rw"));
    }
    if b.max_abs() == 0.0 {
        return Err(Error::NoStabilizingSolution("input matrix B is zero"));
    }
    let r_inv = rw
        .inverse()
        .ok_or(Error::NotPositiveDefinite("input weight Rw"))?;

    let mut k = initial_gain(a, b)?;
    let mut p_prev: Option<Mat> = None;
    for _ in 0..NEWTON_MAX_ITER {
        let closed = *a - *b * k;
        if !is_hurwitz(&closed) {
            return Err(Error::NoStabilizingSolution("Newton iterate lost stability"));
        }
        let weight = *qw + k.transpose() * *rw * k;
        let p = lyapunov_unchecked(&closed, &weight)?;
        k = r_inv * b.transpose() * p;
        let done = p_prev.is_some_and(|prev| (p - prev).max_abs() <= 1e-14 * (1.0 + p.max_abs()));
        p_prev = Some(p);
        if done {
            break;
        }
    }
    let p = p_prev.expect("at least one iteration");
    if care_residual(a, b, qw, &r_inv, &p) > CARE_RES * (1.0 + p.max_abs()) {
        return Err(Error::NoStabilizingSolution("Newton iteration did not converge"));
    }
    if !is_hurwitz(&(*a - *b * r_inv * b.transpose() * p)) {
        return Err(Error::NoStabilizingSolution("solution is not stabilizing"));
    }
    Ok(p)
}

/// LQ gain `K = Rw⁻¹BᵀP` from the stabilizing Riccati solution.
pub fn lqr_gain(a: &Mat, b: &Mat, qw: &Mat, rw: &Mat) -> Result<Mat> {
    let p = solve_care(a, b, qw, rw)?;
    let r_inv = rw
        .inverse()
        .ok_or(Error::NotPositiveDefinite("input weight Rw"))?;
    Ok(r_inv * b.transpose() * p)
}

/// A gain `K₀` with `A − BK₀` Hurwitz.
///
/// Scans `K₀ = c·Bᵀ` over a log grid first, which suffices whenever the
/// input acts on every unstable mode directly. Otherwise falls back to
/// Bass's construction: with `β` above the spectral radius,
/// `(A+βI)Z + Z(A+βI)ᵀ = 2BBᵀ` and `K₀ = BᵀZ⁻¹`.
fn initial_gain(a: &Mat, b: &Mat) -> Result<Mat> {
    if is_hurwitz(a) {
        return Ok(Mat::zeros(b.cols(), a.rows()));
    }
    let bt = b.transpose();
    for c in INIT_GAIN_GRID {
        let k = bt.scale(c);
        if is_hurwitz(&(*a - *b * k)) {
            return Ok(k);
        }
    }
    let n = a.rows();
    let beta = 1.0 + n as f64 * a.max_abs();
    let shifted = -(*a + Mat::identity(n).scale(beta));
    // lyapunov_unchecked solves XᵀZ + ZX = −Q; X = shiftedᵀ gives the Bass form
    let z = lyapunov_unchecked(&shifted.transpose(), &(*b * bt).scale(2.0))?;
    let k = z
        .inverse()
        .map(|zi| bt * zi)
        .ok_or(Error::NoStabilizingSolution("(A, B) is not controllable"))?;
    if is_hurwitz(&(*a - *b * k)) {
        Ok(k)
    } else {
        Err(Error::NoStabilizingSolution("no stabilizing initial gain"))
    }
}
