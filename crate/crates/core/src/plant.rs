//! Linearized pitch-axis dynamics `ẋ = Ax + Bu`, `y = α`, with state
//! `x = [α, q]` (angle of attack, pitch rate; radians) and elevator input
//! `u` (rad). The model varies with the center-of-gravity position `mu`,
//! 0 = most forward, 1 = most aft.

use crate::error::{Error, Result};
use crate::numerics::Mat;

/// State matrix, most forward c.g.
pub const A_FWD: [[f64; 2]; 2] = [[-1.453, 0.9672], [5.181, -1.639]];
/// Input column, most forward c.g.
pub const B_FWD: [f64; 2] = [0.4467, 34.79];
/// State matrix, most aft c.g.
pub const A_AFT: [[f64; 2]; 2] = [[-1.45, 0.9673], [15.08, -1.414]];
/// Input column, most aft c.g.
pub const B_AFT: [f64; 2] = [0.4461, 31.77];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    pub alpha: f64,
    pub q: f64,
}

impl PlantState {
    pub const ZERO: Self = Self { alpha: 0.0, q: 0.0 };

    pub fn new(alpha: f64, q: f64) -> Self {
        Self { alpha, q }
    }

    pub fn as_vector(&self) -> Mat {
        Mat::col_vector(&[self.alpha, self.q])
    }

    pub fn from_vector(v: &Mat) -> Self {
        Self::new(v[(0, 0)], v[(1, 0)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantModel {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub mu: f64,
}

impl PlantModel {
    /// Plant with explicit matrices; output is always `α`.
    pub fn new(a: Mat, b: Mat, mu: f64) -> Self {
        assert!(a.rows() == 2 && a.cols() == 2 && b.rows() == 2 && b.cols() == 1);
        Self {
            a,
            b,
            c: output_matrix(),
            mu,
        }
    }

    pub fn forward() -> Self {
        Self::new(Mat::from_rows(&A_FWD), Mat::col_vector(&B_FWD), 0.0)
    }

    pub fn aft() -> Self {
        Self::new(Mat::from_rows(&A_AFT), Mat::col_vector(&B_AFT), 1.0)
    }

    /// Same dynamics with the elevator lift term (first entry of `B`) removed.
    pub fn without_lift(&self) -> Self {
        let mut b = self.b;
        b[(0, 0)] = 0.0;
        Self { b, ..*self }
    }

    pub fn deriv(&self, x: PlantState, u: f64) -> PlantState {
        let a = &self.a;
        let b = &self.b;
        PlantState {
            alpha: a[(0, 0)] * x.alpha + a[(0, 1)] * x.q + b[(0, 0)] * u,
            q: a[(1, 0)] * x.alpha + a[(1, 1)] * x.q + b[(1, 0)] * u,
        }
    }
}

/// `C = [1, 0]`.
pub fn output_matrix() -> Mat {
    Mat::row_vector(&[1.0, 0.0])
}

/// Plant at c.g. position `mu ∈ [0, 1]`, entrywise affine between the two
/// corner models. The endpoints reproduce the corners exactly.
pub fn plant_matrices(mu: f64) -> Result<PlantModel> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::OutOfRange {
            name: "plant.mu",
            value: mu,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if mu == 0.0 {
        return Ok(PlantModel::forward());
    }
    if mu == 1.0 {
        return Ok(PlantModel::aft());
    }
    let lerp = |f: f64, a: f64| (1.0 - mu) * f + mu * a;
    let mut a = Mat::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            a[(i, j)] = lerp(A_FWD[i][j], A_AFT[i][j]);
        }
    }
    let b = Mat::col_vector(&[lerp(B_FWD[0], B_AFT[0]), lerp(B_FWD[1], B_AFT[1])]);
    Ok(PlantModel::new(a, b, mu))
}

/// `ẋ = Ax + Bu`.
pub fn plant_deriv(m: &PlantModel, x: PlantState, u: f64) -> PlantState {
    m.deriv(x, u)
}
