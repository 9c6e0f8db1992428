//! Baseline control law: LQ state feedback, unit-DC-gain reference
//! feedforward, and integral action on the deviation of `α` from the
//! nominal closed-loop response,
//!
//! ```text
//! u_bl = −K·x + F·r + ki·ξ,   ξ̇ = α − α_ref
//! ```
//!
//! The design model is the forward-c.g. plant with the lift term of `B`
//! removed (`B0 = [0, b2]`): the elevator is assumed to produce pitching
//! moment only. `α_ref` comes from a live copy of the nominal closed loop
//! `ẋ_ref = (A_d − B0·K)·x_ref + B0·F·r`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{eig2, is_hurwitz, lqr_gain, Mat};
use crate::plant::{output_matrix, PlantState};

pub const DEFAULT_QW_ALPHA: f64 = 1.0;
pub const DEFAULT_QW_Q: f64 = 0.01;
pub const DEFAULT_RW: f64 = 1.0;
/// Integral gains tried, in order, when none is configured.
pub const KI_CANDIDATES: [f64; 2] = [2.0, -2.0];

const MIN_DC_GAIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqWeights {
    pub qw_alpha: f64,
    pub qw_q: f64,
    pub rw: f64,
}

impl Default for LqWeights {
    fn default() -> Self {
        Self {
            qw_alpha: DEFAULT_QW_ALPHA,
            qw_q: DEFAULT_QW_Q,
            rw: DEFAULT_RW,
        }
    }
}

impl LqWeights {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("baseline.qw_alpha", self.qw_alpha),
            ("baseline.qw_q", self.qw_q),
            ("baseline.rw", self.rw),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn qw(&self) -> Mat {
        Mat::diag(&[self.qw_alpha, self.qw_q])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineDesign {
    /// LQ gain, 1×2.
    pub k: Mat,
    /// Reference feedforward.
    pub f: f64,
    /// Integral gain (signed).
    pub ki: f64,
    /// Design-model state matrix.
    pub a_d: Mat,
    /// Design-model input column with zero first entry.
    pub b0: Mat,
    pub c: Mat,
    /// `A_d − B0·K`.
    pub a_cl: Mat,
    /// Elevator saturation; the integral state freezes beyond it.
    pub u_limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BaselineState {
    pub x_ref: [f64; 2],
    pub xi: f64,
}

/// Designs the baseline controller on the forward-c.g. model.
pub fn design_baseline(a_fwd: &Mat, b_fwd: &Mat, weights: &LqWeights, ki: f64) -> Result<BaselineDesign> {
    weights.validate()?;
    if !ki.is_finite() {
        return Err(Error::InvalidParameter(format!("baseline.ki must be finite, got {ki}")));
    }
    let mut b0 = *b_fwd;
    b0[(0, 0)] = 0.0;
    let k = lqr_gain(a_fwd, &b0, &weights.qw(), &Mat::diag(&[weights.rw]))?;
    let a_cl = *a_fwd - b0 * k;
    if !is_hurwitz(&a_cl) {
        return Err(Error::NotHurwitz);
    }
    let c = output_matrix();
    let dc = dc_gain(&a_cl, &b0, &c)?;
    if dc.abs() < MIN_DC_GAIN {
        return Err(Error::SingularDcGain(dc));
    }
    let design = BaselineDesign {
        k,
        f: 1.0 / dc,
        ki,
        a_d: *a_fwd,
        b0,
        c,
        a_cl,
        u_limit: f64::INFINITY,
    };
    if ki != 0.0 && !is_hurwitz(&design.augmented_matrix()) {
        return Err(Error::UnstableAugmentedLoop { ki });
    }
    Ok(design)
}

/// Like [`design_baseline`], but with `ki = None` picks the first of
/// [`KI_CANDIDATES`] whose integral-augmented loop is Hurwitz.
pub fn design_baseline_auto(
    a_fwd: &Mat,
    b_fwd: &Mat,
    weights: &LqWeights,
    ki: Option<f64>,
) -> Result<BaselineDesign> {
    if let Some(ki) = ki {
        return design_baseline(a_fwd, b_fwd, weights, ki);
    }
    let mut last = None;
    for cand in KI_CANDIDATES {
        match design_baseline(a_fwd, b_fwd, weights, cand) {
            Ok(d) => return Ok(d),
            Err(e @ Error::UnstableAugmentedLoop { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("candidate list is non-empty"))
}

/// `C·(−A_cl)⁻¹·B`.
fn dc_gain(a_cl: &Mat, b: &Mat, c: &Mat) -> Result<f64> {
    let inv = (-*a_cl).inverse().ok_or(Error::SingularDcGain(0.0))?;
    Ok((*c * inv * *b).scalar())
}

impl BaselineDesign {
    /// DC gain from `r` to `α_ref` including the feedforward; 1 by construction.
    pub fn dc_gain(&self) -> f64 {
        dc_gain(&self.a_cl, &(self.b0 * self.f), &self.c).unwrap_or(f64::NAN)
    }

    /// `[[A_d − B0·K, B0·ki], [C, 0]]` on the state `(x, ξ)`.
    pub fn augmented_matrix(&self) -> Mat {
        Mat::block(&self.a_cl, &self.b0.scale(self.ki), &self.c, &Mat::zeros(1, 1))
    }

    pub fn closed_loop_eigenvalues(&self) -> (Complex64, Complex64) {
        eig2(&self.a_cl)
    }

    pub fn with_u_limit(mut self, u_limit: f64) -> Self {
        self.u_limit = u_limit;
        self
    }
}

/// `−K·x + F·r + ki·ξ`.
pub fn baseline_control(d: &BaselineDesign, x: PlantState, s: &BaselineState, r: f64) -> f64 {
    -(d.k[(0, 0)] * x.alpha + d.k[(0, 1)] * x.q) + d.f * r + d.ki * s.xi
}

/// Derivatives of the reference filter and the integral state.
pub fn baseline_aux_deriv(d: &BaselineDesign, x: PlantState, s: &BaselineState, r: f64) -> BaselineState {
    let a = &d.a_cl;
    let bf = d.b0.scale(d.f);
    let [x1, x2] = s.x_ref;
    BaselineState {
        x_ref: [
            a[(0, 0)] * x1 + a[(0, 1)] * x2 + bf[(0, 0)] * r,
            a[(1, 0)] * x1 + a[(1, 1)] * x2 + bf[(1, 0)] * r,
        ],
        xi: d.c[(0, 0)] * x.alpha + d.c[(0, 1)] * x.q - (d.c[(0, 0)] * x1 + d.c[(0, 1)] * x2),
    }
}
