//! Adaptive augmentation of the baseline law.
//!
//! The plant is rewritten in `z = T·x = [α, α̇]` (under the no-lift input
//! approximation), where it takes companion form
//!
//! ```text
//! ż = [[0, 1], [ã21, ã22]]·z + [0, b̃2]ᵀ·u
//! ```
//!
//! and the nominal closed loop `Ã_m = T(A_d − B0·K)T⁻¹`, `B̃_m = T·B0·F`
//! becomes the reference model. The augmentation `u_ad = −K_z·z + K_r·r`
//! is adapted with
//!
//! ```text
//! K̇_z = Proj(K_z,  γ_z·sgn(λ)·(eᵀPB̃⁰)·zᵀ)      when ‖e‖ > ε, else 0
//! K̇_r = Proj(K_r, −γ_r·sgn(λ)·(eᵀPB̃⁰)·r)
//! ```
//!
//! with `e = z − z_m`, `Ã_mᵀP + PÃ_m = −Q`, and `B̃⁰ = T·B0` the nominal
//! input direction. `Proj` is a componentwise clamp on a box.

use crate::baseline::BaselineDesign;
use crate::error::{Error, Result};
use crate::numerics::{is_hurwitz, solve_lyapunov, Mat};
use crate::plant::PlantModel;

pub const DEFAULT_GAMMA_Z: f64 = 200.0;
pub const DEFAULT_GAMMA_R: f64 = 200.0;
pub const DEFAULT_EPS: f64 = 0.03;
pub const DEFAULT_KZ_BOUND: f64 = 10.0;
pub const DEFAULT_KR_BOUND: f64 = 10.0;

/// Structural tolerance for the companion-form checks.
pub const COMPANION_TOL: f64 = 1e-10;
const MIN_A12: f64 = 1e-12;
const MIN_INPUT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZTransform {
    pub t: Mat,
    pub t_inv: Mat,
}

/// `T = [[1, 0], [a11, a12]]` from the first (force) row of a state matrix.
pub fn build_transform(a11: f64, a12: f64) -> Result<ZTransform> {
    if !(a12.abs() >= MIN_A12) {
        return Err(Error::SingularTransform { a12 });
    }
    let t = Mat::from_rows(&[[1.0, 0.0], [a11, a12]]);
    let t_inv = Mat::from_rows(&[[1.0, 0.0], [-a11 / a12, 1.0 / a12]]);
    Ok(ZTransform { t, t_inv })
}

impl ZTransform {
    pub fn from_state_matrix(a: &Mat) -> Result<Self> {
        build_transform(a[(0, 0)], a[(0, 1)])
    }

    pub fn apply(&self, alpha: f64, q: f64) -> [f64; 2] {
        [alpha, self.t[(1, 0)] * alpha + self.t[(1, 1)] * q]
    }

    /// `T·A·T⁻¹`.
    pub fn similarity(&self, a: &Mat) -> Mat {
        self.t * *a * self.t_inv
    }
}

/// Adaptation tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MracTuning {
    pub gamma_z: f64,
    pub gamma_r: f64,
    pub eps: f64,
    pub kz_bound: f64,
    pub kr_bound: f64,
}

impl Default for MracTuning {
    fn default() -> Self {
        Self {
            gamma_z: DEFAULT_GAMMA_Z,
            gamma_r: DEFAULT_GAMMA_R,
            eps: DEFAULT_EPS,
            kz_bound: DEFAULT_KZ_BOUND,
            kr_bound: DEFAULT_KR_BOUND,
        }
    }
}

impl MracTuning {
    fn validate(&self) -> Result<()> {
        let checks = [
            ("mrac.gamma_z", self.gamma_z, true),
            ("mrac.gamma_r", self.gamma_r, true),
            ("mrac.eps", self.eps, false),
            ("mrac.kz_bound", self.kz_bound, false),
            ("mrac.kr_bound", self.kr_bound, false),
        ];
        for (name, v, zero_ok) in checks {
            let ok = v.is_finite() && (v > 0.0 || (zero_ok && v == 0.0));
            if !ok {
                let req = if zero_ok { ">= 0" } else { "> 0" };
                return Err(Error::InvalidParameter(format!("{name} must be finite and {req}, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MracDesign {
    pub transform: ZTransform,
    /// Reference model `Ã_m`.
    pub a_m_z: Mat,
    /// Reference input `B̃_m`.
    pub b_m_z: Mat,
    /// Nominal input direction `B̃⁰ = T·B0`.
    pub b0_z: Mat,
    /// Open-loop design model in `z`, `T·A_d·T⁻¹`.
    pub a_design_z: Mat,
    /// Baseline state feedback in `z`, `K·T⁻¹`.
    pub k_bl_z: Mat,
    pub f_bl: f64,
    pub p: Mat,
    pub q_lyap: Mat,
    pub gamma_z: f64,
    pub gamma_r: f64,
    pub sgn_lambda: f64,
    pub eps: f64,
    pub kz_bound: f64,
    pub kr_bound: f64,
}

pub fn build_mrac(d: &BaselineDesign, t: &ZTransform, q_lyap: &Mat, tuning: &MracTuning) -> Result<MracDesign> {
    tuning.validate()?;
    let a_m_z = t.similarity(&d.a_cl);
    let b0_z = t.t * d.b0;
    let b_m_z = b0_z.scale(d.f);
    let residual = [
        a_m_z[(0, 0)].abs(),
        (a_m_z[(0, 1)] - 1.0).abs(),
        b0_z[(0, 0)].abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if !(residual <= COMPANION_TOL) {
        return Err(Error::CompanionFormViolation { residual });
    }
    if !is_hurwitz(&a_m_z) {
        return Err(Error::NotHurwitz);
    }
    let p = solve_lyapunov(&a_m_z, q_lyap)?;
    Ok(MracDesign {
        transform: *t,
        a_m_z,
        b_m_z,
        b0_z,
        a_design_z: t.similarity(&d.a_d),
        k_bl_z: d.k * t.t_inv,
        f_bl: d.f,
        p,
        q_lyap: *q_lyap,
        gamma_z: tuning.gamma_z,
        gamma_r: tuning.gamma_r,
        // both corner models have positive moment-row control effectiveness
        sgn_lambda: 1.0,
        eps: tuning.eps,
        kz_bound: tuning.kz_bound,
        kr_bound: tuning.kr_bound,
    })
}

/// Reference design with `Q = I` and the transform taken from the design model.
pub fn build_mrac_default(d: &BaselineDesign, tuning: &MracTuning) -> Result<MracDesign> {
    let t = ZTransform::from_state_matrix(&d.a_d)?;
    build_mrac(d, &t, &Mat::identity(2), tuning)
}

impl MracDesign {
    pub fn tuning(&self) -> MracTuning {
        MracTuning {
            gamma_z: self.gamma_z,
            gamma_r: self.gamma_r,
            eps: self.eps,
            kz_bound: self.kz_bound,
            kr_bound: self.kr_bound,
        }
    }

    /// `ż_m = Ã_m·z_m + B̃_m·r`.
    pub fn reference_deriv(&self, z_m: [f64; 2], r: f64) -> [f64; 2] {
        let a = &self.a_m_z;
        let b = &self.b_m_z;
        [
            a[(0, 0)] * z_m[0] + a[(0, 1)] * z_m[1] + b[(0, 0)] * r,
            a[(1, 0)] * z_m[0] + a[(1, 1)] * z_m[1] + b[(1, 0)] * r,
        ]
    }

    /// `½·eᵀPe`.
    pub fn error_energy(&self, e: [f64; 2]) -> f64 {
        let p = &self.p;
        0.5 * (p[(0, 0)] * e[0] * e[0] + 2.0 * p[(0, 1)] * e[0] * e[1] + p[(1, 1)] * e[1] * e[1])
    }

    /// `eᵀ·P·B̃⁰`.
    fn error_projection(&self, e: [f64; 2]) -> f64 {
        let pb = self.p * self.b0_z;
        e[0] * pb[(0, 0)] + e[1] * pb[(1, 0)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdaptiveGains {
    pub kz: [f64; 2],
    pub kr: f64,
}

impl AdaptiveGains {
    pub const ZERO: Self = Self { kz: [0.0; 2], kr: 0.0 };

    /// Clamps every gain into its projection box.
    pub fn clamped(&self, kz_bound: f64, kr_bound: f64) -> Self {
        Self {
            kz: self.kz.map(|k| k.clamp(-kz_bound, kz_bound)),
            kr: self.kr.clamp(-kr_bound, kr_bound),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.kz == [0.0; 2] && self.kr == 0.0
    }
}

/// `u_ad = −K_z·z + K_r·r`.
pub fn adaptive_control(g: &AdaptiveGains, z: [f64; 2], r: f64) -> f64 {
    -(g.kz[0] * z[0] + g.kz[1] * z[1]) + g.kr * r
}

/// Boundary-clamp projection of one component: an outward push at or
/// beyond the box boundary is zeroed, anything else passes through.
#[inline]
pub fn project(value: f64, raw_deriv: f64, bound: f64) -> f64 {
    if value.abs() >= bound && value * raw_deriv > 0.0 {
        0.0
    } else {
        raw_deriv
    }
}

pub fn project_row<const N: usize>(value: [f64; N], raw_deriv: [f64; N], bound: f64) -> [f64; N] {
    let mut out = raw_deriv;
    for i in 0..N {
        out[i] = project(value[i], raw_deriv[i], bound);
    }
    out
}

pub fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Gain derivatives with dead zone and projection.
pub fn update_derivs(m: &MracDesign, g: &AdaptiveGains, e: [f64; 2], z: [f64; 2], r: f64) -> AdaptiveGains {
    if norm2(e) <= m.eps {
        return AdaptiveGains::ZERO;
    }
    let s = m.error_projection(e);
    let kz_raw = [
        m.gamma_z * m.sgn_lambda * s * z[0],
        m.gamma_z * m.sgn_lambda * s * z[1],
    ];
    let kr_raw = -m.gamma_r * m.sgn_lambda * s * r;
    AdaptiveGains {
        kz: project_row(g.kz, kz_raw, m.kz_bound),
        kr: project(g.kr, kr_raw, m.kr_bound),
    }
}

/// `V = ½(eᵀPe + |λ|/γ_z·ΔK_z·ΔK_zᵀ + |λ|/γ_r·ΔK_r²)`.
pub fn lyapunov_value(m: &MracDesign, e: [f64; 2], dkz: [f64; 2], dkr: f64, lambda: f64) -> Result<f64> {
    if m.gamma_z == 0.0 {
        return Err(Error::ZeroRate("gamma_z"));
    }
    if m.gamma_r == 0.0 {
        return Err(Error::ZeroRate("gamma_r"));
    }
    let l = lambda.abs();
    Ok(m.error_energy(e) + 0.5 * (l / m.gamma_z * (dkz[0] * dkz[0] + dkz[1] * dkz[1]) + l / m.gamma_r * dkr * dkr))
}

/// A plant in companion `z`-coordinates: `ż = Ã·z + B̃·u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompanionPlant {
    pub a: Mat,
    pub b: Mat,
}

impl CompanionPlant {
    /// Transforms `plant` (lift term dropped) with `t`.
    pub fn transformed(plant: &PlantModel, t: &ZTransform) -> Self {
        let p = plant.without_lift();
        Self {
            a: t.similarity(&p.a),
            b: t.t * p.b,
        }
    }

    /// `plant` in its own `z = [α, α̇]` coordinates: the transform is built
    /// from the plant's own force row, so the first row is exactly `[0, 1]`.
    pub fn of_plant(plant: &PlantModel) -> Result<Self> {
        let t = ZTransform::from_state_matrix(&plant.a)?;
        Ok(Self::transformed(plant, &t))
    }
}

/// Ideal gains satisfying the model matching conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGains {
    /// Adaptive part of the ideal state gain (total minus baseline).
    pub kz_star: [f64; 2],
    /// Adaptive part of the ideal feedforward (total minus baseline).
    pub kr_star: f64,
    /// Control effectiveness relative to the nominal input direction.
    pub lambda: f64,
    pub kz_total: [f64; 2],
    pub kr_total: f64,
}

/// Solves `Ã − B̃·K_z,tot = Ã_m`, `B̃·K_r,tot = B̃_m` on the moment row and
/// splits off the baseline's contribution.
pub fn ideal_gains(m: &MracDesign, plant_z: &CompanionPlant, k_bl_z: &Mat, f_bl: f64) -> Result<IdealGains> {
    let b_true = plant_z.b[(1, 0)];
    let b_nom = m.b0_z[(1, 0)];
    if !(b_true.abs() >= MIN_INPUT) {
        return Err(Error::DegenerateInput("plant input entry b̃2 is zero"));
    }
    if !(b_nom.abs() >= MIN_INPUT) {
        return Err(Error::DegenerateInput("nominal input entry b̃⁰2 is zero"));
    }
    let lambda = b_true / b_nom;
    // Ã_m,2 = Ã_d,2 − b̃⁰2·K_bl,z, so the total gain is
    // (Ã_2 − Ã_d,2)/(λ b̃⁰2) + K_bl,z/λ and the adaptive part subtracts K_bl,z
    let inv_excess = 1.0 / lambda - 1.0;
    let mut kz_star = [0.0; 2];
    let mut kz_total = [0.0; 2];
    for j in 0..2 {
        let shift = (plant_z.a[(1, j)] - m.a_design_z[(1, j)]) / (lambda * b_nom);
        kz_star[j] = shift + inv_excess * k_bl_z[(0, j)];
        kz_total[j] = kz_star[j] + k_bl_z[(0, j)];
    }
    let kr_star = inv_excess * f_bl;
    Ok(IdealGains {
        kz_star,
        kr_star,
        lambda,
        kz_total,
        kr_total: kr_star + f_bl,
    })
}

impl IdealGains {
    /// Residuals `(‖Ã − B̃·K_z,tot − Ã_m‖_max, ‖B̃·K_r,tot − B̃_m‖_max)`.
    pub fn matching_residual(&self, m: &MracDesign, plant_z: &CompanionPlant) -> (f64, f64) {
        let kz = Mat::row_vector(&self.kz_total);
        let state = (plant_z.a - plant_z.b * kz - m.a_m_z).max_abs();
        let input = (plant_z.b.scale(self.kr_total) - m.b_m_z).max_abs();
        (state, input)
    }
}
