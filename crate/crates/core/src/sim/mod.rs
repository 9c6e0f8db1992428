//! Closed-loop simulation of plant, baseline law, reference model and
//! adaptive laws as one ODE, integrated with fixed-step RK4.

mod metrics;
mod trace;

pub use metrics::{compute_metrics, Metrics, SegmentMetrics, Settling};
pub use trace::{write_trace_csv, Sample, SimTrace, Verdict, TRACE_COLUMNS};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::baseline::{baseline_aux_deriv, baseline_control, BaselineDesign, BaselineState};
use crate::error::{Error, Result};
use crate::mrac::{adaptive_control, norm2, update_derivs, AdaptiveGains, MracDesign};
use crate::numerics::rk4_step;
use crate::plant::{plant_matrices, PlantModel, PlantState};

/// Any state magnitude above this ends the run as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e6;
pub const DEFAULT_DT: f64 = 0.001;
pub const DEFAULT_T_END: f64 = 25.0;
pub const DEFAULT_STRIDE: usize = 10;

/// A reference step: from `time` on, `r = amplitude`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefStep {
    pub time: f64,
    pub amplitude: f64,
}

impl RefStep {
    pub const fn new(time: f64, amplitude: f64) -> Self {
        Self { time, amplitude }
    }
}

/// Repeated steps over 25 s.
pub const DEFAULT_STEPS: [RefStep; 5] = [
    RefStep::new(1.0, 0.1),
    RefStep::new(6.0, 0.0),
    RefStep::new(11.0, 0.15),
    RefStep::new(16.0, 0.0),
    RefStep::new(21.0, 0.1),
];

/// Piecewise-constant reference: amplitude of the latest step at or before `t`.
pub fn reference_signal(steps: &[RefStep], t: f64) -> f64 {
    steps
        .iter()
        .take_while(|s| s.time <= t)
        .last()
        .map_or(0.0, |s| s.amplitude)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// c.g. position in `[0, 1]`.
    pub mu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub ref_steps: Vec<RefStep>,
    /// Standard deviation of the measurement noise on `α` and `q` (rad, rad/s).
    pub noise_std: f64,
    pub seed: u64,
    pub mrac_enabled: bool,
    pub sample_stride: usize,
    /// Replaces the plant built from `mu`.
    pub plant_override: Option<PlantModel>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            mu: 1.0,
            dt: DEFAULT_DT,
            t_end: DEFAULT_T_END,
            ref_steps: DEFAULT_STEPS.to_vec(),
            noise_std: 0.0,
            seed: 0,
            mrac_enabled: true,
            sample_stride: DEFAULT_STRIDE,
            plant_override: None,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("scenario.dt must be > 0, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return bad(format!("scenario.t_end must be >= dt, got {}", self.t_end));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return bad(format!("scenario.noise_std must be >= 0, got {}", self.noise_std));
        }
        if self.sample_stride == 0 {
            return bad("scenario.stride must be >= 1".into());
        }
        if self.plant_override.is_none() {
            plant_matrices(self.mu)?;
        }
        let mut prev = f64::NEG_INFINITY;
        for s in &self.ref_steps {
            if !(s.time > prev && s.time >= 0.0 && s.time.is_finite()) {
                return bad(format!(
                    "scenario.steps times must be finite, >= 0 and strictly increasing, got {}",
                    s.time
                ));
            }
            if !s.amplitude.is_finite() {
                return bad(format!("scenario.steps amplitude must be finite, got {}", s.amplitude));
            }
            prev = s.time;
        }
        Ok(())
    }

    pub fn plant(&self) -> Result<PlantModel> {
        match self.plant_override {
            Some(p) => Ok(p),
            None => plant_matrices(self.mu),
        }
    }

    /// Integration steps; the run ends at `n·dt ≤ t_end`.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt + 1e-9).floor() as usize
    }

    /// Step amplitudes multiplied by `k`.
    pub fn scaled_reference(mut self, k: f64) -> Self {
        for s in &mut self.ref_steps {
            s.amplitude *= k;
        }
        self
    }
}

/// The coupled integration state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimState {
    pub x: PlantState,
    pub baseline: BaselineState,
    pub z_m: [f64; 2],
    pub gains: AdaptiveGains,
}

const STATE_LEN: usize = 10;

impl SimState {
    fn pack(&self) -> [f64; STATE_LEN] {
        [
            self.x.alpha,
            self.x.q,
            self.baseline.x_ref[0],
            self.baseline.x_ref[1],
            self.baseline.xi,
            self.z_m[0],
            self.z_m[1],
            self.gains.kz[0],
            self.gains.kz[1],
            self.gains.kr,
        ]
    }

    fn unpack(s: &[f64; STATE_LEN]) -> Self {
        Self {
            x: PlantState::new(s[0], s[1]),
            baseline: BaselineState {
                x_ref: [s[2], s[3]],
                xi: s[4],
            },
            z_m: [s[5], s[6]],
            gains: AdaptiveGains {
                kz: [s[7], s[8]],
                kr: s[9],
            },
        }
    }
}

/// Signals at one evaluation of the loop.
#[derive(Debug, Clone, Copy)]
struct LoopSignals {
    u_bl: f64,
    u_ad: f64,
    u: f64,
    e_norm: f64,
    v_proxy: f64,
}

struct ClosedLoop<'a> {
    plant: PlantModel,
    bd: &'a BaselineDesign,
    md: &'a MracDesign,
    mrac: bool,
}

impl ClosedLoop<'_> {
    /// Derivative of the packed state for held reference `r` and noise.
    fn eval(&self, s: &[f64; STATE_LEN], r: f64, noise: [f64; 2]) -> ([f64; STATE_LEN], LoopSignals) {
        let st = SimState::unpack(s);
        let meas = PlantState::new(st.x.alpha + noise[0], st.x.q + noise[1]);
        let z = self.md.transform.apply(meas.alpha, meas.q);
        let e = [z[0] - st.z_m[0], z[1] - st.z_m[1]];

        let u_bl = baseline_control(self.bd, meas, &st.baseline, r);
        let u_ad = if self.mrac {
            adaptive_control(&st.gains, z, r)
        } else {
            0.0
        };
        let u_cmd = u_bl + u_ad;
        let limit = self.bd.u_limit;
        let u = u_cmd.clamp(-limit, limit);

        let dx = self.plant.deriv(st.x, u);
        let mut daux = baseline_aux_deriv(self.bd, meas, &st.baseline, r);
        if u_cmd.abs() > limit {
            daux.xi = 0.0;
        }
        let dzm = self.md.reference_deriv(st.z_m, r);
        let dg = if self.mrac {
            update_derivs(self.md, &st.gains, e, z, r)
        } else {
            AdaptiveGains::ZERO
        };
        let deriv = SimState {
            x: dx,
            baseline: daux,
            z_m: dzm,
            gains: dg,
        }
        .pack();
        let signals = LoopSignals {
            u_bl,
            u_ad,
            u,
            e_norm: norm2(e),
            v_proxy: self.md.error_energy(e),
        };
        (deriv, signals)
    }
}

/// Measurement noise, one draw per integration step.
struct NoiseSource {
    rng: ChaCha8Rng,
    normal: Option<Normal<f64>>,
}

impl NoiseSource {
    fn new(std: f64, seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            normal: (std > 0.0).then(|| Normal::new(0.0, std).expect("std validated")),
        }
    }

    fn next(&mut self) -> [f64; 2] {
        match &self.normal {
            Some(n) => [n.sample(&mut self.rng), n.sample(&mut self.rng)],
            None => [0.0; 2],
        }
    }
}

/// Runs one scenario from the zero state.
pub fn run_scenario(sc: &Scenario, bd: &BaselineDesign, md: &MracDesign) -> Result<SimTrace> {
    run_scenario_from(sc, bd, md, SimState::default())
}

/// Runs one scenario from `init`.
///
/// Reference and measurement noise are held constant over each RK4 step.
/// Gains are clamped into the projection box after every step. Divergence
/// (non-finite state or any magnitude above [`DIVERGENCE_LIMIT`]) ends the
/// run early; the trace then holds every sample up to that point.
pub fn run_scenario_from(
    sc: &Scenario,
    bd: &BaselineDesign,
    md: &MracDesign,
    init: SimState,
) -> Result<SimTrace> {
    sc.validate()?;
    let lp = ClosedLoop {
        plant: sc.plant()?,
        bd,
        md,
        mrac: sc.mrac_enabled,
    };
    let n = sc.n_steps();
    let stride = sc.sample_stride;
    let mut noise = NoiseSource::new(sc.noise_std, sc.seed);
    let mut samples = Vec::with_capacity(n / stride + 1);
    let mut state = init.pack();
    let mut verdict = Verdict::Completed;

    for k in 0..=n {
        let t = k as f64 * sc.dt;
        let w = noise.next();
        // a step at τ takes effect from the integration step whose midpoint passes τ
        let r = reference_signal(&sc.ref_steps, t + 0.5 * sc.dt);
        let (_, sig) = lp.eval(&state, r, w);
        if k % stride == 0 {
            samples.push(Sample::new(t, r, &SimState::unpack(&state), sig.into_parts()));
        }
        if k == n {
            break;
        }
        let mut next = rk4_step(|_, s| lp.eval(s, r, w).0, t, &state, sc.dt);
        if sc.mrac_enabled {
            let g = SimState::unpack(&next).gains.clamped(md.kz_bound, md.kr_bound);
            next[7] = g.kz[0];
            next[8] = g.kz[1];
            next[9] = g.kr;
        }
        if next.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
            verdict = Verdict::Diverged((k + 1) as f64 * sc.dt);
            break;
        }
        state = next;
    }

    Ok(SimTrace {
        samples,
        verdict,
        ref_steps: sc.ref_steps.clone(),
        t_end: sc.t_end,
        sample_dt: sc.dt * stride as f64,
        eps: md.eps,
        final_state: SimState::unpack(&state),
    })
}

impl LoopSignals {
    fn into_parts(self) -> [f64; 5] {
        [self.u_bl, self.u_ad, self.u, self.e_norm, self.v_proxy]
    }
}
