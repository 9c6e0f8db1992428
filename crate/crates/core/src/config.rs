//! Run configuration: defaults, overlaid by an optional flat `key = value`
//! file, overlaid by command-line `--set` overrides.
//!
//! ```text
//! # aft c.g., baseline only
//! plant.mu = 1
//! mrac.enabled = off
//! scenario.steps = 1:0.1; 6:0; 11:0.15
//! ```

use std::path::Path;

use crate::baseline::{design_baseline_auto, BaselineDesign, LqWeights};
use crate::error::{Error, Result};
use crate::fmt::g9;
use crate::mrac::{build_mrac_default, MracDesign, MracTuning};
use crate::plant::PlantModel;
use crate::sim::{RefStep, Scenario, DEFAULT_DT, DEFAULT_STEPS, DEFAULT_STRIDE, DEFAULT_T_END};

/// Every accepted key, in echo order.
pub const KEYS: [&str; 20] = [
    "plant.mu",
    "baseline.qw_alpha",
    "baseline.qw_q",
    "baseline.rw",
    "baseline.ki",
    "baseline.u_limit",
    "mrac.enabled",
    "mrac.gamma_z",
    "mrac.gamma_r",
    "mrac.eps",
    "mrac.kz_bound",
    "mrac.kr_bound",
    "scenario.dt",
    "scenario.t_end",
    "scenario.steps",
    "scenario.ref_scale",
    "scenario.noise_std",
    "scenario.seed",
    "scenario.stride",
    // accepted alias, never echoed
    "scenario.mu",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mu: f64,
    pub weights: LqWeights,
    /// `None` selects the integral gain automatically.
    pub ki: Option<f64>,
    pub u_limit: f64,
    pub mrac_enabled: bool,
    pub tuning: MracTuning,
    pub dt: f64,
    pub t_end: f64,
    pub steps: Vec<RefStep>,
    /// Multiplies every step amplitude.
    pub ref_scale: f64,
    pub noise_std: f64,
    pub seed: u64,
    pub stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            weights: LqWeights::default(),
            ki: None,
            u_limit: f64::INFINITY,
            mrac_enabled: true,
            tuning: MracTuning::default(),
            dt: DEFAULT_DT,
            t_end: DEFAULT_T_END,
            steps: DEFAULT_STEPS.to_vec(),
            ref_scale: 1.0,
            noise_std: 0.0,
            seed: 0,
            stride: DEFAULT_STRIDE,
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| invalid(format!("{key}: expected a number, got {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(invalid(format!("{key}: expected true/false/on/off, got {v:?}"))),
    }
}

/// Parses `t:a; t:a; ...`; an empty string is no steps.
pub fn parse_steps(v: &str) -> Result<Vec<RefStep>> {
    v.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (t, a) = p
                .split_once(':')
                .ok_or_else(|| invalid(format!("scenario.steps: expected time:amplitude, got {p:?}")))?;
            Ok(RefStep::new(
                parse_f64("scenario.steps", t.trim())?,
                parse_f64("scenario.steps", a.trim())?,
            ))
        })
        .collect()
}

pub fn format_steps(steps: &[RefStep]) -> String {
    steps
        .iter()
        .map(|s| format!("{}:{}", g9(s.time), g9(s.amplitude)))
        .collect::<Vec<_>>()
        .join("; ")
}

impl RunConfig {
    /// Sets one key from its textual value. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let num = || parse_f64(key, v);
        match key {
            "plant.mu" | "scenario.mu" => self.mu = num()?,
            "baseline.qw_alpha" => self.weights.qw_alpha = num()?,
            "baseline.qw_q" => self.weights.qw_q = num()?,
            "baseline.rw" => self.weights.rw = num()?,
            "baseline.ki" => {
                self.ki = if v.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(num()?)
                }
            }
            "baseline.u_limit" => self.u_limit = num()?,
            "mrac.enabled" => self.mrac_enabled = parse_bool(key, v)?,
            "mrac.gamma_z" => self.tuning.gamma_z = num()?,
            "mrac.gamma_r" => self.tuning.gamma_r = num()?,
            "mrac.eps" => self.tuning.eps = num()?,
            "mrac.kz_bound" => self.tuning.kz_bound = num()?,
            "mrac.kr_bound" => self.tuning.kr_bound = num()?,
            "scenario.dt" => self.dt = num()?,
            "scenario.t_end" => self.t_end = num()?,
            "scenario.steps" => self.steps = parse_steps(v)?,
            "scenario.ref_scale" => self.ref_scale = num()?,
            "scenario.noise_std" => self.noise_std = num()?,
            "scenario.seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| invalid(format!("{key}: expected a non-negative integer, got {v:?}")))?
            }
            "scenario.stride" => {
                self.stride = v
                    .parse()
                    .map_err(|_| invalid(format!("{key}: expected a positive integer, got {v:?}")))?
            }
            _ => return Err(invalid(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| invalid(format!("override must be key=value, got {kv:?}")))?;
        self.set(k.trim(), v)
    }

    /// Applies every `key = value` line of a config text. `#` starts a
    /// comment; blank lines are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
            self.set(k.trim(), v)
                .map_err(|e| invalid(format!("line {}: {}", i + 1, e.to_string().trim_start_matches("invalid parameter: "))))?;
        }
        Ok(())
    }

    /// Defaults, then `path` if given, then `overrides` in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> std::result::Result<Self, LoadError> {
        let mut cfg = Self::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| LoadError::Io(format!("{}: {e}", p.display())))?;
            cfg.apply_text(&text)
                .map_err(|e| LoadError::Config(format!("{}: {e}", p.display())))?;
        }
        for kv in overrides {
            cfg.apply_override(kv).map_err(|e| LoadError::Config(e.to_string()))?;
        }
        Ok(cfg)
    }

    /// `(key, value)` pairs for every setting, in [`KEYS`] order; the
    /// values parse back to the same configuration.
    pub fn entries(&self) -> Vec<(String, String)> {
        let b = |x: bool| if x { "true" } else { "false" }.to_string();
        let ki = self.ki.map_or_else(|| "auto".to_string(), g9);
        let values = [
            g9(self.mu),
            g9(self.weights.qw_alpha),
            g9(self.weights.qw_q),
            g9(self.weights.rw),
            ki,
            g9(self.u_limit),
            b(self.mrac_enabled),
            g9(self.tuning.gamma_z),
            g9(self.tuning.gamma_r),
            g9(self.tuning.eps),
            g9(self.tuning.kz_bound),
            g9(self.tuning.kr_bound),
            g9(self.dt),
            g9(self.t_end),
            format_steps(&self.steps),
            g9(self.ref_scale),
            g9(self.noise_std),
            self.seed.to_string(),
            self.stride.to_string(),
        ];
        KEYS.iter().zip(values).map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            mu: self.mu,
            dt: self.dt,
            t_end: self.t_end,
            ref_steps: self.steps.clone(),
            noise_std: self.noise_std,
            seed: self.seed,
            mrac_enabled: self.mrac_enabled,
            sample_stride: self.stride,
            plant_override: None,
        }
        .scaled_reference(self.ref_scale)
    }

    /// Baseline and adaptive designs on the forward-c.g. model.
    pub fn designs(&self) -> Result<(BaselineDesign, MracDesign)> {
        if !(self.u_limit > 0.0) {
            return Err(invalid(format!("baseline.u_limit must be > 0, got {}", self.u_limit)));
        }
        let fwd = PlantModel::forward();
        let d = design_baseline_auto(&fwd.a, &fwd.b, &self.weights, self.ki)?.with_u_limit(self.u_limit);
        let m = build_mrac_default(&d, &self.tuning)?;
        Ok((d, m))
    }

    /// Checks every setting, as any run would, without running.
    pub fn validate(&self) -> Result<()> {
        if !self.ref_scale.is_finite() {
            return Err(invalid(format!("scenario.ref_scale must be finite, got {}", self.ref_scale)));
        }
        self.scenario().validate()?;
        self.designs().map(|_| ())
    }
}

/// Failure to assemble a configuration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoadError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Config(String),
}
