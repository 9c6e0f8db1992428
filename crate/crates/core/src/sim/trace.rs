use std::fmt;
use std::io::{self, Write};

use super::{RefStep, SimState};
use crate::fmt::g9;

/// Trace CSV column row.
pub const TRACE_COLUMNS: &str = "t,r,alpha,q,alpha_m,u_bl,u_ad,u,e_norm,Kz1,Kz2,Kr,V_proxy";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Completed,
    /// Diverged at the given time (s).
    Diverged(f64),
}

impl Verdict {
    pub fn is_completed(&self) -> bool {
        matches!(self, Verdict::Completed)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Completed => f.write_str("completed"),
            Verdict::Diverged(t) => write!(f, "diverged@{}", g9(*t)),
        }
    }
}

/// One recorded sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub r: f64,
    pub alpha: f64,
    pub q: f64,
    pub alpha_m: f64,
    pub u_bl: f64,
    pub u_ad: f64,
    pub u: f64,
    pub e_norm: f64,
    pub kz1: f64,
    pub kz2: f64,
    pub kr: f64,
    /// `½·eᵀPe`.
    pub v_proxy: f64,
}

impl Sample {
    pub(super) fn new(t: f64, r: f64, s: &SimState, [u_bl, u_ad, u, e_norm, v_proxy]: [f64; 5]) -> Self {
        Self {
            t,
            r,
            alpha: s.x.alpha,
            q: s.x.q,
            alpha_m: s.z_m[0],
            u_bl,
            u_ad,
            u,
            e_norm,
            kz1: s.gains.kz[0],
            kz2: s.gains.kz[1],
            kr: s.gains.kr,
            v_proxy,
        }
    }

    pub fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.r,
            self.alpha,
            self.q,
            self.alpha_m,
            self.u_bl,
            self.u_ad,
            self.u,
            self.e_norm,
            self.kz1,
            self.kz2,
            self.kr,
            self.v_proxy,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub samples: Vec<Sample>,
    pub verdict: Verdict,
    pub ref_steps: Vec<RefStep>,
    pub t_end: f64,
    /// Time between recorded samples.
    pub sample_dt: f64,
    /// Dead-zone level of the design that produced the trace.
    pub eps: f64,
    /// State after the last accepted integration step.
    pub final_state: SimState,
}

/// Writes `# key = value` header lines, the column row, then one row per
/// sample with 9 significant digits.
pub fn write_trace_csv<W: Write>(trace: &SimTrace, header: &[(String, String)], mut w: W) -> io::Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k} = {v}")?;
    }
    writeln!(w, "# verdict = {}", trace.verdict)?;
    writeln!(w, "{TRACE_COLUMNS}")?;
    let mut line = String::with_capacity(160);
    for s in &trace.samples {
        line.clear();
        for (i, v) in s.values().iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&g9(*v));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}
