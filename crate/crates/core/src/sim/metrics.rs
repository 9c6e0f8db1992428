use super::{SimTrace, Verdict};
use crate::error::{Error, Result};
use crate::mrac::AdaptiveGains;

/// Settling band, fraction of the step target.
pub const SETTLING_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Settling {
    /// Time after the step at which `α` entered the band for good.
    Settled(f64),
    Unsettled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentMetrics {
    pub start: f64,
    pub end: f64,
    pub target: f64,
    /// `None` for zero-target segments.
    pub overshoot_pct: Option<f64>,
    /// `None` for zero-target segments.
    pub settling: Option<Settling>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub segments: Vec<SegmentMetrics>,
    /// `Σ (α − r)²·Δt` over the samples.
    pub ise: f64,
    pub final_gains: AdaptiveGains,
    pub max_e_norm: f64,
    pub verdict: Verdict,
}

impl Metrics {
    /// Overshoot of the last step segment, if it has a nonzero target.
    pub fn final_overshoot(&self) -> Option<f64> {
        self.segments.last().and_then(|s| s.overshoot_pct)
    }
}

/// Per-step overshoot and settling, ISE, and error/gain summaries.
///
/// Overshoot is measured past the target in the direction of travel from
/// the segment's initial `α`.
pub fn compute_metrics(tr: &SimTrace) -> Result<Metrics> {
    let last = tr.samples.last().ok_or(Error::EmptyTrace)?;
    let ise = tr.samples.iter().map(|s| (s.alpha - s.r).powi(2)).sum::<f64>() * tr.sample_dt;
    let max_e_norm = tr.samples.iter().map(|s| s.e_norm).fold(0.0, f64::max);

    let mut segments = Vec::with_capacity(tr.ref_steps.len());
    for (i, step) in tr.ref_steps.iter().enumerate() {
        let end = tr.ref_steps.get(i + 1).map_or(tr.t_end, |s| s.time);
        let seg: Vec<_> = tr
            .samples
            .iter()
            .filter(|s| s.t >= step.time && (s.t < end || (i + 1 == tr.ref_steps.len() && s.t <= end)))
            .collect();
        let target = step.amplitude;
        if target == 0.0 || seg.is_empty() {
            segments.push(SegmentMetrics {
                start: step.time,
                end,
                target,
                overshoot_pct: None,
                settling: None,
            });
            continue;
        }
        let from = seg[0].alpha;
        let dir = if target - from != 0.0 {
            (target - from).signum()
        } else {
            target.signum()
        };
        let beyond = seg
            .iter()
            .map(|s| dir * (s.alpha - target))
            .fold(f64::NEG_INFINITY, f64::max);
        let overshoot = beyond.max(0.0) / target.abs() * 100.0;

        let band = SETTLING_BAND * target.abs();
        let settling = match seg.iter().rposition(|s| (s.alpha - target).abs() > band) {
            None => Settling::Settled(0.0),
            Some(j) if j + 1 == seg.len() => Settling::Unsettled,
            Some(j) => Settling::Settled(seg[j + 1].t - step.time),
        };
        segments.push(SegmentMetrics {
            start: step.time,
            end,
            target,
            overshoot_pct: Some(overshoot),
            settling: Some(settling),
        });
    }

    Ok(Metrics {
        segments,
        ise,
        final_gains: AdaptiveGains {
            kz: [last.kz1, last.kz2],
            kr: last.kr,
        },
        max_e_norm,
        verdict: tr.verdict,
    })
}
