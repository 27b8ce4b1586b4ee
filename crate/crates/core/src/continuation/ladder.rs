use serde::{Deserialize, Serialize};

use super::ode::{integrate, uniform_times, IntegrationStatus, StepperConfig, Trajectory};
use crate::error::{Error, Result};
use crate::galerkin::{GalerkinState, GalerkinSystem};

/// Enstrophy `E = Σλg²`, its analytic rate `dE/dt = 2Σλ g ℱ(g,t)` and
/// `D = Σλ²g²` at one sample.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnstrophySample {
    pub t: f64,
    pub enstrophy: f64,
    pub rate: f64,
    pub palinstrophy: f64,
}

pub fn enstrophy_sample(sys: &GalerkinSystem, s: &GalerkinState) -> Result<EnstrophySample> {
    let f = sys.rhs(s.t, &s.g)?;
    let lam = sys.eigenvalues();
    let rate = 2.0 * (0..f.len()).map(|k| lam[k] * s.g[k] * f[k]).sum::<f64>();
    Ok(EnstrophySample {
        t: s.t,
        enstrophy: sys.enstrophy(&s.g),
        rate,
        palinstrophy: sys.palinstrophy(&s.g),
    })
}

/// `max_t max(0, dE/dt + νD) / (E³ + 1)` over the samples.
pub fn estimate_c3(sys: &GalerkinSystem, samples: &[GalerkinState]) -> Result<f64> {
    if samples.len() < 10 {
        return Err(Error::InsufficientSamples {
            needed: 10,
            got: samples.len(),
        });
    }
    let mut c3 = 0.0f64;
    for s in samples {
        let e = enstrophy_sample(sys, s)?;
        if !e.enstrophy.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite enstrophy at t = {}", s.t)));
        }
        let lhs = e.rate + sys.nu() * e.palinstrophy;
        c3 = c3.max(lhs.max(0.0) / (e.enstrophy.powi(3) + 1.0));
    }
    Ok(c3)
}

/// Next horizon and the enstrophy bound guaranteed up to it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extension {
    pub next: f64,
    pub bound: f64,
}

/// `T⁺ = min(T + (4c₃)⁻¹(M+1)⁻², T_global)`, guaranteeing
/// `sup ‖∇v‖² ≤ √2(M+1)` on `[T, T⁺]`. With `c₃ ≤ 0` the whole horizon is
/// granted.
pub fn extend_horizon(t: f64, m: f64, c3: f64, t_global: f64) -> Extension {
    let bound = std::f64::consts::SQRT_2 * (m + 1.0);
    if !(c3 > 0.0) {
        return Extension { next: t_global, bound };
    }
    let inc = 1.0 / (4.0 * c3 * (m + 1.0).powi(2));
    Extension {
        next: (t + inc).min(t_global),
        bound,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderConfig {
    pub horizon: f64,
    pub blowup_threshold: f64,
    /// Multiplier applied to measured `c₃` before scheduling a rung.
    pub safety: f64,
    pub samples_per_rung: usize,
    /// Length of the measurement segment that schedules the first rung,
    /// as a fraction of the horizon.
    pub pilot_fraction: f64,
    pub max_rungs: usize,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            blowup_threshold: 1e6,
            safety: 2.0,
            samples_per_rung: 20,
            pilot_fraction: 0.01,
            max_rungs: 10_000,
        }
    }
}

impl LadderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("horizon", "must be positive"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::config("blowup_threshold", "must be positive"));
        }
        if !(self.safety >= 1.0) {
            return Err(Error::config("ladder.safety", "must be at least 1"));
        }
        if self.samples_per_rung < 10 {
            return Err(Error::config("ladder.samples_per_rung", "must be at least 10"));
        }
        if !(self.pilot_fraction > 0.0 && self.pilot_fraction <= 1.0) {
            return Err(Error::config("ladder.pilot_fraction", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// One step `[T_m, T_{m+1}]` of the ladder.
#[derive(Clone, Debug, Serialize)]
pub struct Rung {
    pub t_start: f64,
    pub t_end: f64,
    /// Enstrophy at `T_m`.
    pub m_start: f64,
    pub c3_scheduled: f64,
    pub c3_realized: f64,
    pub sup_enstrophy: f64,
    pub guaranteed_bound: f64,
    /// The guarantee applies only when the realized `c₃` does not exceed the
    /// scheduled one.
    pub bound_applicable: bool,
    pub bound_respected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LadderStatus {
    ReachedHorizon,
    BlowUp { t_max: f64 },
    StepUnderflow { t: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupReport {
    pub threshold: f64,
    pub last_finite_time: f64,
    /// `(t, enstrophy)` for the last recorded samples.
    pub enstrophy_tail: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationLog {
    pub horizon: f64,
    pub c3_pilot: f64,
    pub rungs: Vec<Rung>,
    pub status: LadderStatus,
    pub final_time: f64,
    pub blowup: Option<BlowupReport>,
}

impl ContinuationLog {
    /// True when every applicable rung bound held.
    pub fn bounds_respected(&self) -> bool {
        self.rungs.iter().all(|r| !r.bound_applicable || r.bound_respected)
    }

    /// Rungs where the realized `c₃` exceeded the scheduled value.
    pub fn flagged_rungs(&self) -> Vec<usize> {
        self.rungs
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.bound_applicable)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Log together with every recorded sample, in time order.
#[derive(Clone, Debug)]
pub struct LadderRun {
    pub log: ContinuationLog,
    pub samples: Vec<GalerkinState>,
}

fn tail(sys: &GalerkinSystem, samples: &[GalerkinState]) -> Vec<(f64, f64)> {
    let k = samples.len().saturating_sub(10);
    samples[k..]
        .iter()
        .map(|s| (s.t, sys.enstrophy(&s.g)))
        .collect()
}

fn run_segment(
    sys: &GalerkinSystem,
    from: &GalerkinState,
    to: f64,
    n: usize,
    stepper: &StepperConfig,
    threshold: f64,
) -> Result<Trajectory> {
    let mut mon = |_t: f64, g: &[f64]| sys.enstrophy(g) <= threshold;
    integrate(sys, from, stepper, &uniform_times(from.t, to, n), Some(&mut mon))
}

/// Alternate integration, measurement and horizon extension until the
/// horizon, the blow-up threshold or a step underflow is reached.
pub fn run_ladder(sys: &GalerkinSystem, stepper: &StepperConfig, cfg: &LadderConfig) -> Result<LadderRun> {
    cfg.validate()?;
    stepper.validate()?;
    let start = sys.initial_state();
    let mut samples = vec![start.clone()];
    let finish = |t: f64, samples: &[GalerkinState], rungs: Vec<Rung>, c3_pilot: f64, status: LadderStatus| {
        let blow = matches!(status, LadderStatus::BlowUp { .. });
        ContinuationLog {
            horizon: cfg.horizon,
            c3_pilot,
            rungs,
            final_time: t,
            blowup: blow.then(|| BlowupReport {
                threshold: cfg.blowup_threshold,
                last_finite_time: samples
                    .iter()
                    .rev()
                    .find(|s| s.g.iter().all(|x| x.is_finite()))
                    .map(|s| s.t)
                    .unwrap_or(0.0),
                enstrophy_tail: tail(sys, samples),
            }),
            status,
        }
    };
    let terminal = |st: &IntegrationStatus, t: f64| -> Option<LadderStatus> {
        match st {
            IntegrationStatus::Completed => None,
            IntegrationStatus::StepUnderflow { t, .. } => Some(LadderStatus::StepUnderflow { t: *t }),
            IntegrationStatus::NonFinite { t } | IntegrationStatus::Stopped { t } => {
                Some(LadderStatus::BlowUp { t_max: *t })
            }
        }
        .or_else(|| (!t.is_finite()).then_some(LadderStatus::BlowUp { t_max: t }))
    };

    // Pilot measurement of c₃ on a short initial segment.
    let pilot_end = cfg.horizon * cfg.pilot_fraction;
    let pilot = run_segment(sys, &start, pilot_end, 10, stepper, cfg.blowup_threshold)?;
    if let Some(st) = terminal(&pilot.status, pilot.final_state.t) {
        samples.extend(pilot.samples.into_iter().skip(1));
        let t = samples.last().map(|s| s.t).unwrap_or(0.0);
        return Ok(LadderRun {
            log: finish(t, &samples, Vec::new(), f64::NAN, st),
            samples,
        });
    }
    let c3_pilot = estimate_c3(sys, &pilot.samples)?;

    let mut state = start;
    let mut c3_measured = c3_pilot;
    let mut rungs = Vec::new();
    while state.t < cfg.horizon && rungs.len() < cfg.max_rungs {
        let m = sys.enstrophy(&state.g);
        let c3_sched = cfg.safety * c3_measured;
        let ext = extend_horizon(state.t, m, c3_sched, cfg.horizon);
        if ext.next - state.t < stepper.min_step {
            let t = state.t;
            return Ok(LadderRun {
                log: finish(t, &samples, rungs, c3_pilot, LadderStatus::StepUnderflow { t }),
                samples,
            });
        }
        let tr = run_segment(sys, &state, ext.next, cfg.samples_per_rung, stepper, cfg.blowup_threshold)?;
        let seg = &tr.samples;
        let sup = seg
            .iter()
            .map(|s| sys.enstrophy(&s.g))
            .fold(0.0f64, f64::max);
        samples.extend(seg.iter().skip(1).cloned());
        if let Some(st) = terminal(&tr.status, tr.final_state.t) {
            let t = samples.last().map(|s| s.t).unwrap_or(state.t);
            return Ok(LadderRun {
                log: finish(t, &samples, rungs, c3_pilot, st),
                samples,
            });
        }
        let c3_real = estimate_c3(sys, seg)?;
        let applicable = c3_real <= c3_sched;
        rungs.push(Rung {
            t_start: state.t,
            t_end: ext.next,
            m_start: m,
            c3_scheduled: c3_sched,
            c3_realized: c3_real,
            sup_enstrophy: sup,
            guaranteed_bound: ext.bound,
            bound_applicable: applicable,
            bound_respected: sup <= ext.bound,
        });
        c3_measured = c3_measured.max(c3_real);
        state = tr.final_state;
    }
    let status = if state.t >= cfg.horizon {
        LadderStatus::ReachedHorizon
    } else {
        LadderStatus::StepUnderflow { t: state.t }
    };
    let t = state.t;
    Ok(LadderRun {
        log: finish(t, &samples, rungs, c3_pilot, status),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_rule_examples() {
        let e = extend_horizon(0.0, 0.0, 0.25, 10.0);
        assert_eq!(e.next, 1.0);
        assert_eq!(e.bound, std::f64::consts::SQRT_2);
        let e = extend_horizon(3.0, 1e12, 1.0, 10.0);
        assert!(e.next - 3.0 < 1e-20);
        assert_eq!(extend_horizon(9.5, 0.0, 0.25, 10.0).next, 10.0);
        assert_eq!(extend_horizon(2.0, 5.0, 0.0, 10.0).next, 10.0);
    }
}
