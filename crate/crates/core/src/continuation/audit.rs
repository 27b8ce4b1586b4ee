use serde::Serialize;

use super::ode::{integrate, IntegrationStatus, OdeSystem, StepperConfig};
use crate::error::{Error, Result};
use crate::galerkin::{GalerkinState, GalerkinSystem};

/// The Galerkin system with one extra component accumulating the right side
/// of the energy balance, `q' = −ν‖∇v‖² − Σc g g + ⟨s, v⟩`. Along an exact
/// solution `½‖v(t)‖² − ½‖v(0)‖² − q(t) = 0`.
pub struct EnergyAugmented<'a> {
    pub sys: &'a GalerkinSystem,
}

impl OdeSystem for EnergyAugmented<'_> {
    fn dim(&self) -> usize {
        self.sys.dim() + 1
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.sys.dim();
        let g = &y[..n];
        let (dg, dq) = dy.split_at_mut(n);
        self.sys.rhs_into(t, g, dg)?;
        dq[0] = energy_rhs(self.sys, t, g).0;
        Ok(())
    }
}

/// `−ν‖∇v‖² − Σc_{mk} g_m g_k + ⟨s(t), v⟩` and the sum of term magnitudes.
fn energy_rhs(sys: &GalerkinSystem, t: f64, g: &[f64]) -> (f64, f64) {
    let visc = -sys.nu() * sys.enstrophy(g);
    let c = sys.beta_matrices().map(|b| b.c_form(t, g)).unwrap_or(0.0);
    let src: f64 = sys.source().eval(t, g.len()).iter().zip(g).map(|(a, b)| a * b).sum();
    (visc - c + src, visc.abs() + c.abs() + src.abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyAudit {
    /// Largest relative defect of the instantaneous balance, with the time
    /// derivative taken from the analytic right-hand side.
    pub max_instant_defect: f64,
    /// `max_t |½‖v(t)‖² − ½‖v(0)‖² − q(t)| / (t · scale)`, the integrated
    /// balance per unit time relative to the largest energy rate magnitude.
    pub integrated_defect_per_time: f64,
    /// `‖v‖₂` never increased between consecutive samples.
    pub monotone_nonincreasing: bool,
    /// `sup_t ‖v‖₂² + ∫₀ᵀ ‖∇v‖₂² dt` (trapezoid on the samples).
    pub energy_plus_dissipation: f64,
    pub samples: usize,
    pub status: IntegrationStatus,
}

/// Integrate the augmented system and audit the energy balance on the
/// sample times.
pub fn energy_audit(sys: &GalerkinSystem, stepper: &StepperConfig, times: &[f64]) -> Result<EnergyAudit> {
    let aug = EnergyAugmented { sys };
    let start = sys.initial_state();
    let mut y0 = start.g.clone();
    y0.push(0.0);
    let tr = integrate(&aug, &GalerkinState { g: y0, t: start.t }, stepper, times, None)?;
    let n = sys.dim();
    let e0 = 0.5 * sys.energy(&start.g);
    let mut inst = 0.0f64;
    let mut integ = 0.0f64;
    let mut rate_scale = 0.0f64;
    let mut mono = true;
    let mut prev = f64::INFINITY;
    let mut sup_e = 0.0f64;
    let mut dissip = 0.0;
    let mut last: Option<(f64, f64)> = None;
    let mut rows = Vec::new();
    for s in &tr.samples {
        let g = &s.g[..n];
        let f = sys.rhs(s.t, g)?;
        let (d, sc) = sys.energy_balance(s.t, g, &f);
        if sc > 0.0 {
            inst = inst.max(d / sc);
        }
        rate_scale = rate_scale.max(energy_rhs(sys, s.t, g).1);
        let e = sys.energy(g);
        if e.sqrt() > prev {
            mono = false;
        }
        prev = e.sqrt();
        sup_e = sup_e.max(e);
        let ens = sys.enstrophy(g);
        if let Some((t0, e0s)) = last {
            dissip += 0.5 * (s.t - t0) * (ens + e0s);
        }
        last = Some((s.t, ens));
        rows.push((s.t, 0.5 * e - e0 - s.g[n]));
    }
    for (t, r) in rows {
        if t > 0.0 && rate_scale > 0.0 {
            integ = integ.max(r.abs() / (t * rate_scale));
        }
    }
    Ok(EnergyAudit {
        max_instant_defect: inst,
        integrated_defect_per_time: integ,
        monotone_nonincreasing: mono,
        energy_plus_dissipation: sup_e + dissip,
        samples: tr.samples.len(),
        status: tr.status,
    })
}

/// `‖u(t)‖₂ ≤ ‖u₀‖₂ + ∫₀ᵗ ‖f‖₂ ds` at every sample.
#[derive(Clone, Debug, Serialize)]
pub struct AprioriBound {
    pub u0_norm: f64,
    pub holds: bool,
    /// `min_t (bound(t) − ‖u(t)‖₂)`.
    pub min_margin: f64,
}

/// Check the a-priori L² bound on direct-run samples. `u0_norm` is the norm
/// of the untruncated data; the forcing integral uses 8-point Gauss-Legendre
/// on each sample interval.
pub fn apriori_l2_bound(sys: &GalerkinSystem, samples: &[GalerkinState], u0_norm: f64) -> AprioriBound {
    const X: [f64; 4] = [0.183434642495649_8, 0.525_532_409_916_329, 0.796666477413626_7, 0.960289856497536_3];
    const W: [f64; 4] = [0.362_683_783_378_362, 0.313706645877887_3, 0.222381034453374_5, 0.101228536290376_3];
    let torus = *sys.basis().torus();
    let fnorm = |t: f64| sys.forcing().l2_norm(&torus, t);
    let mut integral = 0.0;
    let mut min_margin = f64::INFINITY;
    let mut prev_t = samples.first().map(|s| s.t).unwrap_or(0.0);
    for s in samples {
        let (a, b) = (prev_t, s.t);
        if b > a && !sys.forcing().is_zero() {
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for i in 0..4 {
                integral += h * W[i] * (fnorm(c - h * X[i]) + fnorm(c + h * X[i]));
            }
        }
        prev_t = b;
        let margin = u0_norm + integral - sys.energy(&s.g).sqrt();
        min_margin = min_margin.min(margin);
    }
    // At t = 0 the margin is zero up to the rounding of two norm evaluations.
    let slack = 1e-12 * (u0_norm + integral);
    AprioriBound {
        u0_norm,
        holds: min_margin >= -slack,
        min_margin,
    }
}

/// Empirical constant of `d/dt‖v‖² + ν‖∇v‖² ≤ ĉ₄(‖v‖² + 1)`, fitted on the
/// even-indexed samples and re-verified on the odd ones.
#[derive(Clone, Debug, Serialize)]
pub struct GronwallCertificate {
    pub c4_fit: f64,
    /// `ĉ₄` after the safety factor.
    pub c4: f64,
    pub held_out: usize,
    pub holds_on_held_out: bool,
    pub worst_held_out_ratio: f64,
}

pub fn gronwall_certificate(sys: &GalerkinSystem, samples: &[GalerkinState], safety: f64) -> Result<GronwallCertificate> {
    if samples.len() < 4 {
        return Err(Error::InsufficientSamples {
            needed: 4,
            got: samples.len(),
        });
    }
    let mut ratios = Vec::with_capacity(samples.len());
    for s in samples {
        let f = sys.rhs(s.t, &s.g)?;
        let rate = 2.0 * s.g.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>();
        let lhs = rate + sys.nu() * sys.enstrophy(&s.g);
        ratios.push(lhs / (sys.energy(&s.g) + 1.0));
    }
    let fit = ratios.iter().step_by(2).copied().fold(0.0f64, f64::max);
    let c4 = safety * fit;
    let held: Vec<f64> = ratios.iter().skip(1).step_by(2).copied().collect();
    let worst = held.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(GronwallCertificate {
        c4_fit: fit,
        c4,
        held_out: held.len(),
        holds_on_held_out: worst <= c4,
        worst_held_out_ratio: worst,
    })
}

/// Result of comparing a run with a perturbed copy.
#[derive(Clone, Debug, Serialize)]
pub struct TwinReport {
    pub delta: f64,
    pub times: Vec<f64>,
    pub w_norms: Vec<f64>,
    /// Least-squares rate of `ln(‖w(t)‖/‖w(0)‖)` against `t`.
    pub c_fit: f64,
    /// Smallest rate with `‖w(t)‖ ≤ ‖w(0)‖ e^{ĉt}` at every sample.
    pub c_hat: f64,
    pub sup_w: f64,
    /// The bound with the least-squares rate holds at every sample, up to
    /// a relative slack of `1e-9`.
    pub fit_bound_holds: bool,
}

/// Run the system from its initial state and from the same state with
/// `delta` added to coefficient `mode`, and measure `‖w(t)‖₂ = ‖g₁ − g₂‖`.
pub fn twin_run_divergence(
    sys: &GalerkinSystem,
    delta: f64,
    mode: usize,
    stepper: &StepperConfig,
    times: &[f64],
) -> Result<TwinReport> {
    if mode >= sys.dim() {
        return Err(Error::InvalidArgument(format!("mode {mode} outside the basis")));
    }
    let a = sys.initial_state();
    let mut b = a.clone();
    b.g[mode] += delta;
    let (ra, rb) = rayon::join(
        || integrate(sys, &a, stepper, times, None),
        || integrate(sys, &b, stepper, times, None),
    );
    let (ra, rb) = (ra?, rb?);
    if !ra.status.is_completed() || !rb.status.is_completed() {
        return Err(Error::InvalidArgument("twin runs did not reach the horizon".into()));
    }
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for (x, y) in ra.samples.iter().zip(&rb.samples) {
        ts.push(x.t);
        ws.push(x.g.iter().zip(&y.g).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt());
    }
    let w0 = ws[0];
    let t0 = ts[0];
    let (mut num, mut den, mut c_hat) = (0.0, 0.0, f64::NEG_INFINITY);
    if w0 > 0.0 {
        for (t, w) in ts.iter().zip(&ws).skip(1) {
            let dt = t - t0;
            let l = (w / w0).ln();
            num += dt * l;
            den += dt * dt;
            c_hat = c_hat.max(l / dt);
        }
    }
    let c_fit = if den > 0.0 { num / den } else { 0.0 };
    if !c_hat.is_finite() {
        c_hat = 0.0;
    }
    let fit_bound_holds = ts
        .iter()
        .zip(&ws)
        .all(|(t, w)| *w <= w0 * (c_fit * (t - t0)).exp() * (1.0 + 1e-9));
    Ok(TwinReport {
        delta,
        sup_w: ws.iter().copied().fold(0.0, f64::max),
        times: ts,
        w_norms: ws,
        c_fit,
        c_hat,
        fit_bound_holds,
    })
}
