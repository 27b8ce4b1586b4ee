use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::commands::{build_lift_for, flatness_slope, oracle_compare, setup, system_options};
use super::config::{LiftProjection, RunConfig};
use super::presets::random_solenoidal;
use crate::continuation::{energy_audit, uniform_times};
use crate::error::Result;
use crate::exhaust::CutoffSpec;
use crate::galerkin::{GalerkinSystem, TrilinearTensor};
use crate::lift::check_theta_orthogonal;
use crate::spectral::{gn_constant_probe, leray_project, random_band_limited, BasisSpec};
use crate::FORMAT_VERSION;

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: &'static str,
    pub pass: bool,
    /// The check had nothing to measure, e.g. zero data.
    pub degenerate: bool,
    pub defect: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub format_version: u32,
    pub config_hash: String,
    pub basis_hash: String,
    /// Fixed order, so reports diff cleanly.
    pub checks: Vec<CheckEntry>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn entry(name: &'static str, defect: f64, tolerance: f64, degenerate: bool) -> CheckEntry {
    CheckEntry {
        name,
        pass: degenerate || defect <= tolerance,
        degenerate,
        defect,
        tolerance,
    }
}

/// Largest violation of `1_{|x|≤r/2} ≤ η_r ≤ 1_{|x|≤3r/4}` and of the
/// monotone derivative bounds over `r ∈ {2, 4, 8}`.
pub fn cutoff_sandwich_defect() -> Result<f64> {
    let mut worst = 0.0f64;
    let mut prev: Option<[f64; 5]> = None;
    for r in [2.0, 4.0, 8.0] {
        let c = CutoffSpec::new(r)?;
        for i in 0..=800 {
            let s = r * i as f64 / 800.0;
            let x = [s / 3f64.sqrt(); 3];
            let e = c.eval(x);
            let lo = if s <= 0.5 * r { 1.0 } else { 0.0 };
            let hi = if s <= 0.75 * r { 1.0 } else { 0.0 };
            worst = worst.max(lo - e).max(e - hi);
        }
        let sups = c.derivative_sups(40).sups;
        if let Some(p) = prev {
            for k in 0..5 {
                worst = worst.max(sups[k] - p[k] * (1.0 + 1e-9));
            }
        }
        prev = Some(sups);
    }
    Ok(worst.max(0.0))
}

pub fn run_verify(cfg: &RunConfig) -> Result<VerifyReport> {
    let p = setup(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();
    let zero_data = p.u0.l2_norm() == 0.0 && cfg.forcing.is_zero();

    // Leray projector.
    let f = random_band_limited(&p.torus, 20, 3, &mut rng);
    let pf = leray_project(&f);
    let ppf = leray_project(&pf);
    let idem = ppf.sub(&pf)?.l2_norm() / pf.l2_norm().max(f64::MIN_POSITIVE);
    checks.push(entry("projector_idempotence", idem.max(pf.divergence_ratio()), 1e-13, false));

    // Tensor identities on the run's basis, or a small ball when the basis
    // is too large to assemble.
    let tbasis = if p.basis.len() <= cfg.tensor_limit {
        p.basis.clone()
    } else {
        BasisSpec::ball(p.torus, 3.0)?
    };
    let mut tensor = TrilinearTensor::assemble(&tbasis);
    if cfg.verify.corrupt_tensor && tensor.nnz() > 0 {
        let (_, scale) = tensor.skew_defect();
        tensor.perturb_entry(0, 1e-3 * scale.max(1.0));
    }
    let (skew, scale) = tensor.skew_defect();
    checks.push(entry("tensor_skewness", skew / scale.max(f64::MIN_POSITIVE), 1e-13, tensor.nnz() == 0));
    let mut cancel = 0.0f64;
    for _ in 0..100 {
        let g: Vec<f64> = (0..tbasis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (s, sc) = tensor.cubic_form(&g)?;
        if sc > 0.0 {
            cancel = cancel.max(s.abs() / sc);
        }
    }
    checks.push(entry("trilinear_cancellation", cancel, 1e-12, tensor.nnz() == 0));

    // Spectral convolution against the grid oracle.
    let u = random_solenoidal(&p.torus.with_grid(16)?, cfg.verify.oracle_modes, 2, cfg.seed);
    let o = oracle_compare(&u)?;
    checks.push(entry("oracle_vs_convolution", o.max_defect / o.scale.max(1.0), 1e-9, false));

    // θ orthogonality and flatness of the Leray lift.
    let lift = build_lift_for(cfg, &p, LiftProjection::Leray)?;
    let orth = check_theta_orthogonal(&lift, cfg.lift_order - 1)?;
    checks.push(entry("theta_orthogonality", orth.max_ratio(), 1e-8, orth.is_degenerate()));
    let lsys = GalerkinSystem::lifted(&p.basis, &lift, &system_options(cfg))?;
    let slope = flatness_slope(&lsys)?;
    let target = cfg.lift_order as f64 + 0.5;
    checks.push(entry(
        "flatness_slope",
        slope.map_or(0.0, |s| (target - s).max(0.0)),
        0.0,
        slope.is_none(),
    ));

    // Energy identity along a direct run.
    let dsys = GalerkinSystem::direct(&p.basis, &p.u0, &cfg.forcing, cfg.nu, &system_options(cfg))?;
    let audit = energy_audit(&dsys, &cfg.stepper, &uniform_times(0.0, cfg.horizon.min(1.0), 20))?;
    checks.push(entry(
        "energy_identity",
        audit.integrated_defect_per_time,
        1e-8,
        zero_data,
    ));

    let gn = gn_constant_probe(&p.torus, cfg.verify.gn_samples.max(10), 4, cfg.seed)?;
    checks.push(entry("gn_probe", gn.max_violation.max(0.0), 0.0, false));

    checks.push(entry("cutoff_sandwich", cutoff_sandwich_defect()?, 0.0, false));

    Ok(VerifyReport {
        format_version: FORMAT_VERSION,
        config_hash: cfg.hash(),
        basis_hash: p.basis.hash(),
        checks,
    })
}
