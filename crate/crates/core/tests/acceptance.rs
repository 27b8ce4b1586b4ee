//! Acceptance suite. Every criterion runs at its stated tolerance and
//! prints one PASS/FAIL line; the process fails if any criterion fails.

use std::path::Path;
use std::time::Instant;

use lerayflow::cli::{
    build_lift_for, build_system, cmd_lift_check, cmd_simulate, oracle_compare, presets, setup,
    system_options, DataSpec, LiftProjection, Preset, RunConfig,
};
use lerayflow::continuation::{
    apriori_l2_bound, energy_audit, integrate, run_ladder, uniform_times, LadderStatus, StepperConfig,
};
use lerayflow::exhaust::{run_exhaustion, ExhaustionPlan};
use lerayflow::galerkin::{
    q_residual, reconstruct_u, Formulation, GalerkinState, GalerkinSystem, PathChoice, SystemOptions,
};
use lerayflow::lift::{build_lift, check_theta_orthogonal, ForcingSpec, LiftOptions};
use lerayflow::spectral::{leray_project, nonlinear_grid_oracle, BasisSpec, TorusSpec};
use lerayflow::Result;

struct Outcome {
    pass: bool,
    detail: String,
    budget: Option<f64>,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome {
        pass,
        detail,
        budget: None,
    }
}

fn sci(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn preset_cfg(p: Preset) -> RunConfig {
    RunConfig {
        data: DataSpec::Preset(p),
        ..RunConfig::default()
    }
}

fn c1_taylor_green(dir: &Path) -> Result<Outcome> {
    let cfg = RunConfig {
        nu: 0.1,
        basis_radius: 4.0,
        horizon: 1.0,
        stepper: StepperConfig::adaptive(1e-8, 1e-10),
        output_dir: dir.join("c1"),
        ..preset_cfg(Preset::TaylorGreen)
    };
    let out = cmd_simulate(&cfg)?;
    let err = out.report["closed_form_relative_error"].as_f64().unwrap_or(f64::INFINITY);
    // The nonlinearity is a pure gradient.
    let torus = TorusSpec::two_pi(32)?;
    let tg = presets::taylor_green(&torus);
    let nl = nonlinear_grid_oracle(&tg, &tg)?;
    let proj = leray_project(&nl).l2_norm();
    Ok(Outcome {
        pass: err <= 1e-6 && proj <= 1e-10 * nl.l2_norm(),
        detail: format!("relative L2 error {err:.2e} (<= 1e-6), |P(u.grad u)| {proj:.1e} (<= 1e-10 rel)"),
        budget: Some(10.0),
    })
}

fn c2_skewness() -> Result<Outcome> {
    let torus = TorusSpec::two_pi(32)?;
    let basis = BasisSpec::ball(torus, 6.0)?;
    let sys = GalerkinSystem::direct(
        &basis,
        &lerayflow::spectral::SpectralField::zero(torus),
        &ForcingSpec::zero(),
        1.0,
        &SystemOptions {
            path: PathChoice::Tensor,
            tensor_limit: usize::MAX,
        },
    )?;
    let a = sys.tensor().expect("tensor path");
    let (skew, big) = a.skew_defect();
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let u = presets::random_in_basis(&basis, seed);
        let g = basis.project(&u)?;
        let (s, scale) = a.cubic_form(&g)?;
        worst = worst.max(s.abs() / scale);
    }
    Ok(Outcome {
        pass: skew <= 1e-13 * big && worst <= 1e-12,
        detail: format!(
            "n = {}, nnz = {}, skew defect {:.1e} (<= 1e-13 rel), worst cancellation {worst:.1e} (<= 1e-12)",
            basis.len(),
            a.nnz(),
            skew / big
        ),
        budget: Some(5.0),
    })
}

fn c3_residual_orthogonality() -> Result<Outcome> {
    let cfg = RunConfig {
        basis_pairs: Some(8),
        formulation: Formulation::Lifted,
        nu: 0.1,
        ..preset_cfg(Preset::Random8Mode)
    };
    let p = setup(&cfg)?;
    let sys = build_system(&cfg, &p)?;
    let times = uniform_times(0.0, 1.0, 20);
    let tr = integrate(&sys, &sys.initial_state(), &cfg.stepper, &times, None)?;
    let mut worst = 0.0f64;
    let mut min_q = f64::INFINITY;
    let mut count = 0;
    for s in tr.samples.iter().filter(|s| s.t > 0.0) {
        let f = sys.rhs(s.t, &s.g)?;
        let r = q_residual(&sys, s, &f, cfg.residual_mode_cap)?;
        worst = worst.max(r.orthogonality_defect);
        min_q = min_q.min(r.q_norm);
        count += 1;
    }
    Ok(outcome(
        count == 20 && worst <= 1e-10 && min_q > 0.0,
        format!("{count} times, max |<q,w_k>|/|q| {worst:.1e} (<= 1e-10), min |q| {min_q:.2e} (> 0)"),
    ))
}

fn c4_theta_orthogonality() -> Result<Outcome> {
    let torus = TorusSpec::two_pi(32)?;
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let u0 = presets::random_solenoidal(&torus, 6, 2, seed);
        let lift = build_lift(&u0, &ForcingSpec::zero(), 3, 0.2, &LiftOptions::default())?;
        let rep = check_theta_orthogonal(&lift, 2)?;
        if rep.is_degenerate() {
            return Ok(outcome(false, format!("seed {seed}: degenerate data")));
        }
        worst = worst.max(rep.max_ratio());
    }
    Ok(outcome(
        worst <= 1e-8,
        format!("J = 3, j <= 2, five seeds, max |P theta^(j)|/|theta^(j)| {worst:.1e} (<= 1e-8)"),
    ))
}

fn c5_flatness(dir: &Path) -> Result<Outcome> {
    let cfg = RunConfig {
        nu: 1.0,
        lift_order: 2,
        output_dir: dir.join("c5"),
        ..preset_cfg(Preset::SingleMode)
    };
    let out = cmd_lift_check(&cfg)?;
    let slope = out.report["flatness_slope"].as_f64().unwrap_or(f64::NAN);
    let defect = out.report["single_mode_theta_defect"].as_f64().unwrap_or(f64::INFINITY);
    Ok(outcome(
        slope >= 2.5 && defect <= 1e-10,
        format!("slope {slope:.4} (>= 2.5), theta closed-form defect {defect:.1e} (<= 1e-10)"),
    ))
}

fn c6_energy_identity() -> Result<Outcome> {
    let mut lines = Vec::new();
    let mut pass = true;
    for pr in Preset::ALL {
        let cfg = preset_cfg(pr);
        let p = setup(&cfg)?;
        let sys = build_system(&cfg, &p)?;
        let times = uniform_times(0.0, 1.0, 20);
        let audit = energy_audit(&sys, &cfg.stepper, &times)?;
        let tr = integrate(&sys, &sys.initial_state(), &cfg.stepper, &times, None)?;
        let bound = apriori_l2_bound(&sys, &tr.samples, p.u0.l2_norm());
        let ok = audit.status.is_completed()
            && audit.integrated_defect_per_time <= 1e-8
            && audit.monotone_nonincreasing
            && bound.holds;
        pass &= ok;
        lines.push(format!(
            "{} {:.1e}/{}/{:+.1e}",
            pr.name(),
            audit.integrated_defect_per_time,
            if audit.monotone_nonincreasing { "mono" } else { "NOT-mono" },
            bound.min_margin
        ));
    }
    Ok(outcome(
        pass,
        format!("identity residual per time (<= 1e-8)/monotone/bound margin: {}", lines.join(", ")),
    ))
}

fn c7_ladder() -> Result<Outcome> {
    let cfg = RunConfig {
        horizon: 5.0,
        ..preset_cfg(Preset::ClayClassSmall)
    };
    let p = setup(&cfg)?;
    let sys = build_system(&cfg, &p)?;
    let run = run_ladder(&sys, &cfg.stepper, &cfg.ladder_config())?;
    let log = &run.log;
    let ens: Vec<(f64, f64)> = run.samples.iter().map(|s| (s.t, sys.enstrophy(&s.g))).collect();
    // The transient is the pilot segment.
    let after: Vec<f64> = ens
        .iter()
        .filter(|(t, _)| *t >= cfg.horizon * cfg.ladder.pilot_fraction)
        .map(|e| e.1)
        .collect();
    let monotone = after.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let reached = log.status == LadderStatus::ReachedHorizon && (log.final_time - 5.0).abs() < 1e-12;
    let logged = log
        .rungs
        .iter()
        .all(|r| r.c3_scheduled.is_finite() && r.c3_realized.is_finite());
    Ok(Outcome {
        pass: reached && monotone && log.bounds_respected() && logged,
        detail: format!(
            "status {:?}, {} rung(s), c3 pilot {:.2e}, initial enstrophy {:.2e}, monotone {monotone}, bounds respected {}",
            log.status,
            log.rungs.len(),
            log.c3_pilot,
            ens[0].1,
            log.bounds_respected()
        ),
        budget: Some(60.0),
    })
}

fn c8_oracle() -> Result<Outcome> {
    let torus = TorusSpec::two_pi(32)?;
    let mut worst = 0.0f64;
    let mut most = 0;
    for seed in 0..50u64 {
        let pairs = 1 + (seed as usize % 10);
        let u = presets::random_solenoidal(&torus, pairs, 3, 1000 + seed);
        let rep = oracle_compare(&u)?;
        most = most.max(rep.modes_in_field);
        worst = worst.max(rep.max_defect);
    }
    Ok(outcome(
        worst <= 1e-9 && most <= 20,
        format!("50 fields, up to {most} modes, max per-mode defect {worst:.1e} (<= 1e-9)"),
    ))
}

fn lift_vs_direct(preset: Preset) -> Result<f64> {
    let base = RunConfig {
        lift_projection: LiftProjection::Galerkin,
        ..preset_cfg(preset)
    };
    let p = setup(&base)?;
    let direct = GalerkinSystem::direct(&p.basis, &p.u0, &base.forcing, base.nu, &system_options(&base))?;
    let lift = build_lift_for(&base, &p, LiftProjection::Galerkin)?;
    let lifted = GalerkinSystem::lifted(&p.basis, &lift, &system_options(&base))?;
    let times = uniform_times(0.0, 1.0, 10);
    let a = integrate(&direct, &direct.initial_state(), &base.stepper, &times, None)?;
    let b = integrate(&lifted, &lifted.initial_state(), &base.stepper, &times, None)?;
    let mut worst = 0.0f64;
    for (x, y) in a.samples.iter().zip(&b.samples) {
        let ud = p.basis.to_field(&x.g)?;
        let ul = reconstruct_u(&GalerkinState { g: y.g.clone(), t: y.t }, &p.basis, Some(&lift))?;
        worst = worst.max(ul.sub(&ud)?.l2_norm() / ud.l2_norm());
    }
    Ok(worst)
}

fn c9_lift_direct() -> Result<Outcome> {
    let tol = 10.0 * StepperConfig::default().rtol;
    let tg = lift_vs_direct(Preset::TaylorGreen)?;
    let r8 = lift_vs_direct(Preset::Random8Mode)?;
    Ok(outcome(
        tg <= tol && r8 <= tol,
        format!("max relative |u_lift - u_direct| on [0,1]: taylor-green {tg:.1e}, random-8-mode {r8:.1e} (<= {tol:.0e})"),
    ))
}

fn c10_exhaustion() -> Result<Outcome> {
    let plan = ExhaustionPlan::default();
    let rep = run_exhaustion(&plan, &StepperConfig::default())?;
    let support = plan.profile.support_radius();
    let invariant = rep
        .data_d
        .iter()
        .enumerate()
        .filter(|(n, _)| plan.radii[*n] > 2.0 * support)
        .all(|(_, &d)| d <= 1e-8);
    let decreasing = rep.strictly_decreasing();
    Ok(Outcome {
        pass: decreasing && invariant && !rep.partial,
        detail: format!(
            "radii {:?}, d_n [{}] strictly decreasing {decreasing}, data differences [{}] (<= 1e-8)",
            plan.radii,
            sci(&rep.d),
            sci(&rep.data_d)
        ),
        budget: Some(120.0),
    })
}

fn c11_determinism(dir: &Path) -> Result<Outcome> {
    let mut pass = true;
    let mut names = Vec::new();
    for pr in Preset::ALL {
        let cfg = RunConfig {
            horizon: 0.2,
            stepper: StepperConfig::fixed(1e-2),
            output_dir: dir.join(format!("c11-{}", pr.name())),
            ..preset_cfg(pr)
        };
        let ckpt = cfg.output_dir.join("checkpoint.json");
        cmd_simulate(&cfg)?;
        let first = std::fs::read(&ckpt)?;
        cmd_simulate(&cfg)?;
        let second = std::fs::read(&ckpt)?;
        let same = first == second;
        pass &= same;
        names.push(format!("{} {}", pr.name(), if same { "identical" } else { "DIFFERENT" }));
    }
    Ok(outcome(pass, names.join(", ")))
}

type Criterion<'a> = (&'a str, Box<dyn Fn() -> Result<Outcome> + 'a>);

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();
    let criteria: Vec<Criterion> = vec![
        ("taylor-green closed form", Box::new(|| c1_taylor_green(dir))),
        ("trilinear skewness and cancellation", Box::new(c2_skewness)),
        ("residual orthogonality", Box::new(c3_residual_orthogonality)),
        ("theta initial orthogonality", Box::new(c4_theta_orthogonality)),
        ("flatness of the lifted unknown", Box::new(|| c5_flatness(dir))),
        ("energy identity and L2 bound", Box::new(c6_energy_identity)),
        ("extension controller", Box::new(c7_ladder)),
        ("oracle equivalence", Box::new(c8_oracle)),
        ("lift/direct equivalence", Box::new(c9_lift_direct)),
        ("exhaustion stabilization", Box::new(c10_exhaustion)),
        ("fixed-step determinism", Box::new(|| c11_determinism(dir))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = run();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match res {
            Ok(o) => {
                let in_time = o.budget.is_none_or(|b| secs <= b);
                let budget = o.budget.map(|b| format!(" (budget {b:.0} s)")).unwrap_or_default();
                (o.pass && in_time, format!("{}; {secs:.1} s{budget}", o.detail))
            }
            Err(e) => (false, format!("error: {e}; {secs:.1} s")),
        };
        if !pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
