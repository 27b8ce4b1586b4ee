use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{DataSpec, LiftProjection, RunConfig};
use super::presets::{random_solenoidal, Preset};
use super::verify::run_verify;
use crate::continuation::{
    apriori_l2_bound, integrate, run_ladder, LadderStatus, StepMode, StepperConfig,
};
use crate::error::{Error, Result};
use crate::exhaust::{run_exhaustion, CutoffSpec};
use crate::galerkin::{
    advect, q_residual, reconstruct_u, Checkpoint, Formulation, GalerkinState, GalerkinSystem,
    SystemOptions,
};
use crate::lift::{build_lift, check_theta_orthogonal, factorial, LiftData, LiftOptions};
use crate::spectral::{
    enstrophy, field_from_json, grid_to_spectral, leray_project, nonlinear_grid_oracle, BasisSpec,
    RealGridField, SpectralField, TorusSpec,
};
use crate::FORMAT_VERSION;

/// How a command ended, mapped onto the process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    CheckFailure,
    /// Blow-up or step underflow.
    Terminal,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::CheckFailure => 1,
            Verdict::Terminal => 3,
        }
    }
}

/// Exit status for errors raised before or during a command.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub verdict: Verdict,
    pub report: Value,
    pub files: Vec<PathBuf>,
}

/// Torus, basis and initial data resolved from a config.
pub struct Problem {
    pub torus: TorusSpec,
    pub basis: BasisSpec,
    pub u0: SpectralField,
    pub preset: Option<Preset>,
}

pub fn setup(cfg: &RunConfig) -> Result<Problem> {
    let torus = TorusSpec::new(cfg.period, cfg.grid)?;
    let basis = match cfg.basis_pairs {
        Some(n) => BasisSpec::first_pairs(torus, n)?,
        None => BasisSpec::ball(torus, cfg.basis_radius)?,
    };
    let (u0, preset) = match &cfg.data {
        DataSpec::Preset(p) => (p.build(&basis, cfg.seed)?, Some(*p)),
        DataSpec::File(path) => {
            let s = std::fs::read_to_string(path)
                .map_err(|e| Error::config("data.file", format!("{}: {e}", path.display())))?;
            let f = field_from_json(&s).map_err(|e| Error::config("data.file", e.to_string()))?;
            if !f.torus().same_as(&torus) {
                return Err(Error::config("data.file", "field period differs from `period`"));
            }
            (SpectralField::from_half(torus, f.iter().map(|(k, c)| (*k, *c))), None)
        }
        DataSpec::Profile(p) => {
            p.validate()?;
            let l = torus.period();
            let cutoff = CutoffSpec::new(0.5 * l)
                .map_err(|_| Error::config("period", "profile data needs a period above 2"))?;
            let image = |x: f64| x - l * (x / l).round();
            let sampled = RealGridField::from_fn(torus, |x| {
                let y = [image(x[0]), image(x[1]), image(x[2])];
                let eta = cutoff.eval(y);
                let v = p.eval(y);
                [eta * v[0], eta * v[1], eta * v[2]]
            });
            (leray_project(&grid_to_spectral(&sampled).without_mean()).pruned(), None)
        }
    };
    if u0.has_nonzero_mean() {
        return Err(Error::config("data", "initial data must have zero mean"));
    }
    let div = u0.divergence_ratio();
    if div > 1e-10 {
        return Err(Error::config("data", format!("initial data is not solenoidal (ratio {div:.3e})")));
    }
    Ok(Problem {
        torus,
        basis,
        u0,
        preset,
    })
}

pub fn system_options(cfg: &RunConfig) -> SystemOptions {
    SystemOptions {
        path: cfg.path,
        tensor_limit: cfg.tensor_limit,
    }
}

pub fn build_lift_for(cfg: &RunConfig, p: &Problem, projection: LiftProjection) -> Result<LiftData> {
    let opts = LiftOptions {
        truncate_to: (projection == LiftProjection::Galerkin).then(|| p.basis.clone()),
        mode_cap: cfg.residual_mode_cap,
    };
    build_lift(&p.u0, &cfg.forcing, cfg.lift_order, cfg.nu, &opts)
}

pub fn build_system(cfg: &RunConfig, p: &Problem) -> Result<GalerkinSystem> {
    let opts = system_options(cfg);
    match cfg.formulation {
        Formulation::Direct => GalerkinSystem::direct(&p.basis, &p.u0, &cfg.forcing, cfg.nu, &opts),
        Formulation::Lifted => {
            let lift = build_lift_for(cfg, p, cfg.lift_projection)?;
            GalerkinSystem::lifted(&p.basis, &lift, &opts)
        }
    }
}

/// One line of the trajectory file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub u_l2: f64,
    pub v_l2: f64,
    pub u_enstrophy: f64,
    pub v_enstrophy: f64,
    pub energy_residual: f64,
    pub q_l2: f64,
    pub orthogonality_defect: f64,
}

pub fn trajectory_rows(sys: &GalerkinSystem, samples: &[GalerkinState], mode_cap: usize) -> Result<Vec<TrajectoryRow>> {
    let mut rows = Vec::with_capacity(samples.len());
    for s in samples {
        if s.g.iter().any(|x| !x.is_finite()) {
            continue;
        }
        let f = sys.rhs(s.t, &s.g)?;
        let (d, sc) = sys.energy_balance(s.t, &s.g, &f);
        let (u_l2, u_ens) = match sys.lift() {
            Some(l) => {
                let u = reconstruct_u(s, sys.basis(), Some(l))?;
                (u.l2_norm(), enstrophy(&u))
            }
            None => (sys.energy(&s.g).sqrt(), sys.enstrophy(&s.g)),
        };
        let (q, orth) = match q_residual(sys, s, &f, mode_cap) {
            Ok(r) => (r.q_norm, r.orthogonality_defect),
            Err(Error::ModeCap { .. }) => (f64::NAN, f64::NAN),
            Err(e) => return Err(e),
        };
        rows.push(TrajectoryRow {
            t: s.t,
            u_l2,
            v_l2: sys.energy(&s.g).sqrt(),
            u_enstrophy: u_ens,
            v_enstrophy: sys.enstrophy(&s.g),
            energy_residual: if sc > 0.0 { d / sc } else { 0.0 },
            q_l2: q,
            orthogonality_defect: orth,
        });
    }
    Ok(rows)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn header(cfg: &RunConfig, command: &str, basis_hash: &str) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("format_version".into(), json!(FORMAT_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("config_hash".into(), json!(cfg.hash()));
    m.insert("basis_hash".into(), json!(basis_hash));
    m.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    m
}

/// Norms of the data, recorded in every report as the size bound `b`.
fn data_summary(cfg: &RunConfig, p: &Problem) -> Value {
    json!({
        "u0_l2": p.u0.l2_norm(),
        "u0_enstrophy": enstrophy(&p.u0),
        "forcing_l2_at_0": cfg.forcing.l2_norm(&p.torus, 0.0),
    })
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    Ok(cfg.output_dir.clone())
}

/// Run the continuation ladder and write the trajectory, checkpoint,
/// continuation log and a summary report.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let p = setup(cfg)?;
    let sys = build_system(cfg, &p)?;
    let run = run_ladder(&sys, &cfg.stepper, &cfg.ladder_config())?;
    let rows = trajectory_rows(&sys, &run.samples, cfg.residual_mode_cap)?;
    let last = run
        .samples
        .iter()
        .rev()
        .find(|s| s.g.iter().all(|x| x.is_finite()))
        .cloned()
        .unwrap_or_else(|| sys.initial_state());
    let reached = run.log.status == LadderStatus::ReachedHorizon;

    let closed_form_error = match p.preset {
        Some(pr) if reached => pr.closed_form(&p.u0, cfg.nu, last.t).map(|exact| -> Result<f64> {
            let u = reconstruct_u(&last, &p.basis, sys.lift())?;
            let err = u.sub(&exact)?.l2_norm();
            let n = exact.l2_norm();
            Ok(if n > 0.0 { err / n } else { err })
        }),
        _ => None,
    }
    .transpose()?;
    let bound = (cfg.formulation == Formulation::Direct)
        .then(|| apriori_l2_bound(&sys, &run.samples, p.u0.l2_norm()));

    let dir = out_dir(cfg)?;
    let basis_hash = p.basis.hash();
    let traj = dir.join("trajectory.csv");
    write_csv(&traj, &rows)?;
    let ckpt = dir.join("checkpoint.json");
    Checkpoint::new(&last, basis_hash.clone(), cfg.hash()).write(&ckpt)?;
    let log = dir.join("continuation_log.json");
    write_json(&log, &serde_json::to_value(&run.log)?)?;

    let mut rep = header(cfg, "simulate", &basis_hash);
    rep.insert("formulation".into(), json!(cfg.formulation));
    rep.insert("basis_size".into(), json!(p.basis.len()));
    rep.insert("nonlinear_path".into(), json!(if sys.tensor().is_some() { "tensor" } else { "pseudo" }));
    rep.insert("data_summary".into(), data_summary(cfg, &p));
    rep.insert("status".into(), serde_json::to_value(&run.log.status)?);
    rep.insert("final_time".into(), json!(last.t));
    rep.insert("rungs".into(), json!(run.log.rungs.len()));
    rep.insert("ladder_bounds_respected".into(), json!(run.log.bounds_respected()));
    rep.insert("closed_form_relative_error".into(), json!(closed_form_error));
    rep.insert("apriori_l2_bound".into(), serde_json::to_value(&bound)?);
    let report = Value::Object(rep);
    let rpath = dir.join("simulate_report.json");
    write_json(&rpath, &report)?;

    Ok(Outcome {
        verdict: if reached { Verdict::Pass } else { Verdict::Terminal },
        report,
        files: vec![traj, ckpt, log, rpath],
    })
}

/// Run every invariant suite and write `verify_report.json`.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let rep = run_verify(cfg)?;
    let pass = rep.all_pass();
    let report = serde_json::to_value(&rep)?;
    let dir = out_dir(cfg)?;
    let path = dir.join("verify_report.json");
    write_json(&path, &report)?;
    Ok(Outcome {
        verdict: if pass { Verdict::Pass } else { Verdict::CheckFailure },
        report,
        files: vec![path],
    })
}

/// Least-squares slope of `log ‖v(t)‖₂` against `log t` on
/// `[10⁻³, 10⁻²]`. `None` when `v` vanishes identically.
pub fn flatness_slope(sys: &GalerkinSystem) -> Result<Option<f64>> {
    let times: Vec<f64> = (0..10).map(|i| 1e-3 * 10f64.powf(i as f64 / 9.0)).collect();
    let stepper = StepperConfig {
        mode: StepMode::Adaptive,
        h: 1e-5,
        rtol: 1e-10,
        atol: 1e-24,
        max_step: 1e-3,
        min_step: 1e-16,
    };
    let tr = integrate(sys, &sys.initial_state(), &stepper, &times, None)?;
    if !tr.status.is_completed() {
        return Err(Error::InvalidArgument(format!("flatness run ended early: {:?}", tr.status)));
    }
    let pts: Vec<(f64, f64)> = tr.samples[1..]
        .iter()
        .map(|s| (s.t.ln(), 0.5 * sys.energy(&s.g).ln()))
        .collect();
    if pts.iter().any(|(_, y)| !y.is_finite()) {
        return Ok(None);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(Some(sxy / sxx))
}

/// `θ` orthogonality, lift norms and the flatness slope.
pub fn cmd_lift_check(cfg: &RunConfig) -> Result<Outcome> {
    let p = setup(cfg)?;
    let j = cfg.lift_order;
    let lift = build_lift_for(cfg, &p, cfg.lift_projection)?;
    let orth = check_theta_orthogonal(&lift, j - 1)?;
    let theta = lift.theta_polynomial()?;
    let sys = GalerkinSystem::lifted(&p.basis, &lift, &system_options(cfg))?;
    let slope = flatness_slope(&sys)?;
    let single_mode_defect = (p.preset == Some(Preset::SingleMode)).then(|| -> Result<f64> {
        let expected = p.u0.scale((-1f64).powi(j as i32 + 1) * cfg.nu.powi(j as i32 + 1) / factorial(j));
        let got = theta.coeffs.get(j).cloned().unwrap_or_else(|| SpectralField::zero(p.torus));
        let mut worst = got.sub(&expected)?.max_abs();
        for s in 0..theta.coeffs.len() {
            if s != j {
                worst = worst.max(theta.coeffs[s].max_abs());
            }
        }
        Ok(worst)
    });
    let single_mode_defect = single_mode_defect.transpose()?;

    let degenerate = orth.is_degenerate();
    let orth_ok = degenerate || orth.max_ratio() <= 1e-8;
    let slope_ok = slope.is_none_or(|s| s >= j as f64 + 0.5);
    let closed_ok = single_mode_defect.is_none_or(|d| d <= 1e-10);
    let mut rep = header(cfg, "lift-check", &p.basis.hash());
    rep.insert("data_summary".into(), data_summary(cfg, &p));
    rep.insert("order".into(), json!(j));
    rep.insert("projection".into(), json!(cfg.lift_projection));
    rep.insert(
        "derivative_norms".into(),
        json!(lift.derivs().iter().map(|d| d.l2_norm()).collect::<Vec<_>>()),
    );
    rep.insert("theta_degree".into(), json!(theta.degree()));
    rep.insert(
        "theta_coefficient_norms".into(),
        json!(theta.coeffs.iter().map(|c| c.l2_norm()).collect::<Vec<_>>()),
    );
    rep.insert("theta_orthogonality".into(), serde_json::to_value(&orth)?);
    rep.insert("degenerate".into(), json!(degenerate));
    rep.insert("flatness_slope".into(), json!(slope));
    rep.insert("single_mode_theta_defect".into(), json!(single_mode_defect));
    rep.insert("pass".into(), json!(orth_ok && slope_ok && closed_ok));
    let report = Value::Object(rep);
    let dir = out_dir(cfg)?;
    let path = dir.join("lift_check_report.json");
    write_json(&path, &report)?;
    Ok(Outcome {
        verdict: if orth_ok && slope_ok && closed_ok { Verdict::Pass } else { Verdict::CheckFailure },
        report,
        files: vec![path],
    })
}

/// Growing-torus run; writes the report and one trajectory file per rung.
pub fn cmd_exhaust(cfg: &RunConfig) -> Result<Outcome> {
    let plan = cfg.exhaust.clone().unwrap_or_default();
    let rep = run_exhaustion(&plan, &cfg.stepper)?;
    let dir = out_dir(cfg)?;
    let mut files = Vec::new();
    for (n, r) in rep.rungs.iter().enumerate() {
        let path = dir.join(format!("rung_{n}.csv"));
        write_csv(&path, &r.trajectory)?;
        files.push(path);
    }
    let bounds_ok = rep.rungs.iter().all(|r| r.bound_holds);
    let d_ok = rep.strictly_decreasing() || rep.d.iter().all(|&d| d == 0.0);
    let hashes: Vec<&str> = rep.rungs.iter().map(|r| r.basis_hash.as_str()).collect();
    let mut m = header(cfg, "exhaust", &hashes.join(","));
    m.insert("plan".into(), serde_json::to_value(&plan)?);
    m.insert("report".into(), serde_json::to_value(&rep)?);
    m.insert("bounds_hold".into(), json!(bounds_ok));
    m.insert("d_strictly_decreasing".into(), json!(rep.strictly_decreasing()));
    let report = Value::Object(m);
    let path = dir.join("exhaustion_report.json");
    write_json(&path, &report)?;
    files.push(path);
    let verdict = if rep.partial {
        Verdict::Terminal
    } else if bounds_ok && d_ok {
        Verdict::Pass
    } else {
        Verdict::CheckFailure
    };
    Ok(Outcome { verdict, report, files })
}

/// Per-mode difference between the spectral convolution and the grid
/// oracle on a random solenoidal field.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub modes_in_field: usize,
    pub max_defect: f64,
    pub scale: f64,
    pub per_mode: Vec<(String, f64)>,
}

pub fn oracle_compare(u: &SpectralField) -> Result<OracleReport> {
    let conv = advect(u, u, None)?.pruned();
    let grid = nonlinear_grid_oracle(u, u)?;
    let mut keys: Vec<_> = conv.modes().chain(grid.modes()).collect();
    keys.sort_by(|a, b| a.basis_cmp(b));
    keys.dedup();
    let mut per_mode = Vec::with_capacity(keys.len());
    let mut max_defect = 0.0f64;
    for k in keys {
        let a = conv.get(k);
        let b = grid.get(k);
        let d = (0..3).map(|i| (a[i] - b[i]).norm()).fold(0.0, f64::max);
        max_defect = max_defect.max(d);
        per_mode.push((k.key(), d));
    }
    Ok(OracleReport {
        modes_in_field: u.len(),
        max_defect,
        scale: conv.max_abs().max(grid.max_abs()),
        per_mode,
    })
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<Outcome> {
    let torus = TorusSpec::new(cfg.period, cfg.grid)?;
    let u = random_solenoidal(&torus, cfg.verify.oracle_modes, 2, cfg.seed);
    let rep = oracle_compare(&u)?;
    let pass = rep.max_defect <= 1e-9 * rep.scale.max(1.0);
    let mut m = header(cfg, "oracle", "");
    m.insert("oracle".into(), serde_json::to_value(&rep)?);
    m.insert("pass".into(), json!(pass));
    let report = Value::Object(m);
    let dir = out_dir(cfg)?;
    let path = dir.join("oracle_report.json");
    write_json(&path, &report)?;
    Ok(Outcome {
        verdict: if pass { Verdict::Pass } else { Verdict::CheckFailure },
        report,
        files: vec![path],
    })
}
