use serde::Serialize;

use super::{advect, Formulation, GalerkinState, GalerkinSystem};
use crate::error::{Error, Result};
use crate::lift::theta_eval;
use crate::spectral::{ModeSet, SpectralField};

/// Size and orientation of `q_n` at one time.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub t: f64,
    pub q_norm: f64,
    /// `max_k |⟨q_n, w_k⟩| / ‖q_n‖₂`, zero when `q_n = 0`.
    pub orthogonality_defect: f64,
    /// Relative defect of the instantaneous energy balance.
    pub energy_defect: f64,
    /// Number of modes carried by `q_n`.
    pub modes: usize,
}

/// `q_n = ∂ₜv − νΔv + v·∇v + β·∇v + v·∇β − θ` (lifted) or
/// `q_n = ∂ₜu − νΔu + u·∇u − f` (direct), formed on the full Minkowski
/// support of the active modes. `dg` must be `ℱ(g, t)`.
pub fn q_residual(
    sys: &GalerkinSystem,
    state: &GalerkinState,
    dg: &[f64],
    mode_cap: usize,
) -> Result<ResidualReport> {
    let basis = sys.basis();
    let v = basis.to_field(&state.g)?;
    let vt = basis.to_field(dg)?;
    let nu = sys.nu();
    let t = state.t;

    let beta = sys.lift().map(|l| l.beta(t));
    let active = match &beta {
        Some(b) => ModeSet::from_field(&v).union(&ModeSet::from_field(b)),
        None => ModeSet::from_field(&v),
    };
    let enlarged = active.minkowski_sum(&active).union(&active);
    if enlarged.len() > mode_cap {
        return Err(Error::ModeCap {
            what: "residual support",
            count: enlarged.len(),
            cap: mode_cap,
        });
    }

    let mut q: SpectralField = vt;
    q.add_scaled_in_place(-nu, &v.laplacian());
    q.add_scaled_in_place(1.0, &advect(&v, &v, None)?);
    match (sys.formulation(), sys.lift(), &beta) {
        (Formulation::Lifted, Some(lift), Some(b)) => {
            q.add_scaled_in_place(1.0, &advect(b, &v, None)?);
            q.add_scaled_in_place(1.0, &advect(&v, b, None)?);
            q.add_scaled_in_place(-1.0, &theta_eval(lift, t)?);
        }
        _ => {
            q.add_scaled_in_place(-1.0, &sys.forcing().eval(basis.torus(), t));
        }
    }
    let q_norm = q.l2_norm();
    let proj = basis.project(&q)?;
    let worst = proj.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (ed, es) = sys.energy_balance(t, &state.g, dg);
    Ok(ResidualReport {
        t,
        q_norm,
        orthogonality_defect: if q_norm > 0.0 { worst / q_norm } else { 0.0 },
        energy_defect: if es > 0.0 { ed / es } else { 0.0 },
        modes: q.len(),
    })
}
