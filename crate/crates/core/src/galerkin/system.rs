use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{advect, PseudoSpectral, TrilinearTensor};
use crate::error::{Error, Result};
use crate::lift::{factorial, ForcingSpec, LiftData};
use crate::spectral::{BasisSpec, SpectralField};

/// Which unknown the ODE system evolves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// `v = u − β`, starting from zero.
    Lifted,
    /// `u` itself, starting from `𝒫_n u₀`.
    Direct,
}

impl std::str::FromStr for Formulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lifted" => Ok(Formulation::Lifted),
            "direct" => Ok(Formulation::Direct),
            _ => Err(Error::InvalidArgument(format!(
                "formulation must be `lifted` or `direct`, got {s:?}"
            ))),
        }
    }
}

/// Evaluation strategy for `Σ a_{imk} g_i g_m`.
pub enum NonlinearPath {
    Tensor(TrilinearTensor),
    Pseudo(PseudoSpectral),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathChoice {
    /// Tensor up to `tensor_limit` functions, grid evaluation beyond.
    #[default]
    Auto,
    Tensor,
    Pseudo,
}

#[derive(Clone, Debug)]
pub struct SystemOptions {
    pub path: PathChoice,
    pub tensor_limit: usize,
}

impl Default for SystemOptions {
    fn default() -> Self {
        Self {
            path: PathChoice::Auto,
            tensor_limit: 2000,
        }
    }
}

/// Coefficient vector and time.
#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinState {
    pub g: Vec<f64>,
    pub t: f64,
}

/// Polynomial-in-time coefficient vectors `s_k(t) = Σ_p s_{k,p} t^p`.
#[derive(Clone, Debug, Default)]
pub struct SourceProjection {
    pub coeffs: Vec<Vec<f64>>,
}

impl SourceProjection {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for c in self.coeffs.iter().rev() {
            for (o, x) in out.iter_mut().zip(c) {
                *o = *o * t + x;
            }
        }
    }

    pub fn eval(&self, t: f64, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        self.eval_into(t, &mut v);
        v
    }

    /// Projection of the lift forcing `θ`, computed with output-filtered
    /// convolutions so that only basis modes are ever formed.
    pub fn theta(basis: &BasisSpec, lift: &LiftData) -> Result<Self> {
        let j = lift.order();
        let d = lift.derivs();
        let torus = *basis.torus();
        let modes = basis.mode_set();
        let deg = (2 * j).max(lift.forcing().degree());
        let mut coeffs = Vec::with_capacity(deg + 1);
        for s in 0..=deg {
            let inv = 1.0 / factorial(s);
            let mut lin = SpectralField::zero(torus);
            if s < j {
                lin.add_scaled_in_place(-inv, &d[s + 1]);
            }
            if s <= j {
                lin.add_scaled_in_place(inv, &d[s].laplacian().scale(lift.nu()));
            }
            lin.add_scaled_in_place(1.0, &lift.forcing().coefficient_field(&torus, s));
            for r in 0..=s.min(j) {
                let rp = s - r;
                if rp > j {
                    continue;
                }
                let adv = advect(&d[r], &d[rp], Some(&modes))?;
                lin.add_scaled_in_place(-1.0 / (factorial(r) * factorial(rp)), &adv);
            }
            coeffs.push(basis.project(&lin)?);
        }
        Ok(Self { coeffs })
    }

    pub fn forcing(basis: &BasisSpec, f: &ForcingSpec) -> Result<Self> {
        let torus = *basis.torus();
        let coeffs = (0..=f.degree())
            .map(|s| basis.project(&f.coefficient_field(&torus, s)))
            .collect::<Result<_>>()?;
        Ok(Self { coeffs })
    }

    /// `𝒫_n[β·∇β]` as a polynomial of degree `2J`.
    fn beta_self_advection(basis: &BasisSpec, lift: &LiftData) -> Result<Self> {
        let j = lift.order();
        let d = lift.derivs();
        let modes = basis.mode_set();
        let mut coeffs = Vec::with_capacity(2 * j + 1);
        for s in 0..=2 * j {
            let mut acc = SpectralField::zero(*basis.torus());
            for r in 0..=s.min(j) {
                let rp = s - r;
                if rp > j {
                    continue;
                }
                let adv = advect(&d[r], &d[rp], Some(&modes))?;
                acc.add_scaled_in_place(1.0 / (factorial(r) * factorial(rp)), &adv);
            }
            coeffs.push(basis.project(&acc)?);
        }
        Ok(Self { coeffs })
    }
}

/// `B_r[m,k] = ∫(β_r·∇w_m)·w_k`, `C_r[m,k] = ∫(w_m·∇β_r)·w_k` with
/// `β_r = ∂ₜʳu₀/r!`, dense and row-major in `m`.
#[derive(Clone, Debug)]
pub struct BetaMatrices {
    n: usize,
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    /// `(B_r + C_r)ᵀ`, row-major in `k`, for the right-hand side.
    mt: Vec<Vec<f64>>,
}

impl BetaMatrices {
    pub fn assemble(basis: &BasisSpec, lift: &LiftData) -> Result<Self> {
        let n = basis.len();
        let modes = basis.mode_set();
        let ws: Vec<SpectralField> = (0..n)
            .map(|m| {
                let mut e = vec![0.0; n];
                e[m] = 1.0;
                basis.to_field(&e)
            })
            .collect::<Result<_>>()?;
        let mut b = Vec::new();
        let mut c = Vec::new();
        let mut mt = Vec::new();
        for r in 0..=lift.order() {
            let beta = lift.beta_coeff(r);
            let cols: Vec<(Vec<f64>, Vec<f64>)> = ws
                .par_iter()
                .map(|w| -> Result<_> {
                    let bm = basis.project(&advect(&beta, w, Some(&modes))?)?;
                    let cm = basis.project(&advect(w, &beta, Some(&modes))?)?;
                    Ok((bm, cm))
                })
                .collect::<Result<_>>()?;
            let mut br = vec![0.0; n * n];
            let mut cr = vec![0.0; n * n];
            let mut mr = vec![0.0; n * n];
            for (m, (bm, cm)) in cols.into_iter().enumerate() {
                for k in 0..n {
                    br[m * n + k] = bm[k];
                    cr[m * n + k] = cm[k];
                    mr[k * n + m] = bm[k] + cm[k];
                }
            }
            b.push(br);
            c.push(cr);
            mt.push(mr);
        }
        Ok(Self { n, b, c, mt })
    }

    pub fn order(&self) -> usize {
        self.b.len() - 1
    }

    pub fn b(&self, r: usize, m: usize, k: usize) -> f64 {
        self.b[r][m * self.n + k]
    }

    pub fn c(&self, r: usize, m: usize, k: usize) -> f64 {
        self.c[r][m * self.n + k]
    }

    /// `out_k += Σ_r t^r Σ_m (B_r + C_r)[m,k] g_m`.
    pub fn apply_add(&self, t: f64, g: &[f64], out: &mut [f64]) {
        let n = self.n;
        let body = |(k, o): (usize, &mut f64)| {
            let mut tp = 1.0;
            let mut s = 0.0;
            for mr in &self.mt {
                let row = &mr[k * n..(k + 1) * n];
                let mut d = 0.0;
                for (a, x) in row.iter().zip(g) {
                    d += a * x;
                }
                s += tp * d;
                tp *= t;
            }
            *o += s;
        };
        if n >= 256 {
            out.par_iter_mut().enumerate().for_each(body);
        } else {
            out.iter_mut().enumerate().for_each(body);
        }
    }

    fn form(mats: &[Vec<f64>], n: usize, t: f64, g: &[f64]) -> f64 {
        let mut tp = 1.0;
        let mut s = 0.0;
        for m in mats {
            let mut q = 0.0;
            for i in 0..n {
                if g[i] == 0.0 {
                    continue;
                }
                let row = &m[i * n..(i + 1) * n];
                q += g[i] * row.iter().zip(g).map(|(a, x)| a * x).sum::<f64>();
            }
            s += tp * q;
            tp *= t;
        }
        s
    }

    /// `Σ b_{mk}(t) g_m g_k`.
    pub fn b_form(&self, t: f64, g: &[f64]) -> f64 {
        Self::form(&self.b, self.n, t, g)
    }

    /// `Σ c_{mk}(t) g_m g_k`.
    pub fn c_form(&self, t: f64, g: &[f64]) -> f64 {
        Self::form(&self.c, self.n, t, g)
    }

    /// `max |B_r[m,k] + B_r[k,m]|` and the largest entry.
    pub fn b_skew_defect(&self) -> (f64, f64) {
        let n = self.n;
        let mut d = 0.0f64;
        let mut big = 0.0f64;
        for br in &self.b {
            for m in 0..n {
                for k in 0..n {
                    d = d.max((br[m * n + k] + br[k * n + m]).abs());
                    big = big.max(br[m * n + k].abs());
                }
            }
        }
        (d, big)
    }
}

/// Separate contributions to the right-hand side.
#[derive(Clone, Debug)]
pub struct RhsParts {
    /// `−Σ a_{imk} g_i g_m`
    pub nonlinear: Vec<f64>,
    /// `−Σ (b_{mk} + c_{mk}) g_m` (zero in the direct formulation)
    pub lift_linear: Vec<f64>,
    /// `−ν λ_k g_k`
    pub viscous: Vec<f64>,
    /// `θ^k(t)` or `f^k(t)`
    pub source: Vec<f64>,
}

/// The ODE system `dg/dt = ℱ(g, t)` on a fixed basis.
pub struct GalerkinSystem {
    basis: BasisSpec,
    nu: f64,
    lambda: Vec<f64>,
    formulation: Formulation,
    nonlinear: NonlinearPath,
    beta: Option<BetaMatrices>,
    source: SourceProjection,
    lift: Option<LiftData>,
    forcing: ForcingSpec,
    initial: Vec<f64>,
    beta_self: Option<SourceProjection>,
}

fn choose_path(basis: &BasisSpec, opts: &SystemOptions, band: i32) -> Result<NonlinearPath> {
    let tensor = match opts.path {
        PathChoice::Tensor => true,
        PathChoice::Pseudo => false,
        PathChoice::Auto => basis.len() <= opts.tensor_limit,
    };
    Ok(if tensor {
        NonlinearPath::Tensor(TrilinearTensor::assemble(basis))
    } else {
        NonlinearPath::Pseudo(PseudoSpectral::new(basis, band)?)
    })
}

impl GalerkinSystem {
    /// System for `v = u − β` with `g(0) = 0`.
    pub fn lifted(basis: &BasisSpec, lift: &LiftData, opts: &SystemOptions) -> Result<Self> {
        if !basis.torus().same_as(lift.torus()) {
            return Err(Error::TorusMismatch);
        }
        let band = lift.derivs().iter().map(|d| d.band_limit()).max().unwrap_or(0);
        let nonlinear = choose_path(basis, opts, band)?;
        let beta = match nonlinear {
            NonlinearPath::Tensor(_) => Some(BetaMatrices::assemble(basis, lift)?),
            NonlinearPath::Pseudo(_) => None,
        };
        let beta_self = match nonlinear {
            NonlinearPath::Tensor(_) => None,
            NonlinearPath::Pseudo(_) => Some(SourceProjection::beta_self_advection(basis, lift)?),
        };
        Ok(Self {
            basis: basis.clone(),
            nu: lift.nu(),
            lambda: basis.eigenvalues(),
            formulation: Formulation::Lifted,
            nonlinear,
            beta,
            source: SourceProjection::theta(basis, lift)?,
            lift: Some(lift.clone()),
            forcing: lift.forcing().clone(),
            initial: vec![0.0; basis.len()],
            beta_self,
        })
    }

    /// System for `u` itself with `g(0) = 𝒫_n u₀`.
    pub fn direct(
        basis: &BasisSpec,
        u0: &SpectralField,
        forcing: &ForcingSpec,
        nu: f64,
        opts: &SystemOptions,
    ) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
        }
        forcing.validate()?;
        Ok(Self {
            basis: basis.clone(),
            nu,
            lambda: basis.eigenvalues(),
            formulation: Formulation::Direct,
            nonlinear: choose_path(basis, opts, 0)?,
            beta: None,
            source: SourceProjection::forcing(basis, forcing)?,
            lift: None,
            forcing: forcing.clone(),
            initial: basis.project(u0)?,
            beta_self: None,
        })
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn lift(&self) -> Option<&LiftData> {
        self.lift.as_ref()
    }

    pub fn forcing(&self) -> &ForcingSpec {
        &self.forcing
    }

    pub fn tensor(&self) -> Option<&TrilinearTensor> {
        match &self.nonlinear {
            NonlinearPath::Tensor(t) => Some(t),
            NonlinearPath::Pseudo(_) => None,
        }
    }

    pub fn tensor_mut(&mut self) -> Option<&mut TrilinearTensor> {
        match &mut self.nonlinear {
            NonlinearPath::Tensor(t) => Some(t),
            NonlinearPath::Pseudo(_) => None,
        }
    }

    pub fn beta_matrices(&self) -> Option<&BetaMatrices> {
        self.beta.as_ref()
    }

    pub fn source(&self) -> &SourceProjection {
        &self.source
    }

    pub fn initial_state(&self) -> GalerkinState {
        GalerkinState {
            g: self.initial.clone(),
            t: 0.0,
        }
    }

    fn check(&self, g: &[f64]) -> Result<()> {
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: g.len(),
            });
        }
        Ok(())
    }

    /// `Σ a_{imk} g_i g_m`, or its lifted grid analogue
    /// `𝒫_n[(u·∇)u − β·∇β]` with `u = v + β`.
    fn advection_into(&self, t: f64, g: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.nonlinear {
            NonlinearPath::Tensor(a) => a.contract_into(g, g, out),
            NonlinearPath::Pseudo(p) => match (&self.lift, &self.beta_self) {
                (Some(lift), Some(bs)) => {
                    let beta = lift.beta(t);
                    p.project_self_advection(g, Some(&beta), out)?;
                    let corr = bs.eval(t, out.len());
                    for (o, c) in out.iter_mut().zip(corr) {
                        *o -= c;
                    }
                    Ok(())
                }
                _ => p.project_self_advection(g, None, out),
            },
        }
    }

    pub fn rhs_into(&self, t: f64, g: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(g)?;
        self.check(out)?;
        self.advection_into(t, g, out)?;
        for x in out.iter_mut() {
            *x = -*x;
        }
        if let Some(b) = &self.beta {
            let mut tmp = vec![0.0; out.len()];
            b.apply_add(t, g, &mut tmp);
            for (o, x) in out.iter_mut().zip(tmp) {
                *o -= x;
            }
        }
        let mut src = vec![0.0; out.len()];
        self.source.eval_into(t, &mut src);
        for k in 0..out.len() {
            out[k] += src[k] - self.nu * self.lambda[k] * g[k];
        }
        Ok(())
    }

    pub fn rhs(&self, t: f64, g: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.rhs_into(t, g, &mut out)?;
        Ok(out)
    }

    /// The right-hand side split by term. In the lifted grid path the
    /// `β`-linear terms are folded into `nonlinear`.
    pub fn rhs_parts(&self, t: f64, g: &[f64]) -> Result<RhsParts> {
        self.check(g)?;
        let n = self.dim();
        let mut nonlinear = vec![0.0; n];
        self.advection_into(t, g, &mut nonlinear)?;
        nonlinear.iter_mut().for_each(|x| *x = -*x);
        let mut lift_linear = vec![0.0; n];
        if let Some(b) = &self.beta {
            b.apply_add(t, g, &mut lift_linear);
            lift_linear.iter_mut().for_each(|x| *x = -*x);
        }
        let viscous = (0..n).map(|k| -self.nu * self.lambda[k] * g[k]).collect();
        Ok(RhsParts {
            nonlinear,
            lift_linear,
            viscous,
            source: self.source.eval(t, n),
        })
    }

    /// `Σ λ_k g_k² = ‖∇v‖₂²`.
    pub fn enstrophy(&self, g: &[f64]) -> f64 {
        g.iter().zip(&self.lambda).map(|(x, l)| l * x * x).sum()
    }

    /// `Σ λ_k² g_k² = ‖Δv‖₂²`.
    pub fn palinstrophy(&self, g: &[f64]) -> f64 {
        g.iter().zip(&self.lambda).map(|(x, l)| l * l * x * x).sum()
    }

    /// `Σ g_k² = ‖v‖₂²`.
    pub fn energy(&self, g: &[f64]) -> f64 {
        g.iter().map(|x| x * x).sum()
    }

    /// Residual of `d/dt ½‖v‖² = −ν‖∇v‖² − Σ c_{mk} g_m g_k + ⟨θ, v⟩` with the
    /// left side taken from the analytic right-hand side `f = ℱ(g, t)`.
    /// Returns `(defect, scale)`; the scale sums the magnitudes of all terms.
    pub fn energy_balance(&self, t: f64, g: &[f64], f: &[f64]) -> (f64, f64) {
        let lhs: f64 = g.iter().zip(f).map(|(a, b)| a * b).sum();
        let visc = -self.nu * self.enstrophy(g);
        let c = self.beta.as_ref().map(|b| b.c_form(t, g)).unwrap_or(0.0);
        let src: f64 = self
            .source
            .eval(t, g.len())
            .iter()
            .zip(g)
            .map(|(a, b)| a * b)
            .sum();
        let rhs = visc - c + src;
        let scale = lhs.abs() + visc.abs() + c.abs() + src.abs();
        ((lhs - rhs).abs(), scale)
    }
}

/// `v = Σ g_k w_k`.
pub fn reconstruct_v(state: &GalerkinState, basis: &BasisSpec) -> Result<SpectralField> {
    basis.to_field(&state.g)
}

/// `u = v + β(t)`, or `v` itself when there is no lift.
pub fn reconstruct_u(state: &GalerkinState, basis: &BasisSpec, lift: Option<&LiftData>) -> Result<SpectralField> {
    let v = reconstruct_v(state, basis)?;
    match lift {
        Some(l) => v.add(&l.beta(state.t)),
        None => Ok(v),
    }
}

#[cfg(test)]
mod tests;
