//! Initial time derivatives of the solution, the Taylor lift `β` and the
//! corrected forcing `θ = −∂ₜβ + νΔβ − β·∇β + f`.
//!
//! Subtracting `β` from `u` leaves an unknown `v = u − β` that starts from
//! zero and whose first `J` time derivatives vanish at `t = 0`.

mod forcing;

pub use forcing::{ForcingMode, ForcingSpec};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::galerkin::advect;
use crate::spectral::{leray_project, BasisSpec, SpectralField, TorusSpec};

/// Largest supported lift order.
pub const MAX_ORDER: usize = 8;

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, b| a * b as f64)
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Options for [`build_lift`].
#[derive(Clone, Debug)]
pub struct LiftOptions {
    /// Replace the Leray projection in the recurrence by the Galerkin
    /// projection onto this basis. The lift then lies in `H_n`.
    pub truncate_to: Option<BasisSpec>,
    /// Largest number of stored modes allowed in any derivative or `θ`
    /// coefficient.
    pub mode_cap: usize,
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self {
            truncate_to: None,
            mode_cap: 200_000,
        }
    }
}

/// The stack `∂ₜʲu₀`, `j = 0..=J`, with the unprojected fields it came from.
#[derive(Clone, Debug)]
pub struct LiftData {
    order: usize,
    nu: f64,
    torus: TorusSpec,
    forcing: ForcingSpec,
    derivs: Vec<SpectralField>,
    pre_projection: Vec<SpectralField>,
    truncated: Option<BasisSpec>,
    mode_cap: usize,
}

/// `β(t)`, `∂ₜβ(t)` and `Δβ(t)` at one time.
#[derive(Clone, Debug)]
pub struct LiftEval {
    pub t: f64,
    pub beta: SpectralField,
    pub beta_dt: SpectralField,
    pub beta_lap: SpectralField,
}

/// `θ(t) = Σ_s θ_s t^s` with full (unprojected) coefficient fields.
#[derive(Clone, Debug)]
pub struct ThetaPolynomial {
    pub coeffs: Vec<SpectralField>,
}

impl ThetaPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> SpectralField {
        horner(&self.coeffs, t)
    }

    /// `∂ₜʲθ(·,0) = j!·θ_j`.
    pub fn derivative_at_zero(&self, j: usize) -> SpectralField {
        match self.coeffs.get(j) {
            Some(c) => c.scale(factorial(j)),
            None => SpectralField::zero(*self.coeffs[0].torus()),
        }
    }
}

fn horner(coeffs: &[SpectralField], t: f64) -> SpectralField {
    let mut acc = SpectralField::zero(*coeffs[0].torus());
    for c in coeffs.iter().rev() {
        acc = acc.scale(t);
        acc.add_scaled_in_place(1.0, c);
    }
    acc
}

fn check_cap(f: &SpectralField, cap: usize, what: &'static str) -> Result<()> {
    if f.len() > cap {
        return Err(Error::ModeCap {
            what,
            count: f.len(),
            cap,
        });
    }
    Ok(())
}

/// Build `∂ₜʲu₀` for `j ≤ J` from
/// `∂ₜʲu₀ = 𝒫(νΔ∂ₜʲ⁻¹u₀ − Σ_r C(j−1,r) ∂ₜʳu₀·∇∂ₜʲ⁻¹⁻ʳu₀ + ∂ₜʲ⁻¹f(0))`.
pub fn build_lift(
    u0: &SpectralField,
    forcing: &ForcingSpec,
    order: usize,
    nu: f64,
    opts: &LiftOptions,
) -> Result<LiftData> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "lift order must lie in 1..={MAX_ORDER}, got {order}"
        )));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
    }
    if u0.has_nonzero_mean() {
        return Err(Error::NonzeroMean("initial data"));
    }
    let ratio = u0.divergence_ratio();
    if ratio > 1e-12 {
        return Err(Error::NotSolenoidal(ratio));
    }
    forcing.validate()?;
    let torus = *u0.torus();
    let project = |f: &SpectralField| -> Result<SpectralField> {
        let p = match &opts.truncate_to {
            Some(b) => b.project_field(f)?,
            None => leray_project(f),
        };
        Ok(p.without_mean())
    };
    let start = match &opts.truncate_to {
        Some(b) => b.project_field(u0)?,
        None => u0.without_mean(),
    };
    let mut derivs = vec![start.clone()];
    let mut pre = vec![start];
    for j in 1..=order {
        let mut acc = derivs[j - 1].laplacian().scale(nu);
        for r in 0..j {
            let adv = advect(&derivs[r], &derivs[j - 1 - r], None)?;
            acc.add_scaled_in_place(-binom(j - 1, r), &adv);
        }
        acc.add_scaled_in_place(1.0, &forcing.derivative_at_zero(&torus, j - 1));
        check_cap(&acc, opts.mode_cap, "lift derivative")?;
        let acc = acc.pruned();
        derivs.push(project(&acc)?.pruned());
        pre.push(acc);
    }
    Ok(LiftData {
        order,
        nu,
        torus,
        forcing: forcing.clone(),
        derivs,
        pre_projection: pre,
        truncated: opts.truncate_to.clone(),
        mode_cap: opts.mode_cap,
    })
}

impl LiftData {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn torus(&self) -> &TorusSpec {
        &self.torus
    }

    pub fn forcing(&self) -> &ForcingSpec {
        &self.forcing
    }

    /// `∂ₜʲu₀` for `j = 0..=J`.
    pub fn derivs(&self) -> &[SpectralField] {
        &self.derivs
    }

    /// The fields `u₀^{[#j]}` before projection; entry 0 is `u₀` itself.
    pub fn pre_projection(&self) -> &[SpectralField] {
        &self.pre_projection
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated.is_some()
    }

    /// Taylor coefficient `β_r = ∂ₜʳu₀ / r!`.
    pub fn beta_coeff(&self, r: usize) -> SpectralField {
        self.derivs[r].scale(1.0 / factorial(r))
    }

    pub fn beta_coeffs(&self) -> Vec<SpectralField> {
        (0..=self.order).map(|r| self.beta_coeff(r)).collect()
    }

    /// `β(t) = Σ_r ∂ₜʳu₀ tʳ/r!`.
    pub fn beta(&self, t: f64) -> SpectralField {
        horner(&self.beta_coeffs(), t)
    }

    pub fn beta_dt(&self, t: f64) -> SpectralField {
        let c: Vec<_> = (1..=self.order)
            .map(|r| self.beta_coeff(r).scale(r as f64))
            .collect();
        if c.is_empty() {
            return SpectralField::zero(self.torus);
        }
        horner(&c, t)
    }

    /// `∂ₜʲβ(t)`; identically zero for `j > J`.
    pub fn beta_derivative(&self, j: usize, t: f64) -> SpectralField {
        if j > self.order {
            return SpectralField::zero(self.torus);
        }
        let c: Vec<_> = (j..=self.order)
            .map(|r| self.derivs[r].scale(1.0 / factorial(r - j)))
            .collect();
        horner(&c, t)
    }

    /// Coefficients of `θ(t)` as a polynomial of degree `max(2J, d)`:
    /// `θ_s = −∂ₜ^{s+1}u₀/s! + νΔ∂ₜˢu₀/s! − Σ_{r+r'=s} ∂ₜʳu₀·∇∂ₜ^{r'}u₀/(r! r'!) + f_s`.
    pub fn theta_polynomial(&self) -> Result<ThetaPolynomial> {
        let j = self.order;
        let deg = (2 * j).max(self.forcing.degree());
        let mut coeffs = Vec::with_capacity(deg + 1);
        for s in 0..=deg {
            let mut acc = SpectralField::zero(self.torus);
            let inv = 1.0 / factorial(s);
            if s < j {
                acc.add_scaled_in_place(-inv, &self.derivs[s + 1]);
            }
            if s <= j {
                acc.add_scaled_in_place(inv, &self.derivs[s].laplacian().scale(self.nu));
            }
            for r in 0..=s.min(j) {
                let rp = s - r;
                if rp > j {
                    continue;
                }
                let adv = advect(&self.derivs[r], &self.derivs[rp], None)?;
                acc.add_scaled_in_place(-1.0 / (factorial(r) * factorial(rp)), &adv);
            }
            acc.add_scaled_in_place(1.0, &self.forcing.coefficient_field(&self.torus, s));
            check_cap(&acc, self.mode_cap, "theta coefficient")?;
            coeffs.push(acc);
        }
        Ok(ThetaPolynomial { coeffs })
    }
}

/// `β(t)` together with `∂ₜβ` and `Δβ`.
pub fn beta_eval(lift: &LiftData, t: f64) -> LiftEval {
    let beta = lift.beta(t);
    LiftEval {
        t,
        beta_lap: beta.laplacian(),
        beta_dt: lift.beta_dt(t),
        beta,
    }
}

/// `θ(t) = −∂ₜβ + νΔβ − β·∇β + f`, assembled directly from `β(t)`. No
/// projection is applied.
pub fn theta_eval(lift: &LiftData, t: f64) -> Result<SpectralField> {
    let e = beta_eval(lift, t);
    let mut th = e.beta_lap.scale(lift.nu);
    th.add_scaled_in_place(-1.0, &e.beta_dt);
    th.add_scaled_in_place(-1.0, &advect(&e.beta, &e.beta, None)?);
    th.add_scaled_in_place(1.0, &lift.forcing.eval(&lift.torus, t));
    Ok(th)
}

/// Ratios `‖𝒫θ⁽ʲ⁾(·,0)‖ / max(‖θ⁽ʲ⁾(·,0)‖, floor)` for `j = 0..=jmax`.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaOrthogonality {
    pub floor: f64,
    pub norms: Vec<f64>,
    pub projected_norms: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl ThetaOrthogonality {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }

    /// True when every `θ⁽ʲ⁾(·,0)` is below the floor.
    pub fn is_degenerate(&self) -> bool {
        self.norms.iter().all(|&n| n <= self.floor)
    }
}

pub const THETA_FLOOR: f64 = 1e-300;

pub fn check_theta_orthogonal(lift: &LiftData, jmax: usize) -> Result<ThetaOrthogonality> {
    if jmax + 1 > lift.order {
        return Err(Error::InvalidArgument(format!(
            "jmax = {jmax} must not exceed J − 1 = {}",
            lift.order - 1
        )));
    }
    let theta = lift.theta_polynomial()?;
    let mut rep = ThetaOrthogonality {
        floor: THETA_FLOOR,
        norms: Vec::new(),
        projected_norms: Vec::new(),
        ratios: Vec::new(),
    };
    for j in 0..=jmax {
        let d = theta.derivative_at_zero(j);
        let n = d.l2_norm();
        let p = leray_project(&d).l2_norm();
        rep.norms.push(n);
        rep.projected_norms.push(p);
        rep.ratios.push(p / n.max(THETA_FLOOR));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests;
