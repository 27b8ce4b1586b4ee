//! Whole-space data on a ladder of growing tori.

mod cutoff;
mod profile;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cutoff::{CutoffSpec, DerivativeSups, DEFAULT_EPS};
pub use profile::Profile;

use crate::continuation::{apriori_l2_bound, integrate, uniform_times, IntegrationStatus, StepperConfig};
use crate::error::{Error, Result};
use crate::galerkin::{GalerkinSystem, PathChoice, SystemOptions};
use crate::lift::{ForcingMode, ForcingSpec};
use crate::spectral::{BasisSpec, Fft3, SpectralField, TorusSpec, WaveVector};

/// Time-polynomial forcing with a closed-form spatial profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingProfile {
    pub profile: Profile,
    pub poly: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExhaustionPlan {
    /// Cutoff radii `r₁ < r₂ < …`.
    pub radii: Vec<f64>,
    /// Torus period as a multiple of the cutoff radius.
    pub period_factor: f64,
    /// Spacing of the sampling lattice; `period / spacing` must be an even
    /// integer. The lattice contains the origin, so all rungs share it.
    pub data_spacing: f64,
    /// Physical wavenumber cutoff of the dynamics basis.
    pub kappa_cut: f64,
    pub eps: f64,
    pub profile: Profile,
    pub forcing: Option<ForcingProfile>,
    pub nu: f64,
    pub horizon: f64,
    pub sample_points: Vec<[f64; 3]>,
    pub sample_times: Vec<f64>,
    /// Extra uniform samples used for the L² bound and the trajectory files.
    pub monitor_samples: usize,
    pub blowup_threshold: f64,
    /// Largest admissible share of the data norm in the outer half band.
    pub band_tolerance: f64,
    pub tensor_limit: usize,
}

impl Default for ExhaustionPlan {
    fn default() -> Self {
        Self {
            radii: vec![2.0, 3.25, 4.5],
            period_factor: 2.0,
            data_spacing: 1.0 / 24.0,
            kappa_cut: 4.0 * PI,
            eps: DEFAULT_EPS,
            profile: Profile::Bump {
                amplitude: 0.5,
                radius: 0.9,
                axis: [0.0, 0.0, 1.0],
                power: 16,
            },
            forcing: None,
            nu: 0.2,
            horizon: 1.0,
            // Lattice points of the default spacing.
            sample_points: vec![
                [0.125, 0.0, 1.0 / 24.0],
                [1.0 / 6.0, 1.0 / 12.0, 0.0],
                [0.0, -0.125, 1.0 / 12.0],
                [-1.0 / 12.0, 1.0 / 6.0, -1.0 / 24.0],
            ],
            sample_times: vec![0.5, 1.0],
            monitor_samples: 10,
            blowup_threshold: 1e6,
            band_tolerance: 1e-6,
            tensor_limit: 2000,
        }
    }
}

/// Geometry of one rung.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RungGeometry {
    pub radius: f64,
    pub period: f64,
    pub data_grid: usize,
    pub basis_radius: f64,
}

impl ExhaustionPlan {
    pub fn validate(&self) -> Result<()> {
        let Some(&r1) = self.radii.first() else {
            return Err(Error::config("radii", "at least one rung is required"));
        };
        if !(r1 > 1.0) {
            return Err(Error::config("radii", format!("first radius must exceed 1, got {r1}")));
        }
        for w in self.radii.windows(2) {
            if !(w[1] > w[0] + 1.0) {
                return Err(Error::config(
                    "radii",
                    format!("radii must grow by more than 1, got {} then {}", w[0], w[1]),
                ));
            }
        }
        if !(self.period_factor >= 1.5) {
            return Err(Error::config("period_factor", "the cutoff support must fit in the box (>= 1.5)"));
        }
        if !(self.data_spacing > 0.0 && self.kappa_cut > 0.0) {
            return Err(Error::config("data_spacing", "spacing and kappa_cut must be positive"));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::config("nu", "must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("horizon", "must be positive"));
        }
        if self.sample_times.windows(2).any(|w| w[1] <= w[0])
            || self.sample_times.iter().any(|&t| !(t > 0.0 && t <= self.horizon))
        {
            return Err(Error::config("sample_times", "must increase within (0, horizon]"));
        }
        if self.sample_points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::config("sample_points", "must be finite"));
        }
        self.profile.validate()?;
        if let Some(f) = &self.forcing {
            f.profile.validate()?;
            if f.poly.len() > crate::lift::MAX_ORDER + 1 || f.poly.iter().any(|c| !c.is_finite()) {
                return Err(Error::config("forcing.poly", "at most 9 finite coefficients"));
            }
        }
        for n in 0..self.radii.len() {
            self.geometry(n)?;
        }
        Ok(())
    }

    pub fn geometry(&self, n: usize) -> Result<RungGeometry> {
        let radius = *self
            .radii
            .get(n)
            .ok_or_else(|| Error::InvalidArgument(format!("no rung {n}")))?;
        let period = self.period_factor * radius;
        let cells = period / self.data_spacing;
        let g = cells.round();
        if (cells - g).abs() > 1e-9 * cells || g < 8.0 || !(g as usize).is_multiple_of(2) {
            return Err(Error::Resolution(format!(
                "rung {n}: period {period} over spacing {} is not an even integer >= 8",
                self.data_spacing
            )));
        }
        Ok(RungGeometry {
            radius,
            period,
            data_grid: g as usize,
            basis_radius: self.kappa_cut * period / (2.0 * PI),
        })
    }
}

/// Spectral arrays of the sampled data on the full rung lattice. The lattice
/// side `g` need not be a power of two; `torus` supplies only the period.
struct GridSpectrum {
    torus: TorusSpec,
    g: usize,
    comps: [Vec<Complex64>; 3],
}

fn signed(i: usize, g: usize) -> i32 {
    if i < g / 2 {
        i as i32
    } else {
        i as i32 - g as i32
    }
}

impl GridSpectrum {
    /// Sample `η_r · p` with minimum-image coordinates and transform.
    fn sample(torus: TorusSpec, g: usize, cutoff: &CutoffSpec, p: &Profile) -> Self {
        let l = torus.period();
        let h = l / g as f64;
        let image = |i: usize| {
            let x = i as f64 * h;
            x - l * (x / l).round()
        };
        let vals: Vec<[f64; 3]> = (0..g * g * g)
            .into_par_iter()
            .map(|idx| {
                let x = [image(idx / (g * g)), image((idx / g) % g), image(idx % g)];
                let eta = cutoff.eval(x);
                if eta == 0.0 {
                    return [0.0; 3];
                }
                let v = p.eval(x);
                [eta * v[0], eta * v[1], eta * v[2]]
            })
            .collect();
        let fft = Fft3::new(g);
        let mut comps: [Vec<Complex64>; 3] =
            std::array::from_fn(|i| vals.iter().map(|v| Complex64::new(v[i], 0.0)).collect());
        for c in comps.iter_mut() {
            fft.forward(c);
        }
        // Drop the Nyquist planes so the coefficients stay Hermitian.
        for a in 0..g {
            for b in 0..g {
                for c in 0..g {
                    if a == g / 2 || b == g / 2 || c == g / 2 {
                        let idx = (a * g + b) * g + c;
                        for comp in comps.iter_mut() {
                            comp[idx] = Complex64::new(0.0, 0.0);
                        }
                    }
                }
            }
        }
        Self { torus, g, comps }
    }

    fn for_each_mode<F: FnMut(usize, WaveVector)>(&self, mut f: F) {
        let g = self.g;
        for a in 0..g {
            for b in 0..g {
                for c in 0..g {
                    f((a * g + b) * g + c, WaveVector::new(signed(a, g), signed(b, g), signed(c, g)));
                }
            }
        }
    }

    fn l2_norm(&self) -> f64 {
        let s: f64 = self.comps.iter().flat_map(|c| c.iter()).map(|z| z.norm_sqr()).sum();
        (s * self.torus.volume()).sqrt()
    }

    fn mean_norm(&self) -> f64 {
        let s: f64 = self.comps.iter().map(|c| c[0].norm_sqr()).sum();
        (s * self.torus.volume()).sqrt()
    }

    fn remove_mean(&mut self) {
        for c in self.comps.iter_mut() {
            c[0] = Complex64::new(0.0, 0.0);
        }
    }

    /// Share of the norm carried by modes with some `|k_i| > G/4`.
    fn outer_band_fraction(&self) -> f64 {
        let g = self.g as i32;
        let mut outer = 0.0;
        let mut total = 0.0;
        self.for_each_mode(|idx, k| {
            let e: f64 = self.comps.iter().map(|c| c[idx].norm_sqr()).sum();
            total += e;
            if k.max_abs_component() > g / 4 {
                outer += e;
            }
        });
        if total == 0.0 {
            0.0
        } else {
            (outer / total).sqrt()
        }
    }

    /// Leray projection in place; returns `(‖div‖₂, ‖∇q‖₂)` of the removed
    /// gradient part `∇q`.
    fn leray(&mut self) -> (f64, f64) {
        let torus = self.torus;
        let mut div = 0.0;
        let mut grad = 0.0;
        let g = self.g;
        for idx in 1..g * g * g {
            let a = idx / (g * g);
            let b = (idx / g) % g;
            let c = idx % g;
            let kap = torus.kappa(WaveVector::new(signed(a, g), signed(b, g), signed(c, g)));
            let k2 = kap[0] * kap[0] + kap[1] * kap[1] + kap[2] * kap[2];
            let d: Complex64 = (0..3).map(|i| self.comps[i][idx] * kap[i]).sum();
            if d.norm_sqr() == 0.0 {
                continue;
            }
            div += d.norm_sqr();
            grad += d.norm_sqr() / k2;
            for i in 0..3 {
                self.comps[i][idx] -= d * (kap[i] / k2);
            }
        }
        let v = torus.volume();
        ((div * v).sqrt(), (grad * v).sqrt())
    }

    /// Fourier sum at an arbitrary point.
    fn evaluate_at(&self, x: [f64; 3]) -> [f64; 3] {
        let g = self.g;
        let s = self.torus.scale();
        let phase = |xi: f64| -> Vec<Complex64> {
            (0..g)
                .map(|i| Complex64::from_polar(1.0, s * signed(i, g) as f64 * xi))
                .collect()
        };
        let (p0, p1, p2) = (phase(x[0]), phase(x[1]), phase(x[2]));
        let mut out = [0.0; 3];
        for a in 0..g {
            for b in 0..g {
                let pab = p0[a] * p1[b];
                let base = (a * g + b) * g;
                for c in 0..g {
                    let e = pab * p2[c];
                    for (i, o) in out.iter_mut().enumerate() {
                        *o += (self.comps[i][base + c] * e).re;
                    }
                }
            }
        }
        out
    }

    /// Canonical-half coefficients with `|k| ≤ radius`.
    fn ball(&self, radius: f64) -> Vec<(WaveVector, [Complex64; 3])> {
        let r2 = radius * radius;
        let mut out = Vec::new();
        self.for_each_mode(|idx, k| {
            if k.is_canonical() && (k.norm_sq() as f64) <= r2 + 1e-9 {
                out.push((k, std::array::from_fn(|i| self.comps[i][idx])));
            }
        });
        out
    }
}

/// Radial quadrature of `‖(1 − η_r) u‖_{L²(ℝ³)}`.
pub fn truncation_tail_norm(profile: &Profile, cutoff: &CutoffSpec) -> f64 {
    let r = cutoff.radius();
    let lo = r * (7.0 / 12.0 - cutoff.eps());
    let hi = r * (2.0 / 3.0 + cutoff.eps());
    let rho = |s: f64| profile.radial_energy_density(s);
    let panels = 64;
    let mut sum = 0.0;
    for i in 0..panels {
        let a = lo + (hi - lo) * i as f64 / panels as f64;
        let b = lo + (hi - lo) * (i + 1) as f64 / panels as f64;
        sum += cutoff::gauss(a, b, |s| (1.0 - cutoff.profile(s / r)).powi(2) * rho(s));
    }
    // Beyond the support: s = hi/τ maps [hi, ∞) onto (0, 1].
    let support = profile.support_radius();
    if support > hi {
        let t0 = (hi / support).min(1.0);
        for i in 0..panels {
            let a = t0 + (1.0 - t0) * i as f64 / panels as f64;
            let b = t0 + (1.0 - t0) * (i + 1) as f64 / panels as f64;
            sum += cutoff::gauss(a, b, |t| rho(hi / t) * hi / (t * t));
        }
    }
    sum.sqrt()
}

/// Truncated data on one rung.
#[derive(Clone, Debug, Serialize)]
pub struct TruncatedData {
    pub rung: usize,
    pub geometry: RungGeometry,
    /// `𝒫[η_r u₀]` restricted to the dynamics ball.
    #[serde(skip)]
    pub u_on: SpectralField,
    #[serde(skip)]
    pub forcing: ForcingSpec,
    /// `‖η_r u₀‖₂` on the torus.
    pub cut_norm: f64,
    pub mean_norm: f64,
    pub divergence_defect: f64,
    pub gradient_norm: f64,
    /// Full-band `‖u_on‖₂`.
    pub u_on_norm: f64,
    pub outer_band_fraction: f64,
    /// `‖(1 − η_r) u₀‖_{L²(ℝ³)}` by radial quadrature.
    pub tail_norm: f64,
    /// Full-band `‖f_n‖₂` per unit polynomial factor.
    pub forcing_norm: f64,
    /// `u_on` at the plan's sample points, summed over the full band.
    pub samples: Vec<[f64; 3]>,
}

/// Cut off, sample, transform, remove the mean and Leray-project the data
/// of rung `n`.
pub fn truncate_data(plan: &ExhaustionPlan, n: usize) -> Result<TruncatedData> {
    let geom = plan.geometry(n)?;
    // Power-of-two carrier for the resulting fields, wide enough to
    // dealias a product of two ball fields.
    let carrier = (3 * geom.basis_radius.ceil() as usize + 1).next_power_of_two().max(8);
    let torus = TorusSpec::new(geom.period, carrier)?;
    let cutoff = CutoffSpec::with_eps(geom.radius, plan.eps)?;
    let g = geom.data_grid;
    let mut spec = GridSpectrum::sample(torus, g, &cutoff, &plan.profile);
    let outer = spec.outer_band_fraction();
    if outer > plan.band_tolerance {
        return Err(Error::Resolution(format!(
            "rung {n}: {outer:.3e} of the data norm sits in the outer half band (limit {:.1e})",
            plan.band_tolerance
        )));
    }
    let cut_norm = spec.l2_norm();
    let mean_norm = spec.mean_norm();
    spec.remove_mean();
    let (divergence_defect, gradient_norm) = spec.leray();
    let samples = plan.sample_points.iter().map(|&x| spec.evaluate_at(x)).collect();
    let u_on = SpectralField::from_half(torus, spec.ball(geom.basis_radius));

    let (forcing, forcing_norm) = match &plan.forcing {
        None => (ForcingSpec::zero(), 0.0),
        Some(fp) => {
            let mut fs = GridSpectrum::sample(torus, g, &cutoff, &fp.profile);
            let of = fs.outer_band_fraction();
            if of > plan.band_tolerance {
                return Err(Error::Resolution(format!(
                    "rung {n}: forcing has {of:.3e} of its norm in the outer half band"
                )));
            }
            fs.remove_mean();
            let norm = fs.l2_norm();
            let modes = fs
                .ball(geom.basis_radius)
                .into_iter()
                .filter(|(_, c)| c.iter().any(|z| z.norm_sqr() > 0.0))
                .map(|(k, c)| ForcingMode {
                    k: k.0,
                    amplitude: [c[0].re, c[0].im, c[1].re, c[1].im, c[2].re, c[2].im],
                    poly: fp.poly.clone(),
                })
                .collect();
            (ForcingSpec { modes }, norm)
        }
    };

    Ok(TruncatedData {
        rung: n,
        geometry: geom,
        u_on_norm: spec.l2_norm(),
        u_on,
        forcing,
        cut_norm,
        mean_norm,
        divergence_defect,
        gradient_norm,
        outer_band_fraction: outer,
        tail_norm: truncation_tail_norm(&plan.profile, &cutoff),
        forcing_norm,
        samples,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub l2: f64,
    pub enstrophy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RungReport {
    pub data: TruncatedData,
    pub basis_size: usize,
    pub basis_hash: String,
    pub path: String,
    pub status: IntegrationStatus,
    /// `u_n(t, x)` indexed by sample time, then sample point.
    pub samples: Vec<Vec<[f64; 3]>>,
    pub bound_holds: bool,
    pub bound_margin: f64,
    #[serde(skip)]
    pub trajectory: Vec<TrajectoryRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExhaustionReport {
    pub sample_points: Vec<[f64; 3]>,
    pub sample_times: Vec<f64>,
    pub rungs: Vec<RungReport>,
    /// `max |u_{n+1} − u_n|` over sample points and times.
    pub d: Vec<f64>,
    /// The same for the truncated data.
    pub data_d: Vec<f64>,
    /// Some rung ended before the horizon.
    pub partial: bool,
}

impl ExhaustionReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.d.windows(2).all(|w| w[1] < w[0])
    }
}

fn max_diff(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (0..3).map(move |i| (x[i] - y[i]).abs()))
        .fold(0.0, f64::max)
}

fn run_rung(plan: &ExhaustionPlan, n: usize, stepper: &StepperConfig) -> Result<RungReport> {
    let data = truncate_data(plan, n)?;
    let torus = *data.u_on.torus();
    let basis = BasisSpec::ball(torus, data.geometry.basis_radius)?;
    let opts = SystemOptions {
        path: PathChoice::Auto,
        tensor_limit: plan.tensor_limit,
    };
    let sys = GalerkinSystem::direct(&basis, &data.u_on, &data.forcing, plan.nu, &opts)?;
    let path = if sys.tensor().is_some() { "tensor" } else { "pseudo" }.to_string();

    let mut times: Vec<f64> = uniform_times(0.0, plan.horizon, plan.monitor_samples.max(1));
    times.extend(plan.sample_times.iter().copied());
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * plan.horizon);

    let threshold = plan.blowup_threshold;
    let mut mon = |_t: f64, g: &[f64]| sys.enstrophy(g) <= threshold;
    let tr = integrate(&sys, &sys.initial_state(), stepper, &times, Some(&mut mon))?;
    let complete = tr.status.is_completed();

    let mut samples = Vec::new();
    for &ts in &plan.sample_times {
        let state = tr.samples.iter().find(|s| (s.t - ts).abs() <= 1e-12 * plan.horizon);
        let vals = match state {
            Some(s) if complete => {
                let u = basis.to_field(&s.g)?;
                plan.sample_points.iter().map(|&x| u.evaluate_at(x)).collect()
            }
            _ => vec![[f64::NAN; 3]; plan.sample_points.len()],
        };
        samples.push(vals);
    }
    let usable: Vec<_> = tr.samples.iter().filter(|s| s.g.iter().all(|x| x.is_finite())).cloned().collect();
    let bound = apriori_l2_bound(&sys, &usable, data.u_on_norm);
    let trajectory = usable
        .iter()
        .map(|s| TrajectoryRow {
            t: s.t,
            l2: sys.energy(&s.g).sqrt(),
            enstrophy: sys.enstrophy(&s.g),
        })
        .collect();
    Ok(RungReport {
        basis_size: basis.len(),
        basis_hash: basis.hash(),
        path,
        status: tr.status,
        samples,
        bound_holds: bound.holds,
        bound_margin: bound.min_margin,
        trajectory,
        data,
    })
}

/// Solve every rung to the common horizon and compare them at the shared
/// sample points.
pub fn run_exhaustion(plan: &ExhaustionPlan, stepper: &StepperConfig) -> Result<ExhaustionReport> {
    plan.validate()?;
    stepper.validate()?;
    // Rungs are independent; running them one at a time bounds peak memory.
    let rungs = (0..plan.radii.len())
        .map(|n| run_rung(plan, n, stepper))
        .collect::<Result<Vec<_>>>()?;
    let d = rungs
        .windows(2)
        .map(|w| {
            w[0].samples
                .iter()
                .zip(&w[1].samples)
                .map(|(a, b)| max_diff(a, b))
                .fold(0.0, f64::max)
        })
        .collect();
    let data_d = rungs
        .windows(2)
        .map(|w| max_diff(&w[0].data.samples, &w[1].data.samples))
        .collect();
    let partial = rungs.iter().any(|r| !r.status.is_completed());
    Ok(ExhaustionReport {
        sample_points: plan.sample_points.clone(),
        sample_times: plan.sample_times.clone(),
        rungs,
        d,
        data_d,
        partial,
    })
}
