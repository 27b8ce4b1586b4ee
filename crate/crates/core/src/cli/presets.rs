//! Named initial data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exhaust::{CutoffSpec, Profile};
use crate::spectral::{
    enstrophy, grid_to_spectral, leray_project, random_band_limited, BasisSpec, RealGridField,
    SpectralField, TorusSpec, WaveVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Zero,
    SingleMode,
    TaylorGreen,
    ClayClassSmall,
    StressLarge,
    #[serde(rename = "random-8-mode")]
    Random8Mode,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Zero,
        Preset::SingleMode,
        Preset::TaylorGreen,
        Preset::ClayClassSmall,
        Preset::StressLarge,
        Preset::Random8Mode,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Zero => "zero",
            Preset::SingleMode => "single-mode",
            Preset::TaylorGreen => "taylor-green",
            Preset::ClayClassSmall => "clay-class-small",
            Preset::StressLarge => "stress-large",
            Preset::Random8Mode => "random-8-mode",
        }
    }

    /// Data for this preset, restricted to `basis` where the preset is
    /// defined by a basis.
    pub fn build(&self, basis: &BasisSpec, seed: u64) -> Result<SpectralField> {
        let torus = basis.torus();
        Ok(match self {
            Preset::Zero => SpectralField::zero(*torus),
            Preset::SingleMode => single_mode(torus),
            Preset::TaylorGreen => taylor_green(torus),
            Preset::ClayClassSmall => clay_class_small(basis)?,
            Preset::StressLarge => stress_large(basis, seed)?,
            Preset::Random8Mode => random_8_mode(basis, seed)?,
        })
    }

    /// `e^{−νλt} u₀` when the preset is a single Stokes eigenfunction.
    pub fn closed_form(&self, u0: &SpectralField, nu: f64, t: f64) -> Option<SpectralField> {
        let torus = *u0.torus();
        let decay = |k: WaveVector| (-nu * torus.eigenvalue(k) * t).exp();
        match self {
            Preset::Zero => Some(u0.clone()),
            Preset::SingleMode => Some(u0.scale(decay(WaveVector::new(1, 0, 0)))),
            Preset::TaylorGreen => Some(u0.scale(decay(WaveVector::new(1, 1, 0)))),
            _ => None,
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::config("data.preset", format!("unknown preset {s:?}")))
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `u = (0, sin x, 0)` in units where `x` runs over one period.
pub fn single_mode(torus: &TorusSpec) -> SpectralField {
    let mut f = SpectralField::zero(*torus);
    f.insert_pair(WaveVector::new(1, 0, 0), [c(0.0, 0.0), c(0.0, -0.5), c(0.0, 0.0)]);
    f
}

/// `u = (sin x cos y, −cos x sin y, 0)`, a steady Euler flow that decays as
/// a single Stokes eigenfunction.
pub fn taylor_green(torus: &TorusSpec) -> SpectralField {
    let mut f = SpectralField::zero(*torus);
    f.insert_pair(WaveVector::new(1, 1, 0), [c(0.0, -0.25), c(0.0, 0.25), c(0.0, 0.0)]);
    f.insert_pair(WaveVector::new(1, -1, 0), [c(0.0, -0.25), c(0.0, -0.25), c(0.0, 0.0)]);
    f
}

/// Random solenoidal field on `pairs` wavevector pairs with components in
/// `[-band, band]`.
pub fn random_solenoidal(torus: &TorusSpec, pairs: usize, band: i32, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    leray_project(&random_band_limited(torus, pairs, band, &mut rng)).pruned()
}

/// `Σ g_j w_j` with `g_j` uniform in `[-1, 1]`.
pub fn random_in_basis(basis: &BasisSpec, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    basis.to_field(&g).expect("coefficient vector matches the basis")
}

fn scaled_to_enstrophy(u: SpectralField, target: f64) -> SpectralField {
    let e = enstrophy(&u);
    if e == 0.0 {
        u
    } else {
        u.scale((target / e).sqrt())
    }
}

/// Decaying profile `(1 + |x|²)^{-3/2} (x × c)`, cut off at half the box,
/// projected onto `basis` and scaled to enstrophy `10⁻²`.
pub fn clay_class_small(basis: &BasisSpec) -> Result<SpectralField> {
    let torus = basis.torus();
    let l = torus.period();
    let grid = torus.with_grid(torus.grid().max(32))?;
    let cutoff = CutoffSpec::new((l / 2.0).max(1.0 + 1e-9))?;
    let profile = Profile::Clay {
        amplitude: 1.0,
        axis: [0.2, -0.3, 1.0],
    };
    let image = |x: f64| x - l * (x / l).round();
    let sampled = RealGridField::from_fn(grid, |x| {
        let y = [image(x[0]), image(x[1]), image(x[2])];
        let eta = cutoff.eval(y);
        let v = profile.eval(y);
        [eta * v[0], eta * v[1], eta * v[2]]
    });
    let u = leray_project(&grid_to_spectral(&sampled).without_mean());
    Ok(scaled_to_enstrophy(basis.project_field(&u)?, 1e-2))
}

/// Large-amplitude random data in the basis, for exercising blow-up and
/// underflow reporting. Enstrophy is set to `5·10⁵`.
pub fn stress_large(basis: &BasisSpec, seed: u64) -> Result<SpectralField> {
    let low = BasisSpec::from_modes(*basis.torus(), basis.reps().into_iter().take(8))?;
    let u = random_in_basis(&low, seed);
    Ok(scaled_to_enstrophy(basis.project_field(&u)?, 5e5))
}

/// Random data on the first eight wavevector pairs of `basis`, scaled to
/// unit `L²` norm.
pub fn random_8_mode(basis: &BasisSpec, seed: u64) -> Result<SpectralField> {
    let low = BasisSpec::from_modes(*basis.torus(), basis.reps().into_iter().take(8))?;
    let u = basis.project_field(&random_in_basis(&low, seed))?;
    let n = u.l2_norm();
    Ok(if n > 0.0 { u.scale(1.0 / n) } else { u })
}
