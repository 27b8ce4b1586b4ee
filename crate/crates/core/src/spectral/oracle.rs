use num_complex::Complex64;

use super::grid::{grid_to_spectral_filtered, spectral_to_grid_with, Fft3};
use super::{SpectralField, WaveVector};
use crate::error::{Error, Result};

/// `(u·∇)v` evaluated pointwise on the torus grid with spectral derivatives.
///
/// When `band(u) + band(v) < G/2` the product is alias-free and every mode
/// of its support is returned. Otherwise both bands must lie below `G/3`;
/// aliases then only reach modes outside the input band, and the result is
/// truncated to `|k_i| ≤ max(band(u), band(v))`.
pub fn nonlinear_grid_oracle(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    if !u.torus().same_as(v.torus()) {
        return Err(Error::TorusMismatch);
    }
    let torus = *u.torus();
    let g = torus.grid() as i32;
    let (bu, bv) = (u.band_limit(), v.band_limit());
    let cap = if 2 * (bu + bv) < g {
        bu + bv
    } else if 3 * bu.max(bv) < g {
        bu.max(bv)
    } else {
        return Err(Error::Resolution(format!(
            "grid {g} cannot resolve bands {bu} and {bv} without aliasing"
        )));
    };
    if u.is_empty() || v.is_empty() {
        return Ok(SpectralField::zero(torus));
    }
    let fft = Fft3::new(torus.grid());
    let ug = spectral_to_grid_with(u, &fft)?;
    let mut out = super::RealGridField::zero(torus);
    for j in 0..3 {
        // ∂_j v = Σ iκ_j v̂ e^{iκ·x}
        let dj = v.map_hermitian(|k, c| {
            let ik = Complex64::new(0.0, torus.kappa(k)[j]);
            [c[0] * ik, c[1] * ik, c[2] * ik]
        });
        let dg = spectral_to_grid_with(&dj, &fft)?;
        for ((o, uu), d) in out.data_mut().iter_mut().zip(ug.data()).zip(dg.data()) {
            for i in 0..3 {
                o[i] += uu[j] * d[i];
            }
        }
    }
    let keep = |k: &WaveVector| k.max_abs_component() <= cap;
    Ok(grid_to_spectral_filtered(&out, &fft, keep).pruned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{leray_project, Coeff, TorusSpec};

    fn re(v: [f64; 3]) -> Coeff {
        [
            Complex64::new(v[0], 0.0),
            Complex64::new(v[1], 0.0),
            Complex64::new(v[2], 0.0),
        ]
    }

    fn im(v: [f64; 3]) -> Coeff {
        [
            Complex64::new(0.0, v[0]),
            Complex64::new(0.0, v[1]),
            Complex64::new(0.0, v[2]),
        ]
    }

    #[test]
    fn zero_input() {
        let t = TorusSpec::two_pi(8).unwrap();
        let z = SpectralField::zero(t);
        let v = SpectralField::from_half(t, [(WaveVector::new(1, 0, 0), re([0.0, 1.0, 0.0]))]);
        assert!(nonlinear_grid_oracle(&z, &v).unwrap().is_empty());
    }

    #[test]
    fn shear_flow_does_not_self_advect() {
        // u = (0, sin x, 0): sin x = (e^{ix} - e^{-ix}) / 2i
        let t = TorusSpec::two_pi(8).unwrap();
        let u = SpectralField::from_half(t, [(WaveVector::new(1, 0, 0), im([0.0, -0.5, 0.0]))]);
        let x = [0.3, 1.1, 2.0];
        assert!((u.evaluate_at(x)[1] - 0.3f64.sin()).abs() < 1e-15);
        let n = nonlinear_grid_oracle(&u, &u).unwrap();
        assert!(n.max_abs() < 1e-15, "{}", n.max_abs());
    }

    #[test]
    fn taylor_green_nonlinearity_is_a_gradient() {
        let t = TorusSpec::two_pi(16).unwrap();
        let u = crate::cli::presets::taylor_green(&t);
        let n = nonlinear_grid_oracle(&u, &u).unwrap();
        // (u·∇)u = (sin 2x, sin 2y, 0) / 2 = -∇(cos 2x + cos 2y) / 4
        assert!(n.l2_norm() > 0.1);
        assert!(leray_project(&n).l2_norm() < 1e-10 * n.l2_norm());
        let p = n.evaluate_at([0.4, 0.9, 0.0]);
        assert!((p[0] - 0.5 * 0.8f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn resolution_is_checked() {
        let t = TorusSpec::two_pi(8).unwrap();
        let u = SpectralField::from_half(t, [(WaveVector::new(3, 0, 0), re([0.0, 1.0, 0.0]))]);
        assert!(matches!(nonlinear_grid_oracle(&u, &u), Err(Error::Resolution(_))));
    }
}
