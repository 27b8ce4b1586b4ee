//! Torus geometry, divergence-free Fourier basis and the spectral operators
//! acting on vector fields.
//!
//! Fields are written as `u(x) = Σ_k û(k) e^{iκ·x}` with `κ = 2πk/L`. Real
//! fields satisfy `û(-k) = conj(û(k))`, and every operator here keeps that
//! symmetry bit-for-bit.

mod basis;
mod field;
mod gn;
mod grid;
mod io;
mod oracle;
mod torus;

pub use basis::{polarizations, BasisFunction, BasisSpec, ModeSet, Parity};
pub use field::{
    enstrophy, gradient_decompose, inner_product, leray_project, palinstrophy, stokes_solve,
    SpectralField,
};
pub use gn::{gn_constant_probe, gn_fit, gn_sample, random_band_limited, GnFit, GnSample};
pub use grid::{grid_to_spectral, spectral_to_grid, Fft3, RealGridField};
pub use io::{field_from_json, field_to_json, fields_from_json, fields_to_json};
pub use oracle::nonlinear_grid_oracle;
pub use torus::{TorusSpec, WaveVector};

use num_complex::Complex64;

/// Complex Fourier coefficient of a 3-vector field at one wavevector.
pub type Coeff = [Complex64; 3];

pub(crate) const CZERO: Coeff = [Complex64::new(0.0, 0.0); 3];

#[inline]
pub(crate) fn cadd(a: &mut Coeff, b: &Coeff) {
    for i in 0..3 {
        a[i] += b[i];
    }
}

#[inline]
pub(crate) fn cscale(a: &Coeff, s: Complex64) -> Coeff {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub(crate) fn cconj(a: &Coeff) -> Coeff {
    [a[0].conj(), a[1].conj(), a[2].conj()]
}

/// `Σ_i a_i * v_i` for a real vector `v`.
#[inline]
pub(crate) fn cdot_real(a: &Coeff, v: &[f64; 3]) -> Complex64 {
    a[0] * v[0] + a[1] * v[1] + a[2] * v[2]
}

/// `Σ_i a_i * conj(b_i)`.
#[inline]
pub(crate) fn cinner(a: &Coeff, b: &Coeff) -> Complex64 {
    a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()
}

#[inline]
pub(crate) fn cnorm_sqr(a: &Coeff) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()
}

#[inline]
pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
