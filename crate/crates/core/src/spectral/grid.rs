use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{Coeff, SpectralField, TorusSpec, WaveVector, CZERO};
use crate::error::{Error, Result};

/// Real 3-vector samples at the points `x = (a, b, c) L / G`.
///
/// Storage is row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct RealGridField {
    torus: TorusSpec,
    data: Vec<[f64; 3]>,
}

impl RealGridField {
    pub fn zero(torus: TorusSpec) -> Self {
        let g = torus.grid();
        Self {
            torus,
            data: vec![[0.0; 3]; g * g * g],
        }
    }

    /// Sample a closed-form profile at every grid point.
    pub fn from_fn<F: Fn([f64; 3]) -> [f64; 3] + Sync>(torus: TorusSpec, f: F) -> Self {
        let g = torus.grid();
        let h = torus.period() / g as f64;
        let data = (0..g * g * g)
            .into_par_iter()
            .map(|idx| {
                let (a, b, c) = (idx / (g * g), (idx / g) % g, idx % g);
                f([a as f64 * h, b as f64 * h, c as f64 * h])
            })
            .collect();
        Self { torus, data }
    }

    pub fn torus(&self) -> &TorusSpec {
        &self.torus
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.data
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> [f64; 3] {
        let g = self.torus.grid();
        self.data[(a * g + b) * g + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Quadrature `∫|u|² dx`, exact for band-limited fields.
    pub fn l2_norm(&self) -> f64 {
        let g = self.torus.grid() as f64;
        let s: f64 = self
            .data
            .iter()
            .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
            .sum();
        (s * self.torus.volume() / (g * g * g)).sqrt()
    }
}

/// Three-dimensional complex FFT of side `G`, applied axis by axis.
///
/// The inverse is unnormalized (`u(x) = Σ û e^{iκ·x}`); the forward pass
/// divides by `G³`.
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
        let s = 1.0 / (self.n * self.n * self.n) as f64;
        data.par_iter_mut().for_each(|x| *x *= s);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        // Last axis: contiguous lines.
        data.par_chunks_mut(n).for_each(|line| fft.process(line));
        // Middle axis: each a-slab is independent.
        data.par_chunks_mut(n * n).for_each(|slab| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for c in 0..n {
                for b in 0..n {
                    buf[b] = slab[b * n + c];
                }
                fft.process(&mut buf);
                for b in 0..n {
                    slab[b * n + c] = buf[b];
                }
            }
        });
        // First axis: gather columns per (b, c).
        let cols: Vec<Vec<Complex64>> = (0..n * n)
            .into_par_iter()
            .map(|bc| {
                let mut buf: Vec<Complex64> = (0..n).map(|a| data[a * n * n + bc]).collect();
                fft.process(&mut buf);
                buf
            })
            .collect();
        for (bc, col) in cols.into_iter().enumerate() {
            for (a, v) in col.into_iter().enumerate() {
                data[a * n * n + bc] = v;
            }
        }
    }
}

#[inline]
fn wrap(k: i32, g: usize) -> usize {
    k.rem_euclid(g as i32) as usize
}

#[inline]
fn unwrap(i: usize, g: usize) -> Option<i32> {
    let half = (g / 2) as i32;
    let k = if i < g / 2 { i as i32 } else { i as i32 - g as i32 };
    (k.abs() < half).then_some(k)
}

/// Evaluate a band-limited field on its torus grid.
pub fn spectral_to_grid(f: &SpectralField) -> Result<RealGridField> {
    spectral_to_grid_with(f, &Fft3::new(f.torus().grid()))
}

pub(crate) fn spectral_to_grid_with(f: &SpectralField, fft: &Fft3) -> Result<RealGridField> {
    let g = f.torus().grid();
    debug_assert_eq!(fft.size(), g);
    if 2 * f.band_limit() >= g as i32 {
        return Err(Error::Resolution(format!(
            "band limit {} needs a grid above {}, have {g}",
            f.band_limit(),
            2 * f.band_limit()
        )));
    }
    let mut comps = vec![vec![Complex64::new(0.0, 0.0); g * g * g]; 3];
    for (k, c) in f.iter() {
        let idx = (wrap(k.0[0], g) * g + wrap(k.0[1], g)) * g + wrap(k.0[2], g);
        for i in 0..3 {
            comps[i][idx] = c[i];
        }
    }
    comps.par_iter_mut().for_each(|v| fft.inverse(v));
    let data = (0..g * g * g)
        .map(|j| [comps[0][j].re, comps[1][j].re, comps[2][j].re])
        .collect();
    Ok(RealGridField {
        torus: *f.torus(),
        data,
    })
}

/// Fourier coefficients of grid data. The Nyquist plane is dropped and the
/// canonical half is mirrored so the result is exactly Hermitian.
pub fn grid_to_spectral(u: &RealGridField) -> SpectralField {
    grid_to_spectral_filtered(u, &Fft3::new(u.torus().grid()), |_| true)
}

pub(crate) fn grid_to_spectral_filtered<F: Fn(&WaveVector) -> bool>(
    u: &RealGridField,
    fft: &Fft3,
    keep: F,
) -> SpectralField {
    let g = u.torus().grid();
    let mut comps: Vec<Vec<Complex64>> = (0..3)
        .map(|i| u.data.iter().map(|v| Complex64::new(v[i], 0.0)).collect())
        .collect();
    comps.par_iter_mut().for_each(|v| fft.forward(v));
    let mut half: BTreeMap<WaveVector, Coeff> = BTreeMap::new();
    for a in 0..g {
        let Some(ka) = unwrap(a, g) else { continue };
        for b in 0..g {
            let Some(kb) = unwrap(b, g) else { continue };
            for c in 0..g {
                let Some(kc) = unwrap(c, g) else { continue };
                let k = WaveVector::new(ka, kb, kc);
                if !(k.is_canonical() || k.is_zero()) || !(keep(&k) || keep(&-k)) {
                    continue;
                }
                let idx = (a * g + b) * g + c;
                let mut co = CZERO;
                for i in 0..3 {
                    co[i] = comps[i][idx];
                }
                half.insert(k, co);
            }
        }
    }
    SpectralField::from_half(*u.torus(), half)
}
