use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{BasisSpec, Fft3, SpectralField, TorusSpec, WaveVector};

/// Grid evaluation of `𝒫_n[(u·∇)u] = 𝒫_n[ω×u]` for fields whose band is at
/// most `band`. The grid side is the smallest power of two above
/// `2·band + K`, so every alias of the quadratic product lands outside the
/// basis band `K` and the projection is exact up to roundoff.
pub struct PseudoSpectral {
    basis: BasisSpec,
    torus: TorusSpec,
    fft: Fft3,
    band: i32,
    /// Grid index of `+k` and `-k` for every canonical basis wavevector.
    slots: Vec<(WaveVector, usize, usize, std::ops::Range<usize>)>,
}

fn grid_index(k: WaveVector, g: usize) -> usize {
    let w = |c: i32| c.rem_euclid(g as i32) as usize;
    (w(k.0[0]) * g + w(k.0[1])) * g + w(k.0[2])
}

impl PseudoSpectral {
    pub fn new(basis: &BasisSpec, band: i32) -> Result<Self> {
        let kb = basis.band_limit();
        let band = band.max(kb);
        let mut g = 4usize;
        while (g as i32) <= 2 * band + kb {
            g *= 2;
        }
        let torus = basis.torus().with_grid(g)?;
        let ranges = super::tensor::rep_ranges(basis);
        let slots = basis
            .reps()
            .into_iter()
            .map(|k| (k, grid_index(k, g), grid_index(-k, g), ranges[&k].clone()))
            .collect();
        Ok(Self {
            basis: basis.clone(),
            torus,
            fft: Fft3::new(g),
            band,
            slots,
        })
    }

    pub fn grid(&self) -> usize {
        self.torus.grid()
    }

    /// Scatter `Σ g_j w_j + extra` into spectral grid arrays.
    fn scatter(&self, g: &[f64], extra: Option<&SpectralField>) -> Result<Vec<Vec<Complex64>>> {
        let n = self.torus.grid();
        let mut u = vec![vec![Complex64::new(0.0, 0.0); n * n * n]; 3];
        let funcs = self.basis.functions();
        for (_, ip, im, r) in &self.slots {
            let mut c = [Complex64::new(0.0, 0.0); 3];
            for j in r.clone() {
                let w = funcs[j].coeff_plus(&self.torus);
                for d in 0..3 {
                    c[d] += w[d] * g[j];
                }
            }
            for d in 0..3 {
                u[d][*ip] += c[d];
                u[d][*im] += c[d].conj();
            }
        }
        if let Some(e) = extra {
            if e.band_limit() > self.band {
                return Err(Error::Resolution(format!(
                    "field band {} exceeds the planned band {}",
                    e.band_limit(),
                    self.band
                )));
            }
            for (k, c) in e.iter() {
                let ix = grid_index(*k, n);
                for d in 0..3 {
                    u[d][ix] += c[d];
                }
            }
        }
        Ok(u)
    }

    /// `⟨(u·∇)u, w_k⟩` for `u = Σ g_j w_j + extra`.
    pub fn project_self_advection(
        &self,
        g: &[f64],
        extra: Option<&SpectralField>,
        out: &mut [f64],
    ) -> Result<()> {
        if g.len() != self.basis.len() || out.len() != self.basis.len() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.len(),
                actual: g.len().min(out.len()),
            });
        }
        let n = self.torus.grid();
        let s = self.torus.scale();
        let mut u = self.scatter(g, extra)?;
        // ω̂ = iκ × û
        let mut w = vec![vec![Complex64::new(0.0, 0.0); n * n * n]; 3];
        let freq = |i: usize| -> f64 {
            let k = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
            s * k as f64
        };
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let ix = (a * n + b) * n + c;
                    if u[0][ix] == Complex64::new(0.0, 0.0)
                        && u[1][ix] == Complex64::new(0.0, 0.0)
                        && u[2][ix] == Complex64::new(0.0, 0.0)
                    {
                        continue;
                    }
                    let kap = [freq(a), freq(b), freq(c)];
                    let i = Complex64::new(0.0, 1.0);
                    w[0][ix] = i * (kap[1] * u[2][ix] - kap[2] * u[1][ix]);
                    w[1][ix] = i * (kap[2] * u[0][ix] - kap[0] * u[2][ix]);
                    w[2][ix] = i * (kap[0] * u[1][ix] - kap[1] * u[0][ix]);
                }
            }
        }
        u.par_iter_mut().chain(w.par_iter_mut()).for_each(|v| self.fft.inverse(v));
        let mut cross = vec![vec![Complex64::new(0.0, 0.0); n * n * n]; 3];
        {
            let (c0, rest) = cross.split_at_mut(1);
            let (c1, c2) = rest.split_at_mut(1);
            c0[0]
                .par_iter_mut()
                .zip(c1[0].par_iter_mut())
                .zip(c2[0].par_iter_mut())
                .enumerate()
                .for_each(|(ix, ((x, y), z))| {
                    let (w0, w1, w2) = (w[0][ix].re, w[1][ix].re, w[2][ix].re);
                    let (u0, u1, u2) = (u[0][ix].re, u[1][ix].re, u[2][ix].re);
                    *x = Complex64::new(w1 * u2 - w2 * u1, 0.0);
                    *y = Complex64::new(w2 * u0 - w0 * u2, 0.0);
                    *z = Complex64::new(w0 * u1 - w1 * u0, 0.0);
                });
        }
        cross.par_iter_mut().for_each(|v| self.fft.forward(v));
        let funcs = self.basis.functions();
        for (_, ip, _, r) in &self.slots {
            let fk = [cross[0][*ip], cross[1][*ip], cross[2][*ip]];
            for j in r.clone() {
                out[j] = funcs[j].project_coeff(&self.torus, &fk);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::TrilinearTensor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn agrees_with_tensor() {
        let basis = BasisSpec::ball(TorusSpec::new(4.0, 16).unwrap(), 3.0).unwrap();
        let a = TrilinearTensor::assemble(&basis);
        let ps = PseudoSpectral::new(&basis, 0).unwrap();
        assert_eq!(ps.grid(), 16);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let want = a.contract(&g).unwrap();
        let mut got = vec![0.0; g.len()];
        ps.project_self_advection(&g, None, &mut got).unwrap();
        let scale = want.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in want.iter().zip(&got) {
            assert!((x - y).abs() <= 1e-12 * scale, "{x} {y}");
        }
    }
}
