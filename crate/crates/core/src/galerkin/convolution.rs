use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{cdot_real, Coeff, ModeSet, SpectralField, WaveVector};

/// `(u·∇)v` by direct convolution: `out(p+q) += (û(p)·iκ_q) v̂(q)`.
///
/// Only the canonical half of the output is accumulated; the other half is
/// its mirror, so the result is exactly Hermitian. With a filter, output
/// modes outside it are never formed.
pub fn advect(u: &SpectralField, v: &SpectralField, filter: Option<&ModeSet>) -> Result<SpectralField> {
    if !u.torus().same_as(v.torus()) {
        return Err(Error::TorusMismatch);
    }
    let torus = *u.torus();
    let vk: Vec<(WaveVector, Coeff, [f64; 3])> = v
        .iter()
        .map(|(k, c)| (*k, *c, torus.kappa(*k)))
        .collect();
    let mut acc: HashMap<WaveVector, Coeff> = HashMap::new();
    for (p, up) in u.iter() {
        for (q, vq, kq) in &vk {
            let k = *p + *q;
            if !(k.is_canonical() || k.is_zero()) {
                continue;
            }
            if let Some(f) = filter {
                if !f.contains(&k) {
                    continue;
                }
            }
            let s = cdot_real(up, kq) * Complex64::new(0.0, 1.0);
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            let e = acc.entry(k).or_insert([Complex64::new(0.0, 0.0); 3]);
            for i in 0..3 {
                e[i] += s * vq[i];
            }
        }
    }
    let mut half: Vec<_> = acc.into_iter().collect();
    half.sort_by_key(|(k, _)| *k);
    Ok(SpectralField::from_half(torus, half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{nonlinear_grid_oracle, random_band_limited, leray_project, TorusSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_grid_oracle() {
        let t = TorusSpec::new(2.5, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let u = leray_project(&random_band_limited(&t, 10, 3, &mut rng));
            let v = random_band_limited(&t, 10, 3, &mut rng);
            let a = advect(&u, &v, None).unwrap();
            let b = nonlinear_grid_oracle(&u, &v).unwrap();
            let d = a.sub(&b).unwrap();
            assert!(d.max_abs() < 1e-12, "{}", d.max_abs());
            assert_eq!(a.hermitian_defect(), 0.0);
        }
    }

    #[test]
    fn filter_restricts_output() {
        let t = TorusSpec::two_pi(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_band_limited(&t, 6, 2, &mut rng);
        let full = advect(&u, &u, None).unwrap();
        let keep = ModeSet::from_reps([WaveVector::new(1, 0, 0), WaveVector::new(0, 1, 1)]);
        let part = advect(&u, &u, Some(&keep)).unwrap();
        assert_eq!(part.pruned(), full.restrict(|k| keep.contains(k)).pruned());
    }
}
