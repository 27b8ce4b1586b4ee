use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{cadd, cconj, cdot_real, cinner, cnorm_sqr, cscale, Coeff, TorusSpec, WaveVector, CZERO};
use crate::error::{Error, Result};

/// Finite set of Fourier coefficients of a real 3-vector field on a torus.
///
/// Both `k` and `-k` are stored explicitly. Constructors that take a single
/// half (`insert_pair`) fill in the mirror so the Hermitian symmetry holds
/// exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    torus: TorusSpec,
    modes: BTreeMap<WaveVector, Coeff>,
}

impl SpectralField {
    pub fn zero(torus: TorusSpec) -> Self {
        Self {
            torus,
            modes: BTreeMap::new(),
        }
    }

    pub fn torus(&self) -> &TorusSpec {
        &self.torus
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WaveVector, &Coeff)> {
        self.modes.iter()
    }

    pub fn modes(&self) -> impl Iterator<Item = WaveVector> + '_ {
        self.modes.keys().copied()
    }

    pub fn get(&self, k: WaveVector) -> Coeff {
        self.modes.get(&k).copied().unwrap_or(CZERO)
    }

    pub fn get_ref(&self, k: &WaveVector) -> Option<&Coeff> {
        self.modes.get(k)
    }

    pub fn contains(&self, k: &WaveVector) -> bool {
        self.modes.contains_key(k)
    }

    /// Set a single coefficient without touching its mirror.
    pub fn insert_raw(&mut self, k: WaveVector, c: Coeff) {
        self.modes.insert(k, c);
    }

    /// Set `û(k) = c` and `û(-k) = conj(c)`. At `k = 0` only the real part
    /// is kept.
    pub fn insert_pair(&mut self, k: WaveVector, c: Coeff) {
        if k.is_zero() {
            let re = [
                Complex64::new(c[0].re, 0.0),
                Complex64::new(c[1].re, 0.0),
                Complex64::new(c[2].re, 0.0),
            ];
            self.modes.insert(k, re);
        } else {
            self.modes.insert(k, c);
            self.modes.insert(-k, cconj(&c));
        }
    }

    /// Add `c` at `k` and `conj(c)` at `-k`.
    pub fn add_pair(&mut self, k: WaveVector, c: Coeff) {
        let cur = self.get(k);
        let mut next = cur;
        cadd(&mut next, &c);
        self.insert_pair(k, next);
    }

    pub fn remove(&mut self, k: &WaveVector) -> Option<Coeff> {
        self.modes.remove(k)
    }

    /// Build a field from canonical-half coefficients; mirrors are generated.
    pub fn from_half<I>(torus: TorusSpec, half: I) -> Self
    where
        I: IntoIterator<Item = (WaveVector, Coeff)>,
    {
        let mut f = Self::zero(torus);
        for (k, c) in half {
            f.insert_pair(k, c);
        }
        f
    }

    /// Map every canonical mode through `op` and rebuild the mirror half from
    /// the result, so the output is Hermitian by construction.
    pub(crate) fn map_hermitian<F>(&self, mut op: F) -> Self
    where
        F: FnMut(WaveVector, &Coeff) -> Coeff,
    {
        let mut out = Self::zero(self.torus);
        for (k, c) in &self.modes {
            if k.is_canonical() || k.is_zero() {
                out.insert_pair(*k, op(*k, c));
            } else if !self.modes.contains_key(&-*k) {
                // Orphan half: fold it back through its mirror.
                let m = op(-*k, &cconj(c));
                out.insert_pair(-*k, m);
            }
        }
        out
    }

    pub fn mean(&self) -> Coeff {
        self.get(WaveVector::ZERO)
    }

    pub fn has_nonzero_mean(&self) -> bool {
        self.modes
            .get(&WaveVector::ZERO)
            .map(|c| cnorm_sqr(c) > 0.0)
            .unwrap_or(false)
    }

    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.modes.remove(&WaveVector::ZERO);
        out
    }

    /// Largest `|û(k) - conj(û(-k))|` over all stored modes.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, c) in &self.modes {
            let m = self.get(-*k);
            let d = cnorm_sqr(&[c[0] - m[0].conj(), c[1] - m[1].conj(), c[2] - m[2].conj()]);
            worst = worst.max(d.sqrt());
        }
        worst
    }

    pub fn check_hermitian(&self) -> Result<()> {
        for (k, c) in &self.modes {
            let m = self.get(-*k);
            if cconj(c) != m {
                return Err(Error::NotHermitian(*k));
            }
        }
        Ok(())
    }

    /// `sqrt(Σ |κ·û|²) / sqrt(Σ |κ|²|û|²)`, zero for a zero field.
    pub fn divergence_ratio(&self) -> f64 {
        let mut div = 0.0;
        let mut tot = 0.0;
        for (k, c) in &self.modes {
            let kap = self.torus.kappa(*k);
            div += cdot_real(c, &kap).norm_sqr();
            tot += (kap[0] * kap[0] + kap[1] * kap[1] + kap[2] * kap[2]) * cnorm_sqr(c);
        }
        if tot == 0.0 {
            0.0
        } else {
            (div / tot).sqrt()
        }
    }

    pub fn is_solenoidal(&self, tol: f64) -> bool {
        self.divergence_ratio() <= tol
    }

    /// `‖div u‖₂` computed spectrally.
    pub fn divergence_norm(&self) -> f64 {
        let s: f64 = self
            .modes
            .iter()
            .map(|(k, c)| cdot_real(c, &self.torus.kappa(*k)).norm_sqr())
            .sum();
        (self.torus.volume() * s).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.torus.volume() * self.modes.values().map(cnorm_sqr).sum::<f64>()).sqrt()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.modes
            .values()
            .map(|c| cnorm_sqr(c).sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest `|k_i|` over stored modes (the per-axis band limit).
    pub fn band_limit(&self) -> i32 {
        self.modes
            .keys()
            .map(|k| k.max_abs_component())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.modes.values_mut() {
            for x in c.iter_mut() {
                *x *= s;
            }
        }
        out
    }

    /// `self + s * other`, union of supports.
    pub fn axpy(&self, s: f64, other: &SpectralField) -> Result<Self> {
        if !self.torus.same_as(&other.torus) {
            return Err(Error::TorusMismatch);
        }
        let mut out = self.clone();
        out.add_scaled_in_place(s, other);
        Ok(out)
    }

    pub(crate) fn add_scaled_in_place(&mut self, s: f64, other: &SpectralField) {
        let sc = Complex64::new(s, 0.0);
        for (k, c) in &other.modes {
            let e = self.modes.entry(*k).or_insert(CZERO);
            cadd(e, &cscale(c, sc));
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// `Δu`: multiply every mode by `-|κ|²`.
    pub fn laplacian(&self) -> Self {
        let mut out = self.clone();
        for (k, c) in out.modes.iter_mut() {
            let s = Complex64::new(-self.torus.eigenvalue(*k), 0.0);
            *c = cscale(c, s);
        }
        out
    }

    /// Keep only the modes in `keep`.
    pub fn restrict<F: Fn(&WaveVector) -> bool>(&self, keep: F) -> Self {
        Self {
            torus: self.torus,
            modes: self
                .modes
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, c)| (*k, *c))
                .collect(),
        }
    }

    /// Drop coefficients that are exactly zero.
    pub fn pruned(&self) -> Self {
        self.restrict_values(|c| cnorm_sqr(c) > 0.0)
    }

    fn restrict_values<F: Fn(&Coeff) -> bool>(&self, keep: F) -> Self {
        Self {
            torus: self.torus,
            modes: self
                .modes
                .iter()
                .filter(|(_, c)| keep(c))
                .map(|(k, c)| (*k, *c))
                .collect(),
        }
    }

    /// Point value `u(x) = Σ_k û(k) e^{iκ·x}` (real part).
    pub fn evaluate_at(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, c) in &self.modes {
            let kap = self.torus.kappa(*k);
            let phase = kap[0] * x[0] + kap[1] * x[1] + kap[2] * x[2];
            let e = Complex64::new(phase.cos(), phase.sin());
            for i in 0..3 {
                out[i] += (c[i] * e).re;
            }
        }
        out
    }
}

fn project_coeff(k: WaveVector, c: &Coeff) -> Coeff {
    if k.is_zero() {
        return *c;
    }
    let kv = k.as_f64();
    let n2 = k.norm_sq() as f64;
    let d = cdot_real(c, &kv) / n2;
    [c[0] - d * kv[0], c[1] - d * kv[1], c[2] - d * kv[2]]
}

/// Leray projection `û - κ(κ·û)/|κ|²`, mode by mode. The mean mode passes
/// through unchanged.
pub fn leray_project(v: &SpectralField) -> SpectralField {
    v.map_hermitian(project_coeff)
}

/// Helmholtz–Weyl split `v = 𝒫v + ∇g`. The mean mode, if present, is
/// assigned to the solenoidal part.
pub fn gradient_decompose(v: &SpectralField) -> (SpectralField, SpectralField) {
    let sol = leray_project(v);
    let grad = v.map_hermitian(|k, c| {
        let p = project_coeff(k, c);
        [c[0] - p[0], c[1] - p[1], c[2] - p[2]]
    });
    (sol, grad)
}

/// Periodic Stokes problem `-Δv + ∇p = f`, `div v = 0`: `v̂ = (𝒫f)̂ / |κ|²`.
pub fn stokes_solve(f: &SpectralField) -> Result<SpectralField> {
    if f.has_nonzero_mean() {
        return Err(Error::NonzeroMean("Stokes forcing"));
    }
    let torus = *f.torus();
    let pf = leray_project(&f.without_mean());
    Ok(pf.map_hermitian(|k, c| cscale(c, Complex64::new(1.0 / torus.eigenvalue(k), 0.0))))
}

/// `∫ a·b dx = L³ Σ_k â(k)·conj(b̂(k))`.
pub fn inner_product(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    if !a.torus().same_as(b.torus()) {
        return Err(Error::TorusMismatch);
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut s = Complex64::new(0.0, 0.0);
    for (k, c) in small.iter() {
        if let Some(d) = large.get_ref(k) {
            s += cinner(c, d);
        }
    }
    Ok(a.torus().volume() * s.re)
}

/// `‖∇v‖₂² = L³ Σ |κ|² |v̂|²`.
pub fn enstrophy(v: &SpectralField) -> f64 {
    let t = v.torus();
    t.volume()
        * v.iter()
            .map(|(k, c)| t.eigenvalue(*k) * cnorm_sqr(c))
            .sum::<f64>()
}

/// `‖Δv‖₂² = L³ Σ |κ|⁴ |v̂|²`.
pub fn palinstrophy(v: &SpectralField) -> f64 {
    let t = v.torus();
    t.volume()
        * v.iter()
            .map(|(k, c)| t.eigenvalue(*k).powi(2) * cnorm_sqr(c))
            .sum::<f64>()
}
