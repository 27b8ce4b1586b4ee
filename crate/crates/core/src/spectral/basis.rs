use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{cdot_real, Coeff, SpectralField, TorusSpec, WaveVector, CZERO};
use crate::error::{Error, Result};

/// Real or imaginary part of the Fourier pair `e^{±iκ·x}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Parity {
    Cos,
    Sin,
}

/// One real orthonormal eigenfunction
/// `w = √2 L^{-3/2} ε cos(κ·x)` or `w = √2 L^{-3/2} ε sin(κ·x)`,
/// with `k` the canonical representative of `{k, -k}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasisFunction {
    pub k: WaveVector,
    /// 0 or 1, selecting ε₁ or ε₂.
    pub polarization: u8,
    pub parity: Parity,
    pub eps: [f64; 3],
    pub lambda: f64,
}

impl BasisFunction {
    /// Fourier coefficient on the canonical half, `ŵ(k)`.
    pub fn coeff_plus(&self, torus: &TorusSpec) -> Coeff {
        let c = amplitude(torus);
        let a = match self.parity {
            Parity::Cos => Complex64::new(c, 0.0),
            Parity::Sin => Complex64::new(0.0, -c),
        };
        [a * self.eps[0], a * self.eps[1], a * self.eps[2]]
    }

    /// Fourier coefficient at `sign * k` for `sign = ±1`.
    pub fn coeff_at_sign(&self, torus: &TorusSpec, sign: i32) -> Coeff {
        let p = self.coeff_plus(torus);
        if sign > 0 {
            p
        } else {
            [p[0].conj(), p[1].conj(), p[2].conj()]
        }
    }

    /// `⟨F, w⟩` read off the canonical coefficient `F̂(k)`.
    pub fn project_coeff(&self, torus: &TorusSpec, fk: &Coeff) -> f64 {
        let s = cdot_real(fk, &self.eps) * (2.0 * torus.volume() * amplitude(torus));
        match self.parity {
            Parity::Cos => s.re,
            Parity::Sin => -s.im,
        }
    }
}

/// `1 / (√2 L^{3/2})`, the complex amplitude of a real basis function.
#[inline]
pub(crate) fn amplitude(torus: &TorusSpec) -> f64 {
    1.0 / (std::f64::consts::SQRT_2 * torus.period().powf(1.5))
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// The two unit polarizations orthogonal to `k`. The unnormalized vectors
/// are integer cross products, so `k·ε = 0` holds exactly before scaling.
pub fn polarizations(k: WaveVector) -> [[f64; 3]; 2] {
    let kv = k.as_f64();
    let a = if k.0[0] == 0 && k.0[1] == 0 {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let e1 = cross(kv, a);
    let e2 = cross(kv, e1);
    [normalize(e1), normalize(e2)]
}

/// Ordered real divergence-free basis on a torus.
///
/// Each canonical wavevector contributes four functions in the order
/// (ε₁,cos), (ε₁,sin), (ε₂,cos), (ε₂,sin). Wavevectors are sorted by
/// `|k|²` and then lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisSpec {
    torus: TorusSpec,
    functions: Vec<BasisFunction>,
    /// First basis index of each canonical wavevector.
    index: BTreeMap<WaveVector, usize>,
}

impl BasisSpec {
    /// All nonzero modes with `|k| ≤ radius`.
    pub fn ball(torus: TorusSpec, radius: f64) -> Result<Self> {
        if !(radius >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "basis radius must be at least 1, got {radius}"
            )));
        }
        let r = radius.floor() as i32;
        let r2 = radius * radius;
        let mut reps = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    let k = WaveVector::new(a, b, c);
                    if k.is_canonical() && (k.norm_sq() as f64) <= r2 + 1e-9 {
                        reps.push(k);
                    }
                }
            }
        }
        Self::from_modes(torus, reps)
    }

    /// The first `count` canonical wavevectors in basis order.
    pub fn first_pairs(torus: TorusSpec, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArgument("basis needs at least one mode".into()));
        }
        let mut radius = 1.0f64;
        loop {
            let b = Self::ball(torus, radius)?;
            if b.reps().len() >= count {
                let reps: Vec<_> = b.reps().into_iter().take(count).collect();
                return Self::from_modes(torus, reps);
            }
            radius += 1.0;
        }
    }

    /// Basis from an explicit list of wavevectors. Either sign may be given;
    /// duplicates and the zero mode are rejected.
    pub fn from_modes<I: IntoIterator<Item = WaveVector>>(torus: TorusSpec, modes: I) -> Result<Self> {
        let mut reps = BTreeSet::new();
        for k in modes {
            if k.is_zero() {
                return Err(Error::InvalidArgument("the zero mode is not a basis mode".into()));
            }
            let (rep, _) = k.canonical();
            if !reps.insert(rep) {
                return Err(Error::InvalidArgument(format!("duplicate basis mode {rep}")));
            }
        }
        let mut reps: Vec<_> = reps.into_iter().collect();
        reps.sort_by(WaveVector::basis_cmp);
        let mut functions = Vec::with_capacity(4 * reps.len());
        let mut index = BTreeMap::new();
        for k in reps {
            index.insert(k, functions.len());
            let lambda = torus.eigenvalue(k);
            for (p, eps) in polarizations(k).into_iter().enumerate() {
                for parity in [Parity::Cos, Parity::Sin] {
                    functions.push(BasisFunction {
                        k,
                        polarization: p as u8,
                        parity,
                        eps,
                        lambda,
                    });
                }
            }
        }
        Ok(Self {
            torus,
            functions,
            index,
        })
    }

    /// The first `n` functions (the Galerkin space `H_n`).
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate a basis of {} functions to {n}",
                self.len()
            )));
        }
        let functions = self.functions[..n].to_vec();
        let mut index = BTreeMap::new();
        for (j, f) in functions.iter().enumerate() {
            index.entry(f.k).or_insert(j);
        }
        Ok(Self {
            torus: self.torus,
            functions,
            index,
        })
    }

    pub fn torus(&self) -> &TorusSpec {
        &self.torus
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[BasisFunction] {
        &self.functions
    }

    pub fn function(&self, j: usize) -> &BasisFunction {
        &self.functions[j]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.functions.iter().map(|f| f.lambda).collect()
    }

    /// Canonical wavevectors in basis order.
    pub fn reps(&self) -> Vec<WaveVector> {
        let mut v: Vec<_> = self.index.iter().map(|(k, &j)| (j, *k)).collect();
        v.sort();
        v.into_iter().map(|(_, k)| k).collect()
    }

    /// Basis indices belonging to canonical wavevector `k`.
    pub fn indices_of(&self, k: WaveVector) -> std::ops::Range<usize> {
        match self.index.get(&k) {
            None => 0..0,
            Some(&j) => {
                let mut e = j;
                while e < self.functions.len() && self.functions[e].k == k {
                    e += 1;
                }
                j..e
            }
        }
    }

    pub fn first_index(&self, k: WaveVector) -> Option<usize> {
        self.index.get(&k).copied()
    }

    /// All wavevectors `±k` carried by the basis.
    pub fn mode_set(&self) -> ModeSet {
        ModeSet::from_reps(self.index.keys().copied())
    }

    pub fn band_limit(&self) -> i32 {
        self.index.keys().map(|k| k.max_abs_component()).max().unwrap_or(0)
    }

    pub fn max_norm(&self) -> f64 {
        self.index
            .keys()
            .map(|k| (k.norm_sq() as f64).sqrt())
            .fold(0.0, f64::max)
    }

    /// `Σ_j g_j w_j`.
    pub fn to_field(&self, g: &[f64]) -> Result<SpectralField> {
        if g.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: g.len(),
            });
        }
        let mut acc: BTreeMap<WaveVector, Coeff> = BTreeMap::new();
        for (f, &gj) in self.functions.iter().zip(g) {
            let e = acc.entry(f.k).or_insert(CZERO);
            let c = f.coeff_plus(&self.torus);
            for i in 0..3 {
                e[i] += c[i] * gj;
            }
        }
        Ok(SpectralField::from_half(self.torus, acc))
    }

    /// Coefficients `⟨F, w_j⟩` for every basis function (the `𝒫_n` projection).
    pub fn project(&self, f: &SpectralField) -> Result<Vec<f64>> {
        if !self.torus.same_as(f.torus()) {
            return Err(Error::TorusMismatch);
        }
        Ok(self
            .functions
            .iter()
            .map(|w| match f.get_ref(&w.k) {
                Some(c) => w.project_coeff(&self.torus, c),
                None => 0.0,
            })
            .collect())
    }

    /// `𝒫_n F` as a field.
    pub fn project_field(&self, f: &SpectralField) -> Result<SpectralField> {
        self.to_field(&self.project(f)?)
    }

    /// SHA-256 over the torus period and the ordered function list.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.torus.period().to_le_bytes());
        for f in &self.functions {
            for c in f.k.0 {
                h.update(c.to_le_bytes());
            }
            h.update([f.polarization, f.parity as u8]);
        }
        hex::encode(h.finalize())
    }
}

/// Set of wavevectors, closed under negation when built from a basis.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModeSet(BTreeSet<WaveVector>);

impl ModeSet {
    pub fn from_reps<I: IntoIterator<Item = WaveVector>>(reps: I) -> Self {
        let mut s = BTreeSet::new();
        for k in reps {
            s.insert(k);
            s.insert(-k);
        }
        ModeSet(s)
    }

    pub fn from_field(f: &SpectralField) -> Self {
        ModeSet(f.modes().collect())
    }

    pub fn contains(&self, k: &WaveVector) -> bool {
        self.0.contains(k)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &WaveVector> {
        self.0.iter()
    }

    /// `{a + b}` over both sets, including the zero mode when it arises.
    pub fn minkowski_sum(&self, other: &ModeSet) -> ModeSet {
        let mut s = BTreeSet::new();
        for a in &self.0 {
            for b in &other.0 {
                s.insert(*a + *b);
            }
        }
        ModeSet(s)
    }

    pub fn union(&self, other: &ModeSet) -> ModeSet {
        ModeSet(self.0.union(&other.0).copied().collect())
    }

    pub fn band_limit(&self) -> i32 {
        self.0.iter().map(|k| k.max_abs_component()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;
    use crate::spectral::{enstrophy, inner_product};

    fn torus() -> TorusSpec {
        TorusSpec::two_pi(16).unwrap()
    }

    #[test]
    fn polarizations_are_orthonormal_and_transverse() {
        for k in [
            WaveVector::new(1, 0, 0),
            WaveVector::new(0, 0, 3),
            WaveVector::new(0, 0, -1),
            WaveVector::new(2, -1, 5),
        ] {
            let [e1, e2] = polarizations(k);
            let kv = k.as_f64();
            assert!(super::super::dot3(&e1, &kv).abs() < 1e-15);
            assert!(super::super::dot3(&e2, &kv).abs() < 1e-14);
            assert!(super::super::dot3(&e1, &e2).abs() < 1e-15);
            assert!((super::super::dot3(&e1, &e1) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ball_counts() {
        // 6 modes at |k|=1, 12 at √2, 8 at √3 -> 13 canonical pairs within √3.
        let b = BasisSpec::ball(torus(), 3f64.sqrt()).unwrap();
        assert_eq!(b.reps().len(), 13);
        assert_eq!(b.len(), 52);
        let b = BasisSpec::ball(torus(), 4.0).unwrap();
        assert_eq!(b.len(), 512);
    }

    #[test]
    fn ordering_is_by_shell_then_lex() {
        let b = BasisSpec::first_pairs(torus(), 8).unwrap();
        let reps = b.reps();
        assert_eq!(reps[0], WaveVector::new(0, 0, 1));
        assert_eq!(reps[3], WaveVector::new(0, 1, -1));
        for w in reps.windows(2) {
            assert_eq!(w[0].basis_cmp(&w[1]), Ordering::Less);
        }
        assert_eq!(b.len(), 32);
    }

    #[test]
    fn basis_is_orthonormal() {
        let b = BasisSpec::first_pairs(TorusSpec::new(3.0, 8).unwrap(), 5).unwrap();
        let n = b.len();
        for i in 0..n {
            let mut ei = vec![0.0; n];
            ei[i] = 1.0;
            let wi = b.to_field(&ei).unwrap();
            assert!(wi.divergence_ratio() < 1e-15);
            let p = b.project(&wi).unwrap();
            for (j, pj) in p.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((pj - want).abs() < 1e-13, "{i} {j} {pj}");
            }
            assert!((inner_product(&wi, &wi).unwrap() - 1.0).abs() < 1e-13);
            let lam = b.function(i).lambda;
            assert!((enstrophy(&wi) - lam).abs() < 1e-12 * lam);
        }
    }

    #[test]
    fn truncation_keeps_prefix() {
        let b = BasisSpec::ball(torus(), 2.0).unwrap();
        let t = b.truncate(10).unwrap();
        assert_eq!(t.functions(), &b.functions()[..10]);
        assert_eq!(t.indices_of(t.function(9).k), 8..10);
        assert!(b.truncate(0).is_err());
        assert_ne!(t.hash(), b.hash());
    }

    #[test]
    fn from_modes_rejects_bad_input() {
        assert!(BasisSpec::from_modes(torus(), [WaveVector::ZERO]).is_err());
        let k = WaveVector::new(1, 2, 0);
        assert!(BasisSpec::from_modes(torus(), [k, -k]).is_err());
    }
}
