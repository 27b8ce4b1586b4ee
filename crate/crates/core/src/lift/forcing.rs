use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{factorial, MAX_ORDER};
use crate::error::{Error, Result};
use crate::spectral::{SpectralField, TorusSpec, WaveVector};

/// One forced pair `±k`: `a e^{iκ·x} + conj(a) e^{−iκ·x}`, multiplied by
/// `Σ_r c_r t^r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingMode {
    pub k: [i32; 3],
    /// `[re₁, im₁, re₂, im₂, re₃, im₃]`
    pub amplitude: [f64; 6],
    pub poly: Vec<f64>,
}

impl ForcingMode {
    fn amp(&self) -> [Complex64; 3] {
        let a = &self.amplitude;
        [
            Complex64::new(a[0], a[1]),
            Complex64::new(a[2], a[3]),
            Complex64::new(a[4], a[5]),
        ]
    }
}

/// Band-limited forcing, polynomial in time. Gradient components are
/// allowed; the pressure absorbs them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ForcingSpec {
    pub modes: Vec<ForcingMode>,
}

impl ForcingSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.modes
            .iter()
            .all(|m| m.amplitude.iter().all(|&x| x == 0.0) || m.poly.iter().all(|&c| c == 0.0))
    }

    /// Highest power of `t` present.
    pub fn degree(&self) -> usize {
        self.modes
            .iter()
            .map(|m| m.poly.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (i, m) in self.modes.iter().enumerate() {
            let k = WaveVector(m.k);
            if k.is_zero() {
                return Err(Error::config(
                    format!("forcing[{i}].k"),
                    "the mean mode cannot be forced",
                ));
            }
            if !seen.insert(k.canonical().0) {
                return Err(Error::config(
                    format!("forcing[{i}].k"),
                    format!("mode {k} (or its mirror) listed twice"),
                ));
            }
            if m.poly.len() > MAX_ORDER + 1 {
                return Err(Error::config(
                    format!("forcing[{i}].poly"),
                    format!("time degree must be at most {MAX_ORDER}"),
                ));
            }
            if m.amplitude.iter().chain(&m.poly).any(|x| !x.is_finite()) {
                return Err(Error::config(format!("forcing[{i}]"), "non-finite value"));
            }
        }
        Ok(())
    }

    /// Spatial field multiplying `t^r`.
    pub fn coefficient_field(&self, torus: &TorusSpec, r: usize) -> SpectralField {
        let mut f = SpectralField::zero(*torus);
        for m in &self.modes {
            let c = m.poly.get(r).copied().unwrap_or(0.0);
            if c != 0.0 {
                let a = m.amp();
                f.add_pair(WaveVector(m.k), [a[0] * c, a[1] * c, a[2] * c]);
            }
        }
        f
    }

    /// `∂ₜʲf(·,0) = j!·f_j`.
    pub fn derivative_at_zero(&self, torus: &TorusSpec, j: usize) -> SpectralField {
        self.coefficient_field(torus, j).scale(factorial(j))
    }

    pub fn eval(&self, torus: &TorusSpec, t: f64) -> SpectralField {
        let mut f = SpectralField::zero(*torus);
        for m in &self.modes {
            let c = m.poly.iter().rev().fold(0.0, |acc, &c| acc * t + c);
            if c != 0.0 {
                let a = m.amp();
                f.add_pair(WaveVector(m.k), [a[0] * c, a[1] * c, a[2] * c]);
            }
        }
        f
    }

    pub fn l2_norm(&self, torus: &TorusSpec, t: f64) -> f64 {
        self.eval(torus, t).l2_norm()
    }

    /// Largest `|k_i|` among forced modes.
    pub fn band_limit(&self) -> i32 {
        self.modes
            .iter()
            .map(|m| WaveVector(m.k).max_abs_component())
            .max()
            .unwrap_or(0)
    }
}
