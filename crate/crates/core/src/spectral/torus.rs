use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic box `[0, L)^3` together with the grid used for quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    period: f64,
    grid: usize,
}

impl TorusSpec {
    pub fn new(period: f64, grid: usize) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidTorus(format!("period must be positive, got {period}")));
        }
        if grid < 4 || !grid.is_power_of_two() {
            return Err(Error::InvalidTorus(format!(
                "grid resolution must be a power of two >= 4, got {grid}"
            )));
        }
        Ok(Self { period, grid })
    }

    /// The `2π`-periodic box with the given grid.
    pub fn two_pi(grid: usize) -> Result<Self> {
        Self::new(2.0 * PI, grid)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn volume(&self) -> f64 {
        self.period.powi(3)
    }

    /// Same box, different quadrature grid.
    pub fn with_grid(&self, grid: usize) -> Result<Self> {
        Self::new(self.period, grid)
    }

    #[inline]
    pub fn scale(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Physical wavenumber `κ = 2πk/L`.
    #[inline]
    pub fn kappa(&self, k: WaveVector) -> [f64; 3] {
        let s = self.scale();
        [s * k.0[0] as f64, s * k.0[1] as f64, s * k.0[2] as f64]
    }

    /// Stokes eigenvalue `|κ|²`.
    #[inline]
    pub fn eigenvalue(&self, k: WaveVector) -> f64 {
        let s = self.scale();
        s * s * k.norm_sq() as f64
    }

    pub(crate) fn same_as(&self, other: &TorusSpec) -> bool {
        self.period == other.period
    }
}

/// Integer wavevector `k`; the physical wavenumber is `2πk/L`.
///
/// Ordering is lexicographic on the components.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveVector(pub [i32; 3]);

impl WaveVector {
    pub const ZERO: WaveVector = WaveVector([0, 0, 0]);

    pub const fn new(k1: i32, k2: i32, k3: i32) -> Self {
        WaveVector([k1, k2, k3])
    }

    #[inline]
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// True when the first nonzero component is positive. Exactly one of
    /// `k` and `-k` is canonical for every nonzero `k`.
    #[inline]
    pub fn is_canonical(&self) -> bool {
        for &c in &self.0 {
            match c.cmp(&0) {
                Ordering::Greater => return true,
                Ordering::Less => return false,
                Ordering::Equal => {}
            }
        }
        false
    }

    /// Canonical representative of `{k, -k}` and the sign with `k = sign * rep`.
    #[inline]
    pub fn canonical(&self) -> (WaveVector, i32) {
        if self.is_canonical() || self.is_zero() {
            (*self, 1)
        } else {
            (-*self, -1)
        }
    }

    pub fn max_abs_component(&self) -> i32 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [self.0[0] as f64, self.0[1] as f64, self.0[2] as f64]
    }

    /// Basis ordering: ascending `|k|²`, then lexicographic.
    pub fn basis_cmp(&self, other: &WaveVector) -> Ordering {
        self.norm_sq()
            .cmp(&other.norm_sq())
            .then_with(|| self.cmp(other))
    }

    /// `"k1,k2,k3"` key used in the JSON container.
    pub fn key(&self) -> String {
        format!("{},{},{}", self.0[0], self.0[1], self.0[2])
    }

    pub fn parse_key(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Format(format!("bad wavevector key {s:?}")));
        }
        let mut k = [0i32; 3];
        for (slot, p) in k.iter_mut().zip(parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad wavevector key {s:?}")))?;
        }
        Ok(WaveVector(k))
    }
}

impl fmt::Debug for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

impl fmt::Display for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for WaveVector {
    type Output = WaveVector;
    #[inline]
    fn add(self, o: WaveVector) -> WaveVector {
        WaveVector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for WaveVector {
    type Output = WaveVector;
    #[inline]
    fn sub(self, o: WaveVector) -> WaveVector {
        WaveVector([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for WaveVector {
    type Output = WaveVector;
    #[inline]
    fn neg(self) -> WaveVector {
        WaveVector([-self.0[0], -self.0[1], -self.0[2]])
    }
}
