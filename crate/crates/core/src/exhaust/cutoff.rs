use serde::Serialize;

use crate::error::{Error, Result};

/// Inner and outer edge of the unmollified ramp `g₀`.
const RAMP_IN: f64 = 7.0 / 12.0;
const RAMP_OUT: f64 = 2.0 / 3.0;
/// Default mollification width.
pub const DEFAULT_EPS: f64 = 1.0 / 24.0;
const TABLE_POINTS: usize = 1025;
const PANELS: usize = 8;

/// Gauss-Legendre nodes and weights on [-1, 1], 16 points (positive half).
const GL_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_8,
    0.755_404_408_355_003,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_09,
];

pub(crate) fn gauss<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for i in 0..8 {
        s += GL_W[i] * (f(c - h * GL_X[i]) + f(c + h * GL_X[i]));
    }
    s * h
}

/// `G(t) = ∫₀ᵗ τ g₀(τ) dτ` for the piecewise-linear ramp `g₀`.
fn ramp_moment(t: f64) -> f64 {
    let (a, b) = (RAMP_IN, RAMP_OUT);
    let inner = |t: f64| 0.5 * t * t;
    let mid = |t: f64| inner(a) + (0.5 * b * (t * t - a * a) - (t * t * t - a * a * a) / 3.0) / (b - a);
    if t <= a {
        inner(t)
    } else if t < b {
        mid(t)
    } else {
        mid(b)
    }
}

/// Radial cutoff `η = J_ε * g₀(|·|)` with `g₀ = 1` on `[0, 7/12]`, `0` beyond
/// `2/3` and linear between, scaled to `η_r(x) = η(|x|/r)`.
///
/// `η` is exactly 1 for `s ≤ 7/12 − ε` and exactly 0 for `s ≥ 2/3 + ε`. In
/// between it is tabulated by quadrature and interpolated with a clamped
/// cubic spline.
#[derive(Clone, Debug)]
pub struct CutoffSpec {
    radius: f64,
    eps: f64,
    norm: f64,
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CutoffSpec {
    pub fn new(radius: f64) -> Result<Self> {
        Self::with_eps(radius, DEFAULT_EPS)
    }

    pub fn with_eps(radius: f64, eps: f64) -> Result<Self> {
        if !(radius > 1.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("cutoff radius must exceed 1, got {radius}")));
        }
        if !(eps > 0.0 && eps <= 1.0 / 12.0) {
            return Err(Error::InvalidArgument(format!(
                "mollification width must lie in (0, 1/12], got {eps}"
            )));
        }
        let mut spec = Self {
            radius,
            eps,
            norm: 1.0,
            lo: RAMP_IN - eps,
            hi: RAMP_OUT + eps,
            values: Vec::new(),
            second: Vec::new(),
        };
        let h = eps / PANELS as f64;
        spec.norm = 1.0
            / (0..PANELS)
                .map(|p| {
                    let a = p as f64 * h;
                    gauss(a, a + h, |rho| 4.0 * std::f64::consts::PI * rho * rho * spec.bump(rho))
                })
                .sum::<f64>();
        spec.values = (0..TABLE_POINTS)
            .map(|i| spec.profile_direct(spec.lo + (spec.hi - spec.lo) * i as f64 / (TABLE_POINTS - 1) as f64))
            .collect();
        spec.second = spline_second_derivatives(&spec.values, spec.step(), 0.0, 0.0);
        Ok(spec)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn step(&self) -> f64 {
        (self.hi - self.lo) / (TABLE_POINTS - 1) as f64
    }

    /// Unnormalized mollifier `exp(−1/(1 − (ρ/ε)²))`.
    fn bump(&self, rho: f64) -> f64 {
        let q = rho / self.eps;
        if q >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - q * q)).exp()
        }
    }

    /// `η(s)` by quadrature of the mollifier against spherical averages of
    /// `g₀`, split at the kinks of the integrand.
    pub fn profile_direct(&self, s: f64) -> f64 {
        if s <= self.lo {
            return 1.0;
        }
        if s >= self.hi {
            return 0.0;
        }
        let mut cuts = vec![0.0, self.eps];
        for c in [RAMP_IN - s, RAMP_OUT - s, s - RAMP_IN, s - RAMP_OUT] {
            if c > 0.0 && c < self.eps {
                cuts.push(c);
            }
        }
        cuts.sort_by(f64::total_cmp);
        let avg = |rho: f64| -> f64 {
            if rho == 0.0 {
                return if s <= RAMP_IN {
                    1.0
                } else if s >= RAMP_OUT {
                    0.0
                } else {
                    (RAMP_OUT - s) / (RAMP_OUT - RAMP_IN)
                };
            }
            (ramp_moment(s + rho) - ramp_moment((s - rho).abs())) / (2.0 * s * rho)
        };
        let f = |rho: f64| 4.0 * std::f64::consts::PI * rho * rho * self.bump(rho) * avg(rho);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            // Several panels per piece keep the flat mollifier tail resolved.
            let h = (w[1] - w[0]) / PANELS as f64;
            for p in 0..PANELS {
                let a = w[0] + p as f64 * h;
                total += gauss(a, a + h, f);
            }
        }
        (total * self.norm).clamp(0.0, 1.0)
    }

    /// `η(s)` from the spline table.
    pub fn profile(&self, s: f64) -> f64 {
        if s <= self.lo {
            return 1.0;
        }
        if s >= self.hi {
            return 0.0;
        }
        let h = self.step();
        let x = (s - self.lo) / h;
        let i = (x.floor() as usize).min(TABLE_POINTS - 2);
        let a = (i + 1) as f64 - x;
        let b = x - i as f64;
        let v = a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0;
        v.clamp(0.0, 1.0)
    }

    /// `η_r(x) = η(|x|/r)`.
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let s = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() / self.radius;
        self.profile(s)
    }

    /// Directional derivatives `sup |∂ₑᵏ η_r|` for `k = 0..=4`, sampled by
    /// central differences on a lattice `x = r ξ` along the axis and the
    /// main diagonal. Uses the quadrature profile, not the spline.
    pub fn derivative_sups(&self, lattice: usize) -> DerivativeSups {
        let r = self.radius;
        let h = 2.5e-3 * r;
        let dirs = [[1.0, 0.0, 0.0], [1.0 / 3f64.sqrt(); 3]];
        let f = |x: [f64; 3]| {
            let s = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() / r;
            self.profile_direct(s)
        };
        // Central difference stencils for orders 1-4 on 5 points.
        let stencils: [[f64; 5]; 4] = [
            [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
            [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            [-0.5, 1.0, 0.0, -1.0, 0.5],
            [1.0, -4.0, 6.0, -4.0, 1.0],
        ];
        let mut sups = [0.0f64; 5];
        for i in 0..=lattice {
            let xi = 0.9 * i as f64 / lattice as f64;
            for d in &dirs {
                let p = |t: f64| [d[0] * (xi * r + t), d[1] * (xi * r + t), d[2] * (xi * r + t)];
                let vals: Vec<f64> = (-2..=2).map(|j| f(p(j as f64 * h))).collect();
                sups[0] = sups[0].max(vals[2].abs());
                for (k, st) in stencils.iter().enumerate() {
                    let mut s = 0.0;
                    for j in 0..5 {
                        s += st[j] * vals[j];
                    }
                    sups[k + 1] = sups[k + 1].max((s / h.powi(k as i32 + 1)).abs());
                }
            }
        }
        DerivativeSups { radius: r, sups }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeSups {
    pub radius: f64,
    /// `sup |∂ᵏη_r|` for `k = 0..=4`.
    pub sups: [f64; 5],
}

/// Second derivatives of the clamped cubic spline through equally spaced
/// `y` with end slopes `d0`, `dn`.
fn spline_second_derivatives(y: &[f64], h: f64, d0: f64, dn: f64) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    let mut u = vec![0.0; n];
    m[0] = -0.5;
    u[0] = (3.0 / h) * ((y[1] - y[0]) / h - d0);
    for i in 1..n - 1 {
        let p = 0.5 * m[i - 1] + 2.0;
        m[i] = -0.5 / p;
        u[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
        u[i] = (6.0 * u[i] / (2.0 * h) - 0.5 * u[i - 1]) / p;
    }
    let qn = 0.5;
    let un = (3.0 / h) * (dn - (y[n - 1] - y[n - 2]) / h);
    m[n - 1] = (un - qn * u[n - 2]) / (qn * m[n - 2] + 1.0);
    for k in (0..n - 1).rev() {
        m[k] = m[k] * m[k + 1] + u[k];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_support_and_midpoint() {
        let c = CutoffSpec::new(4.0).unwrap();
        assert_eq!(c.eval([0.4 * 4.0, 0.0, 0.0]), 1.0);
        assert_eq!(c.eval([0.0, 0.0, 4.0]), 0.0);
        assert_eq!(c.eval([0.0, 2.0, 0.0]), 1.0);
        assert_eq!(c.eval([3.0, 0.0, 0.0]), 0.0);
        let mid = c.eval([0.625 * 4.0, 0.0, 0.0]);
        assert!(mid > 0.0 && mid < 1.0);
        assert!((mid - 0.5).abs() < 1e-2, "{mid}");
    }

    /// `η(s)` as a plain double integral over the mollifier ball in
    /// spherical coordinates, composite Simpson in `ρ` and `cos ϑ`.
    fn eta_oracle(s: f64, eps: f64) -> f64 {
        let g = |t: f64| ((2.0 / 3.0 - t) / (1.0 / 12.0)).clamp(0.0, 1.0);
        let j = |r: f64| {
            let q = r / eps;
            if q >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - q * q)).exp()
            }
        };
        let (nr, nc) = (2000, 2000);
        let simpson = |i: usize, n: usize| if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=nr {
            let r = eps * i as f64 / nr as f64;
            let wr = simpson(i, nr) * r * r * j(r);
            if wr == 0.0 {
                continue;
            }
            let mut avg = 0.0;
            for k in 0..=nc {
                let c = -1.0 + 2.0 * k as f64 / nc as f64;
                avg += simpson(k, nc) * g((s * s + r * r - 2.0 * s * r * c).sqrt());
            }
            num += wr * avg / (3.0 * nc as f64);
            den += wr;
        }
        num / den
    }

    #[test]
    fn quadrature_matches_oracle() {
        let c = CutoffSpec::new(2.0).unwrap();
        for s in [0.55, 0.58, 0.6, 0.625, 0.65, 0.67, 0.7] {
            let want = eta_oracle(s, DEFAULT_EPS);
            assert!((c.profile_direct(s) - want).abs() < 1e-6, "s={s}");
            assert!((c.profile(s) - want).abs() < 1e-6, "s={s}");
        }
    }

    #[test]
    fn spline_matches_quadrature() {
        let c = CutoffSpec::new(2.0).unwrap();
        let mut worst = 0.0f64;
        for i in 0..997 {
            let s = 0.5 + 0.25 * i as f64 / 996.0;
            worst = worst.max((c.profile(s) - c.profile_direct(s)).abs());
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn monotone_transition() {
        let c = CutoffSpec::new(2.0).unwrap();
        let mut prev = 1.0;
        for i in 0..=400 {
            let s = 0.5 + 0.25 * i as f64 / 400.0;
            let v = c.profile(s);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CutoffSpec::new(1.0).is_err());
        assert!(CutoffSpec::with_eps(2.0, 0.1).is_err());
    }

    #[test]
    fn derivative_bounds_shrink_with_radius() {
        let a = CutoffSpec::new(2.0).unwrap().derivative_sups(60);
        let b = CutoffSpec::new(4.0).unwrap().derivative_sups(60);
        assert_eq!(a.sups[0], 1.0);
        for k in 1..5 {
            assert!(a.sups[k] > 0.0);
            assert!(b.sups[k] <= a.sups[k] * (1.0 + 1e-6), "k={k}");
        }
    }
}
