use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form whole-space data, each exactly divergence free.
///
/// Both nonzero profiles have the form `h(|x|) (x × c)`, which is solenoidal
/// for any radial `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// `curl(φ c)` with `φ = a (1 − |x|²/R²)^m` on `|x| < R`.
    Bump {
        amplitude: f64,
        radius: f64,
        axis: [f64; 3],
        power: i32,
    },
    /// `a (1 + |x|²)^{-3/2} (x × c)`, which decays like `|x|^{-2}`.
    Clay { amplitude: f64, axis: [f64; 3] },
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Profile::Zero => true,
            Profile::Bump {
                amplitude,
                radius,
                axis,
                power,
            } => {
                amplitude.is_finite()
                    && *radius > 0.0
                    && radius.is_finite()
                    && *power >= 2
                    && axis.iter().all(|x| x.is_finite())
            }
            Profile::Clay { amplitude, axis } => amplitude.is_finite() && axis.iter().all(|x| x.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(
                "profile",
                "amplitudes, radius and axis must be finite, radius positive, power at least 2",
            ))
        }
    }

    /// Radial factor `h(s)` of `h(|x|) (x × c)`.
    fn radial(&self, s: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Bump {
                amplitude,
                radius,
                power,
                ..
            } => {
                if s >= radius {
                    0.0
                } else {
                    let q = 1.0 - s * s / (radius * radius);
                    -2.0 * amplitude * power as f64 / (radius * radius) * q.powi(power - 1)
                }
            }
            Profile::Clay { amplitude, .. } => amplitude * (1.0 + s * s).powf(-1.5),
        }
    }

    fn axis(&self) -> [f64; 3] {
        match *self {
            Profile::Zero => [0.0; 3],
            Profile::Bump { axis, .. } | Profile::Clay { axis, .. } => axis,
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        let s = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let h = self.radial(s);
        if h == 0.0 {
            return [0.0; 3];
        }
        let v = cross(x, self.axis());
        [h * v[0], h * v[1], h * v[2]]
    }

    /// Radius outside which the profile vanishes.
    pub fn support_radius(&self) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Bump { radius, .. } => radius,
            Profile::Clay { .. } => f64::INFINITY,
        }
    }

    /// `4π s² ⟨|u|²⟩_{|x|=s}`, the radial density of `∫|u|²`.
    pub fn radial_energy_density(&self, s: f64) -> f64 {
        let c = self.axis();
        let c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
        let h = self.radial(s);
        // |x × c|² averages to (2/3) s² |c|² over the sphere.
        4.0 * std::f64::consts::PI * s * s * h * h * s * s * c2 * 2.0 / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn divergence(p: &Profile, x: [f64; 3]) -> f64 {
        let h = 1e-5;
        (0..3)
            .map(|i| {
                let mut a = x;
                let mut b = x;
                a[i] += h;
                b[i] -= h;
                (p.eval(a)[i] - p.eval(b)[i]) / (2.0 * h)
            })
            .sum()
    }

    #[test]
    fn profiles_are_solenoidal() {
        let ps = [
            Profile::Bump { amplitude: 0.3, radius: 0.9, axis: [0.0, 0.0, 1.0], power: 8 },
            Profile::Clay { amplitude: 0.1, axis: [0.3, -0.2, 1.0] },
        ];
        for p in &ps {
            for x in [[0.1, 0.2, -0.3], [0.5, -0.4, 0.2], [1.5, 0.7, -2.0]] {
                assert!(divergence(p, x).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn bump_is_compact_and_clay_decays() {
        let b = Profile::Bump { amplitude: 1.0, radius: 0.9, axis: [0.0, 0.0, 1.0], power: 16 };
        assert_eq!(b.eval([0.95, 0.0, 0.0]), [0.0; 3]);
        let c = Profile::Clay { amplitude: 1.0, axis: [0.0, 0.0, 1.0] };
        let far = c.eval([100.0, 0.0, 0.0]);
        let mag = (far[0] * far[0] + far[1] * far[1] + far[2] * far[2]).sqrt();
        assert!((mag * 1e4 - 1.0).abs() < 1e-3);
        assert_eq!(Profile::Zero.eval([1.0, 2.0, 3.0]), [0.0; 3]);
    }
}
