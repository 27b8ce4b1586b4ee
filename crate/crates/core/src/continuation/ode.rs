use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::{GalerkinState, GalerkinSystem};

/// `dy/dt = F(t, y)` with a fixed dimension.
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

impl OdeSystem for GalerkinSystem {
    fn dim(&self) -> usize {
        GalerkinSystem::dim(self)
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        self.rhs_into(t, y, dy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepMode {
    /// Classical fourth-order Runge-Kutta with constant step `h`.
    Fixed,
    /// Dormand-Prince 5(4) with embedded error control.
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperConfig {
    pub mode: StepMode,
    /// Step of the fixed mode; initial step guess of the adaptive mode.
    pub h: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub min_step: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            mode: StepMode::Adaptive,
            h: 1e-3,
            rtol: 1e-8,
            atol: 1e-10,
            max_step: 0.1,
            min_step: 1e-12,
        }
    }
}

impl StepperConfig {
    pub fn fixed(h: f64) -> Self {
        Self {
            mode: StepMode::Fixed,
            h,
            ..Self::default()
        }
    }

    pub fn adaptive(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("stepper.{name}"), format!("must be positive, got {x}")))
            }
        };
        pos("h", self.h)?;
        pos("rtol", self.rtol)?;
        pos("atol", self.atol)?;
        pos("max_step", self.max_step)?;
        pos("min_step", self.min_step)?;
        if self.min_step >= self.max_step {
            return Err(Error::config("stepper.min_step", "must be below max_step"));
        }
        Ok(())
    }
}

/// How an integration ended.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntegrationStatus {
    Completed,
    /// The adaptive controller asked for a step below `min_step`.
    StepUnderflow { t: f64, h: f64 },
    /// A stage produced NaN or infinity.
    NonFinite { t: f64 },
    /// The monitor callback asked to stop.
    Stopped { t: f64 },
}

impl IntegrationStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, IntegrationStatus::Completed)
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// The start state followed by one entry per reached sample time.
    pub samples: Vec<GalerkinState>,
    pub status: IntegrationStatus,
    pub final_state: GalerkinState,
    pub steps: usize,
    pub rejected: usize,
}

/// `n` equal intervals on `(t0, t1]`.
pub fn uniform_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| if i == n { t1 } else { t0 + (t1 - t0) * i as f64 / n as f64 })
        .collect()
}

/// Monitor called after every accepted step; return `false` to stop.
pub type Monitor<'a> = &'a mut dyn FnMut(f64, &[f64]) -> bool;

/// Advance `start` through the increasing `times`, recording a sample at
/// each. Steps are shortened to land exactly on sample times.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    start: &GalerkinState,
    stepper: &StepperConfig,
    times: &[f64],
    mut monitor: Option<Monitor<'_>>,
) -> Result<Trajectory> {
    stepper.validate()?;
    let n = sys.dim();
    if start.g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: start.g.len(),
        });
    }
    let Some(&t_end) = times.last() else {
        return Err(Error::InvalidArgument("no sample times".into()));
    };
    if t_end <= start.t || times.windows(2).any(|w| w[1] <= w[0]) || times[0] <= start.t {
        return Err(Error::InvalidArgument(
            "sample times must increase strictly beyond the start time".into(),
        ));
    }
    let mut stepper_state = match stepper.mode {
        StepMode::Fixed => Stepper::Rk4(Rk4::new(n)),
        StepMode::Adaptive => Stepper::Dp(Dp45::new(n, stepper.h.min(stepper.max_step))),
    };
    let mut y = start.g.clone();
    let mut t = start.t;
    let mut samples = vec![start.clone()];
    let mut steps = 0;
    let mut rejected = 0;
    let mut status = IntegrationStatus::Completed;
    'outer: for &ts in times {
        while t < ts {
            let outcome = match &mut stepper_state {
                Stepper::Rk4(rk) => {
                    let mut h = stepper.h.min(ts - t);
                    if ts - (t + h) <= 1e-12 * stepper.h {
                        h = ts - t;
                    }
                    rk.step(sys, t, &mut y, h)?;
                    Outcome::Accepted(h)
                }
                Stepper::Dp(dp) => dp.step(sys, t, &mut y, ts, stepper, &mut rejected)?,
            };
            match outcome {
                Outcome::Accepted(h) => {
                    t = if (ts - (t + h)).abs() <= 1e-14 * ts.abs().max(1.0) { ts } else { t + h };
                    steps += 1;
                }
                Outcome::Underflow(h) => {
                    status = IntegrationStatus::StepUnderflow { t, h };
                    break 'outer;
                }
            }
            if y.iter().any(|x| !x.is_finite()) {
                status = IntegrationStatus::NonFinite { t };
                break 'outer;
            }
            if let Some(m) = monitor.as_mut() {
                if !m(t, &y) {
                    status = IntegrationStatus::Stopped { t };
                    samples.push(GalerkinState { g: y.clone(), t });
                    break 'outer;
                }
            }
        }
        samples.push(GalerkinState { g: y.clone(), t });
    }
    Ok(Trajectory {
        final_state: GalerkinState { g: y, t },
        samples,
        status,
        steps,
        rejected,
    })
}

enum Stepper {
    Rk4(Rk4),
    Dp(Dp45),
}

enum Outcome {
    Accepted(f64),
    Underflow(f64),
}

struct Rk4 {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Self {
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            tmp: vec![0.0; n],
        }
    }

    fn step<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, y: &mut [f64], h: f64) -> Result<()> {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        sys.rhs(t, y, k1)?;
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        sys.rhs(t + 0.5 * h, tmp, k2)?;
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        sys.rhs(t + 0.5 * h, tmp, k3)?;
        for i in 0..y.len() {
            tmp[i] = y[i] + h * k3[i];
        }
        sys.rhs(t + h, tmp, k4)?;
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Dp45 {
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    y5: Vec<f64>,
    h: f64,
    /// `k[0]` holds `F(t, y)` for the current point (first-same-as-last).
    fsal: bool,
}

impl Dp45 {
    fn new(n: usize, h: f64) -> Self {
        Self {
            k: vec![vec![0.0; n]; 7],
            tmp: vec![0.0; n],
            y5: vec![0.0; n],
            h,
            fsal: false,
        }
    }

    fn step<S: OdeSystem + ?Sized>(
        &mut self,
        sys: &S,
        t: f64,
        y: &mut [f64],
        t_stop: f64,
        cfg: &StepperConfig,
        rejected: &mut usize,
    ) -> Result<Outcome> {
        let n = y.len();
        if !self.fsal {
            sys.rhs(t, y, &mut self.k[0])?;
            self.fsal = true;
        }
        loop {
            let mut h = self.h.min(cfg.max_step);
            let mut clipped = false;
            if t + h >= t_stop || t_stop - (t + h) <= 1e-12 * h {
                h = t_stop - t;
                clipped = true;
            }
            if h < cfg.min_step && !clipped {
                return Ok(Outcome::Underflow(h));
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for j in 0..s {
                        acc += h * A[s][j] * self.k[j][i];
                    }
                    self.tmp[i] = acc;
                }
                sys.rhs(t + C[s] * h, &self.tmp, &mut self.k[s])?;
            }
            // Stage 7 was evaluated at the fifth-order solution.
            self.y5.copy_from_slice(&self.tmp);
            let mut err = 0.0f64;
            for i in 0..n {
                let mut e = 0.0;
                for s in 0..7 {
                    e += (B5[s] - B4[s]) * self.k[s][i];
                }
                let sc = cfg.atol + cfg.rtol * y[i].abs().max(self.y5[i].abs());
                err = err.max((h * e).abs() / sc);
            }
            if !err.is_finite() {
                // Let the caller see the non-finite state.
                y.copy_from_slice(&self.y5);
                return Ok(Outcome::Accepted(h));
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                y.copy_from_slice(&self.y5);
                self.k.swap(0, 6);
                if !clipped || factor < 1.0 {
                    self.h = h * factor;
                }
                return Ok(Outcome::Accepted(h));
            }
            *rejected += 1;
            self.h = h * factor.min(1.0);
            if self.h < cfg.min_step {
                return Ok(Outcome::Underflow(self.h));
            }
        }
    }
}
