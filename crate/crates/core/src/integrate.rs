//! Time integration: fixed-step RK4 and an embedded Dormand-Prince 5(4)
//! pair with PI step-size control.

use thiserror::Error;

use crate::field::VectorField;
use crate::state::State;

/// Hard floor for the adaptive step; shrinking below it signals a
/// singularity or a field the controller cannot resolve.
pub const MIN_ADAPTIVE_STEP: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum IntegrateError {
    #[error("invalid integration config: {0}")]
    InvalidConfig(String),
    #[error("state became non-finite at t = {t} (overflow)")]
    Overflow { t: f64 },
    #[error("adaptive step underflowed below {MIN_ADAPTIVE_STEP} at t = {t}")]
    StepUnderflow { t: f64 },
}

/// Step-size policy: fixed stride or embedded-pair error control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    Fixed { dt: f64 },
    Adaptive { abs_tol: f64, rel_tol: f64, dt_initial: f64, dt_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub t0: f64,
    pub t_end: f64,
    pub control: StepControl,
    /// Output stride in time units; 0 records every accepted step.
    pub sample_every: f64,
}

impl IntegrationConfig {
    pub fn fixed(t0: f64, t_end: f64, dt: f64) -> Self {
        IntegrationConfig { t0, t_end, control: StepControl::Fixed { dt }, sample_every: 0.0 }
    }

    pub fn adaptive(t0: f64, t_end: f64, abs_tol: f64, rel_tol: f64) -> Self {
        IntegrationConfig {
            t0,
            t_end,
            control: StepControl::Adaptive {
                abs_tol,
                rel_tol,
                dt_initial: 1e-3,
                dt_max: (t_end - t0).abs().max(1e-3),
            },
            sample_every: 0.0,
        }
    }

    pub fn with_sample_every(mut self, sample_every: f64) -> Self {
        self.sample_every = sample_every;
        self
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |msg: &str| Err(IntegrateError::InvalidConfig(msg.to_string()));
        if !(self.t_end > self.t0) {
            return bad("t_end must exceed t0");
        }
        if !self.t0.is_finite() || !self.t_end.is_finite() {
            return bad("time span must be finite");
        }
        if !(self.sample_every >= 0.0) {
            return bad("sample_every must be >= 0");
        }
        match self.control {
            StepControl::Fixed { dt } => {
                if !(dt > 0.0) || !dt.is_finite() {
                    return bad("fixed step dt must be positive");
                }
            }
            StepControl::Adaptive { abs_tol, rel_tol, dt_initial, dt_max } => {
                if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
                    return bad("tolerances must be positive");
                }
                if !(dt_initial > 0.0) || !(dt_max > 0.0) {
                    return bad("dt_initial and dt_max must be positive");
                }
            }
        }
        Ok(())
    }
}

/// Time-ordered samples of a trajectory.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> Option<(f64, State)> {
        self.times.first().map(|&t| (t, self.states[0]))
    }

    pub fn last(&self) -> Option<(f64, State)> {
        self.times.last().map(|&t| (t, *self.states.last().unwrap()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, State)> + '_ {
        self.times.iter().copied().zip(self.states.iter().copied())
    }

    fn push(&mut self, t: f64, s: State) {
        debug_assert!(self.times.last().is_none_or(|&prev| t > prev));
        self.times.push(t);
        self.states.push(s);
    }
}

/// One classical fourth-order Runge-Kutta step of size h.
pub fn rk4_step(f: &VectorField, s: State, h: f64) -> Result<State, IntegrateError> {
    let k1 = f.eval(s);
    let k2 = f.eval(s + k1 * (0.5 * h));
    let k3 = f.eval(s + k2 * (0.5 * h));
    let k4 = f.eval(s + k3 * h);
    let next = s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(IntegrateError::Overflow { t: f64::NAN })
    }
}

/// Integrate `f` from `s0` over the configured span, recording samples at
/// the configured stride.
pub fn integrate(
    f: &VectorField,
    s0: State,
    cfg: &IntegrationConfig,
) -> Result<Trajectory, IntegrateError> {
    cfg.validate()?;
    if !s0.is_finite() {
        return Err(IntegrateError::Overflow { t: cfg.t0 });
    }
    match cfg.control {
        StepControl::Fixed { dt } => integrate_fixed(f, s0, cfg, dt),
        StepControl::Adaptive { abs_tol, rel_tol, dt_initial, dt_max } => {
            integrate_adaptive(f, s0, cfg, abs_tol, rel_tol, dt_initial, dt_max)
        }
    }
}

struct Sampler {
    stride: f64,
    t0: f64,
    next: f64,
}

impl Sampler {
    fn new(t0: f64, stride: f64) -> Self {
        Sampler { stride, t0, next: t0 + stride }
    }

    /// Record every accepted step when stride is 0; otherwise the first
    /// accepted state at or past each stride boundary.
    fn due(&mut self, t: f64) -> bool {
        if self.stride == 0.0 {
            return true;
        }
        if t + 1e-12 >= self.next {
            let k = ((t - self.t0) / self.stride).floor() + 1.0;
            self.next = self.t0 + k * self.stride;
            true
        } else {
            false
        }
    }
}

fn integrate_fixed(
    f: &VectorField,
    s0: State,
    cfg: &IntegrationConfig,
    dt: f64,
) -> Result<Trajectory, IntegrateError> {
    let span = cfg.t_end - cfg.t0;
    let n_full = (span / dt + 1e-9).floor() as u64;
    let mut traj = Trajectory::default();
    traj.push(cfg.t0, s0);
    let mut sampler = Sampler::new(cfg.t0, cfg.sample_every);
    let mut s = s0;
    let mut t = cfg.t0;
    for k in 1..=n_full {
        s = rk4_step(f, s, dt).map_err(|_| IntegrateError::Overflow { t })?;
        t = cfg.t0 + k as f64 * dt;
        if sampler.due(t) {
            traj.push(t, s);
        }
    }
    let remainder = cfg.t_end - t;
    if remainder > 1e-12 {
        s = rk4_step(f, s, remainder).map_err(|_| IntegrateError::Overflow { t })?;
        t = cfg.t_end;
        traj.push(t, s);
    } else if traj.times.last() != Some(&t) {
        traj.push(t, s);
    }
    Ok(traj)
}

// Dormand-Prince 5(4) coefficients. Stage times are implicit: every field
// here is autonomous.
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights (row 7 of A) and the 5th-minus-4th error weights.
const DP_B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FACTOR_MIN: f64 = 0.2;
const FACTOR_MAX: f64 = 5.0;
// PI controller exponents (Hairer's dopri5 defaults).
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - 0.75 * PI_BETA;

#[allow(clippy::too_many_arguments)]
fn integrate_adaptive(
    f: &VectorField,
    s0: State,
    cfg: &IntegrationConfig,
    abs_tol: f64,
    rel_tol: f64,
    dt_initial: f64,
    dt_max: f64,
) -> Result<Trajectory, IntegrateError> {
    let mut traj = Trajectory::default();
    traj.push(cfg.t0, s0);
    let mut sampler = Sampler::new(cfg.t0, cfg.sample_every);
    let mut s = s0;
    let mut t = cfg.t0;
    let mut h = dt_initial.min(dt_max).min(cfg.t_end - cfg.t0);
    let mut err_prev: f64 = 1e-4;

    while t < cfg.t_end - 1e-12 {
        h = h.min(cfg.t_end - t);
        if h < MIN_ADAPTIVE_STEP {
            return Err(IntegrateError::StepUnderflow { t });
        }

        let mut k = [State::ZERO; 7];
        k[0] = f.eval(s);
        for stage in 1..7 {
            let mut arg = s;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    arg = arg + *kj * (a * h);
                }
            }
            k[stage] = f.eval(arg);
        }
        let mut s_new = s;
        let mut err_vec = State::ZERO;
        for (j, kj) in k.iter().enumerate() {
            if DP_B5[j] != 0.0 {
                s_new = s_new + *kj * (DP_B5[j] * h);
            }
            if DP_E[j] != 0.0 {
                err_vec = err_vec + *kj * (DP_E[j] * h);
            }
        }
        if !s_new.is_finite() {
            return Err(IntegrateError::Overflow { t });
        }

        // Weighted RMS error norm over the three components.
        let mut sq = 0.0;
        for i in 0..3 {
            let scale = abs_tol + rel_tol * s[i].abs().max(s_new[i].abs());
            let r = err_vec[i] / scale;
            sq += r * r;
        }
        let err = (sq / 3.0).sqrt();

        if err <= 1.0 {
            t += h;
            s = s_new;
            if sampler.due(t) || t >= cfg.t_end - 1e-12 {
                traj.push(t, s);
            }
            let err_clamped = err.max(1e-10);
            let factor = (SAFETY * err_clamped.powf(-PI_ALPHA) * err_prev.powf(PI_BETA))
                .clamp(FACTOR_MIN, FACTOR_MAX);
            h = (h * factor).min(dt_max);
            err_prev = err_clamped;
        } else {
            let factor = (SAFETY * err.powf(-0.2)).clamp(FACTOR_MIN, 1.0);
            h *= factor;
        }
    }
    Ok(traj)
}
