//! Lyapunov spectra via tangent-flow propagation with periodic
//! Gram-Schmidt reorthonormalization, the Kaplan-Yorke dimension, and
//! conservation diagnostics.

use thiserror::Error;

use crate::field::{ScalarField, VectorField};
use crate::integrate::Trajectory;
use crate::state::State;

/// Tangent norms below this before renormalization abort the run; the
/// renormalization interval is too long for the contraction rate.
pub const TANGENT_UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Error, PartialEq)]
pub enum LyapunovError {
    #[error("invalid lyapunov config: {0}")]
    InvalidConfig(String),
    #[error("field must supply an analytic Jacobian for tangent propagation")]
    MissingJacobian,
    #[error("trajectory escaped to non-finite values at t = {t}")]
    Overflow { t: f64 },
    #[error("tangent vector underflowed at t = {t}; shorten the renormalization interval")]
    DegenerateTangent { t: f64 },
}

/// Settings for a spectrum run. Times are in the flow's time units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConfig {
    /// Time discarded before accumulation starts.
    pub transient: f64,
    /// Accumulation window after the transient.
    pub total_time: f64,
    /// Time between Gram-Schmidt renormalizations; must be an integer
    /// multiple of dt.
    pub renorm_interval: f64,
    pub dt: f64,
    pub initial_condition: State,
}

impl LyapunovConfig {
    /// Defaults used by the chaos diagnostics: transient 100, window 5000,
    /// dt 0.001, renormalization every 0.1.
    pub fn chaos_defaults(initial_condition: State) -> Self {
        LyapunovConfig {
            transient: 100.0,
            total_time: 5000.0,
            renorm_interval: 0.1,
            dt: 0.001,
            initial_condition,
        }
    }

    pub fn validate(&self) -> Result<(), LyapunovError> {
        let bad = |msg: &str| Err(LyapunovError::InvalidConfig(msg.to_string()));
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.total_time > 0.0) {
            return bad("total_time must be positive");
        }
        if !(self.transient >= 0.0) {
            return bad("transient must be nonnegative");
        }
        if !(self.renorm_interval > 0.0) {
            return bad("renorm_interval must be positive");
        }
        if !self.initial_condition.is_finite() {
            return bad("initial condition must be finite");
        }
        let ratio = self.renorm_interval / self.dt;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) || ratio.round() < 1.0 {
            return bad("renorm_interval must be an integer multiple of dt");
        }
        Ok(())
    }
}

/// A running spectrum estimate recorded during accumulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceSample {
    /// Accumulation time at which the estimate was taken.
    pub t: f64,
    pub exponents: [f64; 3],
}

/// Spectrum, Kaplan-Yorke dimension, and diagnostics from one run.
#[derive(Debug, Clone)]
pub struct LyapunovResult {
    /// Exponents sorted descending, in 1/time units.
    pub exponents: [f64; 3],
    pub kaplan_yorke: f64,
    /// Time average of the Jacobian trace over the accumulation window;
    /// for a flow this equals the exponent sum up to sampling error.
    pub trace_average: f64,
    pub convergence_history: Vec<ConvergenceSample>,
}

impl LyapunovResult {
    /// |sum of exponents - trace average|: how well the spectrum closes.
    pub fn closure_residual(&self) -> f64 {
        (self.exponents.iter().sum::<f64>() - self.trace_average).abs()
    }
}

/// Largest dimension index over which the exponent partial sums stay
/// nonnegative, plus the fractional part from the next exponent.
///
/// Expects exponents sorted descending. Returns 0 when even the largest
/// exponent is negative and 3 when the full sum is nonnegative.
pub fn kaplan_yorke(exponents: [f64; 3]) -> f64 {
    debug_assert!(exponents[0] >= exponents[1] && exponents[1] >= exponents[2]);
    let s1 = exponents[0];
    let s2 = s1 + exponents[1];
    let s3 = s2 + exponents[2];
    if s3 >= 0.0 {
        3.0
    } else if s2 >= 0.0 {
        2.0 + s2 / exponents[2].abs()
    } else if s1 >= 0.0 {
        1.0 + s1 / exponents[1].abs()
    } else {
        0.0
    }
}

/// Per-invariant maximum drift |v(s(t)) - v(s(0))| over a trajectory.
pub fn conservation_drift(invariants: &[ScalarField], traj: &Trajectory) -> Vec<f64> {
    let Some((_, s0)) = traj.first() else {
        return vec![0.0; invariants.len()];
    };
    invariants
        .iter()
        .map(|inv| {
            let v0 = inv.value(s0);
            traj.iter().map(|(_, s)| (inv.value(s) - v0).abs()).fold(0.0, f64::max)
        })
        .collect()
}

/// Benettin-style spectrum computation.
///
/// The base state and three tangent vectors march under the same RK4 step
/// (the Jacobian is evaluated at the stage states, so the tangents follow
/// the variational equations synchronously with the base flow). Tangents
/// are reorthonormalized by modified Gram-Schmidt every `renorm_interval`,
/// and exponent i is the time average of log of the i-th orthogonalization
/// norm.
pub fn lyapunov_spectrum(
    f: &VectorField,
    cfg: &LyapunovConfig,
) -> Result<LyapunovResult, LyapunovError> {
    cfg.validate()?;
    if !f.has_analytic_jacobian() {
        return Err(LyapunovError::MissingJacobian);
    }

    let dt = cfg.dt;
    let mut s = cfg.initial_condition;

    // Transient: march the base state alone.
    let n_transient = (cfg.transient / dt).round() as u64;
    for k in 0..n_transient {
        s = rk4_base(f, s, dt);
        if !s.is_finite() {
            return Err(LyapunovError::Overflow { t: (k + 1) as f64 * dt });
        }
    }

    let steps_per_renorm = (cfg.renorm_interval / dt).round() as u64;
    let n_renorms = ((cfg.total_time / cfg.renorm_interval).round() as u64).max(1);
    let history_stride = (n_renorms / 256).max(1);

    let mut tangents =
        [State::new(1.0, 0.0, 0.0), State::new(0.0, 1.0, 0.0), State::new(0.0, 0.0, 1.0)];
    let mut log_sums = [0.0_f64; 3];
    let mut trace_sum = 0.0;
    let mut steps_done: u64 = 0;
    let mut history = Vec::new();

    for renorm in 0..n_renorms {
        for _ in 0..steps_per_renorm {
            trace_sum += f.jacobian(s).trace();
            (s, tangents) = rk4_tangent(f, s, tangents, dt);
            steps_done += 1;
            if !s.is_finite() {
                return Err(LyapunovError::Overflow {
                    t: cfg.transient + steps_done as f64 * dt,
                });
            }
        }

        // Modified Gram-Schmidt; the norms feed the exponent sums.
        for i in 0..3 {
            let mut v = tangents[i];
            for j in 0..i {
                v = v - tangents[j] * v.dot(&tangents[j]);
            }
            let norm = v.norm();
            if !norm.is_finite() {
                return Err(LyapunovError::Overflow {
                    t: cfg.transient + steps_done as f64 * dt,
                });
            }
            if norm < TANGENT_UNDERFLOW {
                return Err(LyapunovError::DegenerateTangent {
                    t: cfg.transient + steps_done as f64 * dt,
                });
            }
            log_sums[i] += norm.ln();
            tangents[i] = v * (1.0 / norm);
        }

        if (renorm + 1) % history_stride == 0 || renorm + 1 == n_renorms {
            let t = steps_done as f64 * dt;
            let mut exps = [log_sums[0] / t, log_sums[1] / t, log_sums[2] / t];
            exps.sort_by(|a, b| b.partial_cmp(a).unwrap());
            history.push(ConvergenceSample { t, exponents: exps });
        }
    }

    let elapsed = steps_done as f64 * dt;
    let mut exponents = [log_sums[0] / elapsed, log_sums[1] / elapsed, log_sums[2] / elapsed];
    exponents.sort_by(|a, b| b.partial_cmp(a).unwrap());

    Ok(LyapunovResult {
        exponents,
        kaplan_yorke: kaplan_yorke(exponents),
        trace_average: trace_sum / steps_done as f64,
        convergence_history: history,
    })
}

fn rk4_base(f: &VectorField, s: State, h: f64) -> State {
    let k1 = f.eval(s);
    let k2 = f.eval(s + k1 * (0.5 * h));
    let k3 = f.eval(s + k2 * (0.5 * h));
    let k4 = f.eval(s + k3 * h);
    s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// One RK4 step of the augmented 12-dimensional system: base state plus
/// three tangent vectors under v' = J(s(t)) v.
fn rk4_tangent(f: &VectorField, s: State, v: [State; 3], h: f64) -> (State, [State; 3]) {
    let k1s = f.eval(s);
    let j1 = f.jacobian(s);
    let k1v = [j1.mul_vec(&v[0]), j1.mul_vec(&v[1]), j1.mul_vec(&v[2])];

    let s2 = s + k1s * (0.5 * h);
    let k2s = f.eval(s2);
    let j2 = f.jacobian(s2);
    let k2v = [
        j2.mul_vec(&(v[0] + k1v[0] * (0.5 * h))),
        j2.mul_vec(&(v[1] + k1v[1] * (0.5 * h))),
        j2.mul_vec(&(v[2] + k1v[2] * (0.5 * h))),
    ];

    let s3 = s + k2s * (0.5 * h);
    let k3s = f.eval(s3);
    let j3 = f.jacobian(s3);
    let k3v = [
        j3.mul_vec(&(v[0] + k2v[0] * (0.5 * h))),
        j3.mul_vec(&(v[1] + k2v[1] * (0.5 * h))),
        j3.mul_vec(&(v[2] + k2v[2] * (0.5 * h))),
    ];

    let s4 = s + k3s * h;
    let k4s = f.eval(s4);
    let j4 = f.jacobian(s4);
    let k4v = [
        j4.mul_vec(&(v[0] + k3v[0] * h)),
        j4.mul_vec(&(v[1] + k3v[1] * h)),
        j4.mul_vec(&(v[2] + k3v[2] * h)),
    ];

    let s_next = s + (k1s + k2s * 2.0 + k3s * 2.0 + k4s) * (h / 6.0);
    let v_next = [
        v[0] + (k1v[0] + k2v[0] * 2.0 + k3v[0] * 2.0 + k4v[0]) * (h / 6.0),
        v[1] + (k1v[1] + k2v[1] * 2.0 + k3v[1] * 2.0 + k4v[1]) * (h / 6.0),
        v[2] + (k1v[2] + k2v[2] * 2.0 + k3v[2] * 2.0 + k4v[2]) * (h / 6.0),
    ];
    (s_next, v_next)
}
