//! Vector and scalar fields on phase space.
//!
//! Fields are pure mappings: parameters are captured at construction and
//! evaluation never mutates shared state, so a field can be shared across
//! threads (sweeps evaluate many fields concurrently).

use std::sync::Arc;

use crate::state::{Matrix3, State};

type EvalFn = dyn Fn(State) -> State + Send + Sync;
type JacFn = dyn Fn(State) -> Matrix3 + Send + Sync;
type ValueFn = dyn Fn(State) -> f64 + Send + Sync;
type GradFn = dyn Fn(State) -> State + Send + Sync;

/// Relative central-difference step. The step scales with the component
/// magnitude to avoid cancellation at large |s|.
fn fd_step(component: f64) -> f64 {
    (1e-6_f64).max(1e-6 * component.abs())
}

/// A mapping state -> velocity together with its Jacobian.
///
/// When no analytic Jacobian is supplied, `jacobian` falls back to central
/// finite differences of `eval`.
#[derive(Clone)]
pub struct VectorField {
    eval: Arc<EvalFn>,
    jac: Option<Arc<JacFn>>,
}

impl VectorField {
    pub fn new(eval: impl Fn(State) -> State + Send + Sync + 'static) -> Self {
        VectorField { eval: Arc::new(eval), jac: None }
    }

    pub fn with_jacobian(
        eval: impl Fn(State) -> State + Send + Sync + 'static,
        jac: impl Fn(State) -> Matrix3 + Send + Sync + 'static,
    ) -> Self {
        VectorField { eval: Arc::new(eval), jac: Some(Arc::new(jac)) }
    }

    pub fn zero() -> Self {
        VectorField::with_jacobian(|_| State::ZERO, |_| Matrix3::ZERO)
    }

    pub fn eval(&self, s: State) -> State {
        (self.eval)(s)
    }

    pub fn jacobian(&self, s: State) -> Matrix3 {
        match &self.jac {
            Some(j) => j(s),
            None => self.fd_jacobian(s),
        }
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jac.is_some()
    }

    /// Central-difference Jacobian of `eval`, column by column.
    pub fn fd_jacobian(&self, s: State) -> Matrix3 {
        let mut rows = [[0.0; 3]; 3];
        for col in 0..3 {
            let h = fd_step(s[col]);
            let mut sp = s;
            let mut sm = s;
            sp[col] += h;
            sm[col] -= h;
            let fp = self.eval(sp);
            let fm = self.eval(sm);
            for row in 0..3 {
                rows[row][col] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        Matrix3::from_rows(rows)
    }

    /// Divergence of the field: trace of the Jacobian at `s`.
    pub fn divergence(&self, s: State) -> f64 {
        self.jacobian(s).trace()
    }
}

/// A mapping state -> real together with its gradient.
#[derive(Clone)]
pub struct ScalarField {
    value: Arc<ValueFn>,
    grad: Option<Arc<GradFn>>,
}

impl ScalarField {
    pub fn new(
        value: impl Fn(State) -> f64 + Send + Sync + 'static,
        grad: impl Fn(State) -> State + Send + Sync + 'static,
    ) -> Self {
        ScalarField { value: Arc::new(value), grad: Some(Arc::new(grad)) }
    }

    /// Gradient comes from central finite differences of `value`.
    pub fn from_fn(value: impl Fn(State) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField { value: Arc::new(value), grad: None }
    }

    pub fn zero() -> Self {
        ScalarField::new(|_| 0.0, |_| State::ZERO)
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(move |_| c, |_| State::ZERO)
    }

    /// The coordinate function x, used as the rescaling factor mu.
    pub fn coordinate_x() -> Self {
        ScalarField::new(|s| s.x, |_| State::new(1.0, 0.0, 0.0))
    }

    pub fn value(&self, s: State) -> f64 {
        (self.value)(s)
    }

    pub fn gradient(&self, s: State) -> State {
        match &self.grad {
            Some(g) => g(s),
            None => self.fd_gradient(s),
        }
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn fd_gradient(&self, s: State) -> State {
        let mut g = State::ZERO;
        for i in 0..3 {
            let h = fd_step(s[i]);
            let mut sp = s;
            let mut sm = s;
            sp[i] += h;
            sm[i] -= h;
            g[i] = (self.value(sp) - self.value(sm)) / (2.0 * h);
        }
        g
    }

    /// Time derivative of this quantity along `f`: grad . f(s).
    pub fn derivative_along(&self, f: &VectorField, s: State) -> f64 {
        self.gradient(s).dot(&f.eval(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_gradient_matches_analytic_quadratic() {
        let analytic = ScalarField::new(
            |s| s.x * s.x + 3.0 * s.y * s.z,
            |s| State::new(2.0 * s.x, 3.0 * s.z, 3.0 * s.y),
        );
        let fd = ScalarField::from_fn(|s| s.x * s.x + 3.0 * s.y * s.z);
        for s in [State::new(1.0, 2.0, -3.0), State::new(-8.0, 0.0, 5.5)] {
            let diff = analytic.gradient(s) - fd.gradient(s);
            assert!(diff.max_abs() < 1e-7, "fd gradient off by {}", diff.max_abs());
        }
    }

    #[test]
    fn fd_jacobian_matches_analytic() {
        let f = VectorField::with_jacobian(
            |s| State::new(s.x * s.y, -s.z * s.z, s.x + s.y),
            |s| Matrix3::from_rows([[s.y, s.x, 0.0], [0.0, 0.0, -2.0 * s.z], [1.0, 1.0, 0.0]]),
        );
        let s = State::new(0.7, -1.3, 2.1);
        let (a, b) = (f.jacobian(s), f.fd_jacobian(s));
        for r in 0..3 {
            for c in 0..3 {
                assert!((a[(r, c)] - b[(r, c)]).abs() < 1e-7);
            }
        }
    }
}
