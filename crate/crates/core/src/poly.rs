//! Quadratic polynomials on phase space, with analytic gradients.
//!
//! Deformation functions in tests and verification runs are drawn from this
//! family: degree <= 2 keeps the deformed fields polynomial while exercising
//! every partial-derivative term of the construction.

use rand::Rng;

use crate::field::ScalarField;
use crate::state::State;

/// Coefficients over the monomial basis 1, x, y, z, x^2, y^2, z^2, xy, xz, yz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticPoly {
    pub coeffs: [f64; 10],
}

impl QuadraticPoly {
    pub fn new(coeffs: [f64; 10]) -> Self {
        QuadraticPoly { coeffs }
    }

    pub fn zero() -> Self {
        QuadraticPoly::new([0.0; 10])
    }

    /// The linear polynomial k * z.
    pub fn linear_z(k: f64) -> Self {
        let mut c = [0.0; 10];
        c[3] = k;
        QuadraticPoly::new(c)
    }

    /// Coefficients drawn uniformly from [-scale, scale].
    pub fn random(rng: &mut impl Rng, scale: f64) -> Self {
        let mut c = [0.0; 10];
        for v in &mut c {
            *v = rng.gen_range(-scale..=scale);
        }
        QuadraticPoly::new(c)
    }

    pub fn value(&self, s: State) -> f64 {
        let State { x, y, z } = s;
        let c = &self.coeffs;
        c[0] + c[1] * x
            + c[2] * y
            + c[3] * z
            + c[4] * x * x
            + c[5] * y * y
            + c[6] * z * z
            + c[7] * x * y
            + c[8] * x * z
            + c[9] * y * z
    }

    pub fn gradient(&self, s: State) -> State {
        let State { x, y, z } = s;
        let c = &self.coeffs;
        State::new(
            c[1] + 2.0 * c[4] * x + c[7] * y + c[8] * z,
            c[2] + 2.0 * c[5] * y + c[7] * x + c[9] * z,
            c[3] + 2.0 * c[6] * z + c[8] * x + c[9] * y,
        )
    }

    pub fn as_scalar_field(&self) -> ScalarField {
        let p = *self;
        let q = *self;
        ScalarField::new(move |s| p.value(s), move |s| q.gradient(s))
    }
}

impl From<QuadraticPoly> for ScalarField {
    fn from(p: QuadraticPoly) -> ScalarField {
        p.as_scalar_field()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_finite_differences() {
        let p = QuadraticPoly::new([0.3, -1.0, 0.5, 2.0, 0.25, -0.75, 1.5, 0.1, -0.2, 0.9]);
        let sf = ScalarField::from_fn(move |s| p.value(s));
        for s in [State::new(1.0, -2.0, 0.5), State::new(-3.0, 4.0, 2.0)] {
            let diff = p.gradient(s) - sf.fd_gradient(s);
            assert!(diff.max_abs() < 1e-7);
        }
    }

    #[test]
    fn linear_z_value_and_gradient() {
        let p = QuadraticPoly::linear_z(0.9);
        let s = State::new(1.0, 2.0, 3.0);
        assert_eq!(p.value(s), 2.7);
        assert_eq!(p.gradient(s), State::new(0.0, 0.0, 0.9));
    }
}
