//! The T system, its Hamilton-Poisson part, and the cross-product form.
//!
//! The T system is the three-dimensional quadratic system
//!
//! ```text
//! x' = -a x + a y
//! y' = (c - a) x - a x z
//! z' = -b z + x y
//! ```
//!
//! with a != 0. Dropping the linear terms `-a x + a y`, `(c - a) x` and
//! `-b z` leaves the subsystem (0, -a x z, x y), which conserves H = x and
//! C = y^2/2 + a z^2/2 and can be written as x * (grad H x grad C). That
//! cross-product representation is the entry point for building integrable
//! deformations.

use thiserror::Error;

use crate::field::{ScalarField, VectorField};
use crate::state::{Matrix3, State};

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("parameter a must be nonzero")]
    ZeroA,
}

/// Parameters (a, b, c) of the T system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, ParamError> {
        let p = TParams { a, b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.a == 0.0 || !self.a.is_finite() {
            return Err(ParamError::ZeroA);
        }
        Ok(())
    }
}

/// The full T system with its analytic Jacobian.
pub fn t_field(p: TParams) -> Result<VectorField, ParamError> {
    p.validate()?;
    let TParams { a, b, c } = p;
    Ok(VectorField::with_jacobian(
        move |s| {
            State::new(
                -a * s.x + a * s.y,
                (c - a) * s.x - a * s.x * s.z,
                -b * s.z + s.x * s.y,
            )
        },
        move |s| {
            Matrix3::from_rows([
                [-a, a, 0.0],
                [(c - a) - a * s.z, 0.0, -a * s.x],
                [s.y, s.x, -b],
            ])
        },
    ))
}

/// The Hamilton-Poisson part (0, -a x z, x y) of the T system.
pub fn hp_field(p: TParams) -> Result<VectorField, ParamError> {
    p.validate()?;
    let a = p.a;
    Ok(VectorField::with_jacobian(
        move |s| State::new(0.0, -a * s.x * s.z, s.x * s.y),
        move |s| {
            Matrix3::from_rows([
                [0.0, 0.0, 0.0],
                [-a * s.z, 0.0, -a * s.x],
                [s.y, s.x, 0.0],
            ])
        },
    ))
}

/// The constants of motion (H, C) = (x, y^2/2 + a z^2/2) of the
/// Hamilton-Poisson part.
pub fn hp_constants(p: TParams) -> (ScalarField, ScalarField) {
    let a = p.a;
    let h = ScalarField::new(|s| s.x, |_| State::new(1.0, 0.0, 0.0));
    let c = ScalarField::new(
        move |s| 0.5 * s.y * s.y + 0.5 * a * s.z * s.z,
        move |s| State::new(0.0, s.y, a * s.z),
    );
    (h, c)
}

/// The cross-product field mu * (grad H x grad C). The Jacobian is left to
/// the finite-difference fallback.
pub fn cross_form(mu: ScalarField, h: ScalarField, c: ScalarField) -> VectorField {
    VectorField::new(move |s| mu.value(s) * h.gradient(s).cross(&c.gradient(s)))
}

/// One alternative Hamilton-Poisson decomposition of the T system: the
/// subsystem field together with its two constants of motion.
pub struct HpDecomposition {
    pub field: VectorField,
    pub h: ScalarField,
    pub c: ScalarField,
}

/// The two alternative Hamilton-Poisson parts of the T system, exposed for
/// experimentation. The deformation machinery defaults to `hp_field` with
/// `hp_constants`, from which the deformed T system is derived.
pub fn alternate_hp_parts(p: TParams) -> Result<Vec<HpDecomposition>, ParamError> {
    p.validate()?;
    let a = p.a;
    let h_shared = || {
        ScalarField::new(
            move |s| 0.5 * s.x * s.x - a * s.z,
            move |s| State::new(s.x, 0.0, -a),
        )
    };
    let first = HpDecomposition {
        field: VectorField::new(move |s| {
            State::new(a * s.y, -a * s.x - a * s.x * s.z, s.x * s.y)
        }),
        h: h_shared(),
        c: ScalarField::new(
            move |s| 0.5 * s.x * s.x + 0.5 * s.y * s.y + 0.5 * a * s.z * s.z,
            move |s| State::new(s.x, s.y, a * s.z),
        ),
    };
    let second = HpDecomposition {
        field: VectorField::new(move |s| State::new(a * s.y, -a * s.x * s.z, s.x * s.y)),
        h: h_shared(),
        c: ScalarField::new(
            move |s| 0.5 * s.y * s.y + 0.5 * a * s.z * s.z,
            move |s| State::new(0.0, s.y, a * s.z),
        ),
    };
    Ok(vec![first, second])
}

/// Rank-2 check for the 2x3 Jacobian of (H, C): some 2x2 minor must exceed
/// a threshold scaled by the point's magnitude.
pub fn functionally_independent(h: &ScalarField, c: &ScalarField, s: State) -> bool {
    let gh = h.gradient(s);
    let gc = c.gradient(s);
    // The three 2x2 minors are the components of grad H x grad C.
    let minors = gh.cross(&gc);
    let threshold = 1e-10 * (1.0 + s.dot(&s));
    minors.max_abs() > threshold
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chaotic_params() -> TParams {
        TParams::new(2.0, 0.2, 30.0).unwrap()
    }

    #[test]
    fn origin_is_equilibrium() {
        let f = t_field(chaotic_params()).unwrap();
        assert_eq!(f.eval(State::ZERO), State::ZERO);
    }

    #[test]
    fn t_field_at_unit_point() {
        let f = t_field(chaotic_params()).unwrap();
        let v = f.eval(State::new(1.0, 1.0, 1.0));
        assert_eq!(v, State::new(0.0, 26.0, 0.8));
    }

    #[test]
    fn t_field_jacobian_at_origin() {
        let j = t_field(chaotic_params()).unwrap().jacobian(State::ZERO);
        let expected = Matrix3::from_rows([[-2.0, 2.0, 0.0], [28.0, 0.0, 0.0], [0.0, 0.0, -0.2]]);
        assert_eq!(j, expected);
    }

    #[test]
    fn rejects_zero_a() {
        assert_eq!(t_field(TParams { a: 0.0, b: 0.2, c: 30.0 }).err(), Some(ParamError::ZeroA));
        assert_eq!(hp_field(TParams { a: 0.0, b: 0.2, c: 30.0 }).err(), Some(ParamError::ZeroA));
    }

    #[test]
    fn hp_field_stationary_on_x_zero_plane() {
        let f = hp_field(chaotic_params()).unwrap();
        assert_eq!(f.eval(State::new(0.0, 5.0, 7.0)), State::ZERO);
    }

    #[test]
    fn hp_field_values() {
        let f = hp_field(chaotic_params()).unwrap();
        assert_eq!(f.eval(State::new(1.0, 2.0, 3.0)), State::new(0.0, -6.0, 2.0));
        assert_eq!(f.eval(State::new(-1.0, 1.0, 1.0)), State::new(0.0, 2.0, -1.0));
    }

    #[test]
    fn hp_constants_values() {
        let (h, c) = hp_constants(chaotic_params());
        assert_eq!(h.value(State::new(3.0, -1.0, 4.0)), 3.0);
        assert_eq!(c.value(State::new(0.0, 2.0, 2.0)), 6.0);
        assert_eq!(c.gradient(State::new(0.0, 2.0, 2.0)), State::new(0.0, 2.0, 4.0));
    }

    #[test]
    fn cross_form_reproduces_hp_field() {
        let p = chaotic_params();
        let (h, c) = hp_constants(p);
        let cf = cross_form(ScalarField::coordinate_x(), h, c);
        let v = cf.eval(State::new(1.0, 2.0, 3.0));
        assert_eq!(v, State::new(0.0, -6.0, 2.0));
    }

    #[test]
    fn cross_form_degenerate_cases() {
        let p = chaotic_params();
        let (h, _) = hp_constants(p);
        let parallel = cross_form(ScalarField::coordinate_x(), h.clone(), h);
        assert_eq!(parallel.eval(State::new(1.5, -2.0, 0.3)), State::ZERO);

        let (h, c) = hp_constants(p);
        let scaled_by_zero = cross_form(ScalarField::constant(0.0), h, c);
        assert_eq!(scaled_by_zero.eval(State::new(1.5, -2.0, 0.3)), State::ZERO);
    }

    #[test]
    fn first_alternate_field_value() {
        let parts = alternate_hp_parts(chaotic_params()).unwrap();
        let v = parts[0].field.eval(State::new(1.0, 1.0, 1.0));
        assert_eq!(v, State::new(2.0, -4.0, 1.0));
    }

    #[test]
    fn alternates_conserve_their_invariants() {
        let parts = alternate_hp_parts(chaotic_params()).unwrap();
        let samples = [
            State::new(1.0, 1.0, 1.0),
            State::new(-2.0, 0.5, 3.0),
            State::new(0.3, -4.0, 0.0),
            State::new(5.0, 2.5, -1.5),
        ];
        for part in &parts {
            for &s in &samples {
                assert!(part.h.derivative_along(&part.field, s).abs() < 1e-12);
                assert!(part.c.derivative_along(&part.field, s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn independence_holds_off_the_x_axis() {
        let (h, c) = hp_constants(chaotic_params());
        assert!(functionally_independent(&h, &c, State::new(3.0, 1.0, 0.0)));
        assert!(functionally_independent(&h, &c, State::new(0.0, 0.0, 2.0)));
        // y = z = 0 is exactly the degenerate set.
        assert!(!functionally_independent(&h, &c, State::new(7.0, 0.0, 0.0)));
    }
}
