//! Integrable deformations of vector fields with a cross-product
//! Hamilton-Poisson part.
//!
//! Given f = g + h where g = mu * (grad H x grad C), replacing H and C by
//! H + alpha and C + beta deforms g into mu * grad(H + alpha) x grad(C + beta)
//! while leaving h untouched. `deform_generic` implements that construction
//! for arbitrary (mu, H, C); `deform_t` is its closed-form instantiation for
//! the T system, and `particular_field` the one-parameter family obtained
//! from alpha = g z, beta = 0.

use crate::field::{ScalarField, VectorField};
use crate::state::{Matrix3, State};
use crate::tsystem::{self, ParamError, TParams};

/// A pair of deformation functions (alpha, beta).
#[derive(Clone)]
pub struct DeformationSpec {
    pub alpha: ScalarField,
    pub beta: ScalarField,
}

impl DeformationSpec {
    pub fn new(alpha: ScalarField, beta: ScalarField) -> Self {
        DeformationSpec { alpha, beta }
    }

    /// alpha = beta = 0: the deformation degenerates to the base system.
    pub fn vanishing() -> Self {
        DeformationSpec { alpha: ScalarField::zero(), beta: ScalarField::zero() }
    }

    /// alpha = g z, beta = 0: the deformation behind `particular_field`.
    pub fn linear_in_z(g: f64) -> Self {
        DeformationSpec {
            alpha: ScalarField::new(move |s| g * s.z, move |_| State::new(0.0, 0.0, g)),
            beta: ScalarField::zero(),
        }
    }
}

/// T-system parameters plus the deformation parameter g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformedParams {
    pub base: TParams,
    pub g: f64,
}

impl DeformedParams {
    pub fn new(base: TParams, g: f64) -> Result<Self, ParamError> {
        base.validate()?;
        Ok(DeformedParams { base, g })
    }
}

/// Deformation of an arbitrary field `f` whose Hamilton-Poisson part has the
/// cross-product form mu * (grad H x grad C). Adds to each component the
/// bracket combinations of the partials of alpha and beta, so that the
/// deformed Hamilton-Poisson part becomes mu * grad(H+alpha) x grad(C+beta).
///
/// The Jacobian of the result is left to the finite-difference fallback;
/// an analytic Jacobian would require second derivatives of alpha and beta.
pub fn deform_generic(
    f: &VectorField,
    mu: &ScalarField,
    h: &ScalarField,
    c: &ScalarField,
    spec: &DeformationSpec,
) -> VectorField {
    let f = f.clone();
    let mu = mu.clone();
    let h = h.clone();
    let c = c.clone();
    let alpha = spec.alpha.clone();
    let beta = spec.beta.clone();
    VectorField::new(move |s| {
        let base = f.eval(s);
        let m = mu.value(s);
        let gh = h.gradient(s);
        let gc = c.gradient(s);
        let ga = alpha.gradient(s);
        let gb = beta.gradient(s);
        let dx = gh.y * gb.z - gh.z * gb.y + ga.y * gc.z - ga.z * gc.y + ga.y * gb.z
            - ga.z * gb.y;
        let dy = gh.x * gb.z - gh.z * gb.x + ga.x * gc.z - ga.z * gc.x + ga.x * gb.z
            - ga.z * gb.x;
        let dz = gh.x * gb.y - gh.y * gb.x + ga.x * gc.y - ga.y * gc.x + ga.x * gb.y
            - ga.y * gb.x;
        State::new(base.x + m * dx, base.y - m * dy, base.z + m * dz)
    })
}

/// The deformed T system for arbitrary deformation functions: the
/// instantiation of `deform_generic` with f the T system, mu = x, and the
/// standard constants of motion H = x, C = y^2/2 + a z^2/2.
pub fn deform_t(p: TParams, spec: &DeformationSpec) -> Result<VectorField, ParamError> {
    p.validate()?;
    let TParams { a, b, c } = p;
    let alpha = spec.alpha.clone();
    let beta = spec.beta.clone();
    Ok(VectorField::new(move |s| {
        let State { x, y, z } = s;
        let ga = alpha.gradient(s);
        let gb = beta.gradient(s);
        State::new(
            -a * x + a * y + x * (a * z * ga.y - y * ga.z + ga.y * gb.z - ga.z * gb.y),
            (c - a) * x - a * x * z - x * (gb.z + a * z * ga.x + ga.x * gb.z - ga.z * gb.x),
            -b * z + x * y + x * (gb.y + y * ga.x + ga.x * gb.y - ga.y * gb.x),
        )
    }))
}

/// The particular deformed T system for alpha = g z, beta = 0:
///
/// ```text
/// x' = -a x + a y - g x y
/// y' = (c - a) x - a x z
/// z' = -b z + x y
/// ```
///
/// Equivalently, the T system with the parametric control u = -g x y added
/// to the first equation. Carries an analytic Jacobian.
pub fn particular_field(dp: DeformedParams) -> Result<VectorField, ParamError> {
    dp.base.validate()?;
    let TParams { a, b, c } = dp.base;
    let g = dp.g;
    Ok(VectorField::with_jacobian(
        move |s| {
            State::new(
                -a * s.x + a * s.y - g * s.x * s.y,
                (c - a) * s.x - a * s.x * s.z,
                -b * s.z + s.x * s.y,
            )
        },
        move |s| {
            Matrix3::from_rows([
                [-a - g * s.y, a - g * s.x, 0.0],
                [(c - a) - a * s.z, 0.0, -a * s.x],
                [s.y, s.x, -b],
            ])
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::QuadraticPoly;
    use crate::tsystem::{hp_constants, t_field};

    fn chaotic_params() -> TParams {
        TParams::new(2.0, 0.2, 30.0).unwrap()
    }

    fn sample_points() -> Vec<State> {
        vec![
            State::ZERO,
            State::new(1.0, 1.0, 1.0),
            State::new(-2.0, 0.5, 3.0),
            State::new(0.01, 0.01, 14.01),
            State::new(4.0, -3.0, -2.0),
        ]
    }

    #[test]
    fn vanishing_spec_is_identity() {
        let p = chaotic_params();
        let base = t_field(p).unwrap();
        let deformed = deform_t(p, &DeformationSpec::vanishing()).unwrap();
        for s in sample_points() {
            assert_eq!(deformed.eval(s), base.eval(s));
        }
    }

    #[test]
    fn generic_reproduces_particular_value() {
        let p = chaotic_params();
        let base = t_field(p).unwrap();
        let (h, c) = hp_constants(p);
        let spec = DeformationSpec::linear_in_z(0.9);
        let f = deform_generic(&base, &ScalarField::coordinate_x(), &h, &c, &spec);
        let v = f.eval(State::new(1.0, 1.0, 1.0));
        let expected = State::new(-0.9, 26.0, 0.8);
        assert!((v - expected).max_abs() < 1e-14, "got {v:?}");
    }

    #[test]
    fn deform_t_matches_particular_for_linear_z() {
        let p = chaotic_params();
        let spec = DeformationSpec::linear_in_z(0.9);
        let lhs = deform_t(p, &spec).unwrap();
        let rhs = particular_field(DeformedParams { base: p, g: 0.9 }).unwrap();
        for s in sample_points() {
            let diff = lhs.eval(s) - rhs.eval(s);
            assert!(diff.max_abs() < 1e-12, "mismatch at {s:?}: {diff:?}");
        }
    }

    #[test]
    fn particular_reduces_to_t_at_g_zero() {
        let p = chaotic_params();
        let base = t_field(p).unwrap();
        let f = particular_field(DeformedParams { base: p, g: 0.0 }).unwrap();
        for s in sample_points() {
            assert_eq!(f.eval(s), base.eval(s));
        }
    }

    #[test]
    fn particular_near_equilibrium_from_rounded_coordinates() {
        // The rounded saddle-focus coordinates leave only a small residual.
        let f = particular_field(DeformedParams { base: chaotic_params(), g: 0.9 }).unwrap();
        let v = f.eval(State::new(1.16, 2.42, 14.0));
        assert!(v.max_abs() < 0.02, "residual {v:?}");
    }

    #[test]
    fn control_identity() {
        let p = chaotic_params();
        let g = 0.9;
        let base = t_field(p).unwrap();
        let f = particular_field(DeformedParams { base: p, g }).unwrap();
        for s in sample_points() {
            let diff = f.eval(s) - base.eval(s);
            let control = State::new(-g * s.x * s.y, 0.0, 0.0);
            assert!((diff - control).max_abs() < 1e-12);
        }
    }

    #[test]
    fn particular_rejects_zero_a() {
        let dp = DeformedParams { base: TParams { a: 0.0, b: 0.2, c: 30.0 }, g: 0.9 };
        assert!(particular_field(dp).is_err());
    }

    #[test]
    fn quadratic_spec_consistency_spot_check() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let p = chaotic_params();
        let base = t_field(p).unwrap();
        let (h, c) = hp_constants(p);
        let spec = DeformationSpec::new(
            QuadraticPoly::random(&mut rng, 1.0).into(),
            QuadraticPoly::random(&mut rng, 1.0).into(),
        );
        let generic = deform_generic(&base, &ScalarField::coordinate_x(), &h, &c, &spec);
        let direct = deform_t(p, &spec).unwrap();
        for s in sample_points() {
            let diff = generic.eval(s) - direct.eval(s);
            assert!(diff.max_abs() < 1e-10, "mismatch at {s:?}: {diff:?}");
        }
    }
}
