//! Equilibrium location: damped Newton iteration from seed points, and the
//! closed-form equilibria of the deformed T system.

use num_complex::Complex64;
use thiserror::Error;

use crate::analysis::eigen::{classify, eigenvalues_3x3, Classification};
use crate::deform::DeformedParams;
use crate::field::VectorField;
use crate::state::State;

/// Default residual scale for Newton convergence: |f| < tol * (1 + |point|).
pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;

const MAX_NEWTON_ITERS: usize = 100;
const MAX_HALVINGS: usize = 40;
const DEDUP_DISTANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum NewtonError {
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian encountered")]
    SingularJacobian,
}

/// A converged equilibrium with its linearization data.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub point: State,
    /// Spectrum of the Jacobian at `point`, real parts descending.
    pub eigenvalues: [Complex64; 3],
    pub classification: Classification,
    /// |f(point)| at convergence.
    pub residual: f64,
}

/// A seed that failed to converge, kept for reporting.
#[derive(Debug, Clone)]
pub struct SeedFailure {
    pub seed: State,
    pub error: NewtonError,
}

/// Outcome of a multi-seed search: deduplicated equilibria plus per-seed
/// failures (failures are informational, not fatal).
#[derive(Debug, Clone, Default)]
pub struct EquilibriumSearch {
    pub equilibria: Vec<Equilibrium>,
    pub failures: Vec<SeedFailure>,
}

/// Damped Newton iteration from each seed; converged roots are deduplicated
/// and returned sorted by coordinates.
pub fn find_equilibria(f: &VectorField, seeds: &[State], tol: f64) -> EquilibriumSearch {
    let mut out = EquilibriumSearch::default();
    for &seed in seeds {
        match newton_root(f, seed, tol) {
            Ok(point) => {
                let already_known = out
                    .equilibria
                    .iter()
                    .any(|e| (e.point - point).norm() < DEDUP_DISTANCE);
                if !already_known {
                    out.equilibria.push(make_equilibrium(f, point));
                }
            }
            Err(error) => out.failures.push(SeedFailure { seed, error }),
        }
    }
    out.equilibria.sort_by(|a, b| {
        (a.point.x, a.point.y, a.point.z)
            .partial_cmp(&(b.point.x, b.point.y, b.point.z))
            .unwrap()
    });
    out
}

fn make_equilibrium(f: &VectorField, point: State) -> Equilibrium {
    let eigenvalues = eigenvalues_3x3(&f.jacobian(point));
    Equilibrium {
        point,
        eigenvalues,
        classification: classify(&eigenvalues),
        residual: f.eval(point).norm(),
    }
}

fn newton_root(f: &VectorField, seed: State, tol: f64) -> Result<State, NewtonError> {
    let mut point = seed;
    let mut residual = f.eval(point).norm();
    for iteration in 0..MAX_NEWTON_ITERS {
        if !point.is_finite() || !residual.is_finite() {
            return Err(NewtonError::NoConvergence { iterations: iteration, residual });
        }
        if residual < tol * (1.0 + point.norm()) {
            return Ok(point);
        }
        let jac = f.jacobian(point);
        let step = jac.solve(&f.eval(point)).ok_or(NewtonError::SingularJacobian)?;

        // Halve the step until the residual actually decreases.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let candidate = point - step * scale;
            let cand_residual = f.eval(candidate).norm();
            if cand_residual < residual {
                point = candidate;
                residual = cand_residual;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(NewtonError::NoConvergence {
                iterations: iteration + 1,
                residual,
            });
        }
    }
    if residual < tol * (1.0 + point.norm()) {
        Ok(point)
    } else {
        Err(NewtonError::NoConvergence { iterations: MAX_NEWTON_ITERS, residual })
    }
}

/// Closed-form equilibria of the deformed T system.
#[derive(Debug, Clone)]
pub struct ClosedFormEquilibria {
    /// The origin first, then the nonzero branch sorted by x.
    pub points: Vec<State>,
    /// True when the nonzero branch has a negative discriminant and only
    /// the origin is real.
    pub complex_branch: bool,
}

/// Equilibria of x' = -ax + ay - gxy, y' = (c-a)x - axz, z' = -bz + xy
/// solved in closed form.
///
/// Setting y' = 0 forces x = 0 (whence the origin) or z = (c-a)/a. On the
/// nonzero branch, z' = 0 gives x y = b(c-a)/a and x' = 0 gives
/// y - x = g b (c-a) / a^2, so x solves x^2 + Sx - P = 0 with
/// S = g b (c-a)/a^2 and P = b (c-a)/a.
pub fn equilibria_closed_form(dp: DeformedParams) -> ClosedFormEquilibria {
    let (a, b, c, g) = (dp.base.a, dp.base.b, dp.base.c, dp.g);
    let z_star = (c - a) / a;
    let product = b * z_star;
    let spread = g * b * z_star / a;
    let discriminant = spread * spread + 4.0 * product;

    let mut points = vec![State::ZERO];
    if discriminant < 0.0 {
        return ClosedFormEquilibria { points, complex_branch: true };
    }

    let sq = discriminant.sqrt();
    // Stable quadratic roots of x^2 + S x - P = 0.
    let (x1, x2) = if spread == 0.0 && product == 0.0 {
        (0.0, 0.0)
    } else {
        let q = -(spread + spread.signum() * sq) / 2.0;
        if q != 0.0 {
            (q, -product / q)
        } else {
            // S = 0, P = 0 handled above; S = 0, P > 0 gives +-sqrt(P).
            (sq / 2.0, -sq / 2.0)
        }
    };

    let mut branch: Vec<State> = [x1, x2]
        .iter()
        .map(|&x| State::new(x, x + spread, z_star))
        .filter(|p| (*p - State::ZERO).norm() > DEDUP_DISTANCE)
        .collect();
    branch.sort_by(|p, q| p.x.partial_cmp(&q.x).unwrap());
    branch.dedup_by(|p, q| (*p - *q).norm() < DEDUP_DISTANCE);
    points.extend(branch);
    ClosedFormEquilibria { points, complex_branch: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::particular_field;
    use crate::tsystem::{t_field, TParams};

    fn paper_setup() -> DeformedParams {
        DeformedParams { base: TParams::new(2.0, 0.2, 30.0).unwrap(), g: 0.9 }
    }

    fn grid_seeds(lo: f64, hi: f64, n: usize) -> Vec<State> {
        let mut seeds = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let t = |m: usize| lo + (hi - lo) * m as f64 / (n - 1) as f64;
                    seeds.push(State::new(t(i), t(j), t(k)));
                }
            }
        }
        seeds
    }

    #[test]
    fn closed_form_matches_reference_values() {
        let cf = equilibria_closed_form(paper_setup());
        assert!(!cf.complex_branch);
        assert_eq!(cf.points.len(), 3);
        assert_eq!(cf.points[0], State::ZERO);
        let lo = cf.points[1];
        let hi = cf.points[2];
        assert!((lo.x + 2.417988).abs() < 1e-5, "{lo:?}");
        assert!((lo.y + 1.157988).abs() < 1e-5);
        assert!((lo.z - 14.0).abs() < 1e-12);
        assert!((hi.x - 1.157988).abs() < 1e-5, "{hi:?}");
        assert!((hi.y - 2.417988).abs() < 1e-5);
    }

    #[test]
    fn closed_form_satisfies_branch_relations() {
        let dp = paper_setup();
        let (a, b, c, g) = (dp.base.a, dp.base.b, dp.base.c, dp.g);
        let cf = equilibria_closed_form(dp);
        for p in &cf.points[1..] {
            assert!((p.z - (c - a) / a).abs() < 1e-12);
            assert!((p.x * p.y - b * (c - a) / a).abs() < 1e-10);
            assert!((p.y - p.x - g * b * (c - a) / (a * a)).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_undeformed_branch_is_symmetric() {
        let dp = DeformedParams { base: TParams::new(2.0, 0.2, 30.0).unwrap(), g: 0.0 };
        let cf = equilibria_closed_form(dp);
        assert_eq!(cf.points.len(), 3);
        let x_expected = (0.2 * 28.0 / 2.0_f64).sqrt();
        for p in &cf.points[1..] {
            assert!((p.y - p.x).abs() < 1e-12);
            assert!((p.x.abs() - x_expected).abs() < 1e-12);
            assert!((p.z - 14.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_degenerate_collapses_to_origin() {
        let dp = DeformedParams { base: TParams::new(2.0, 0.2, 2.0).unwrap(), g: 0.5 };
        let cf = equilibria_closed_form(dp);
        assert!(!cf.complex_branch);
        assert_eq!(cf.points, vec![State::ZERO]);
    }

    #[test]
    fn closed_form_reports_complex_branch() {
        // c < a makes the product negative and the discriminant can go
        // negative for small g.
        let dp = DeformedParams { base: TParams::new(2.0, 0.2, 1.0).unwrap(), g: 0.1 };
        let cf = equilibria_closed_form(dp);
        assert!(cf.complex_branch);
        assert_eq!(cf.points, vec![State::ZERO]);
    }

    #[test]
    fn newton_from_grid_finds_exactly_three() {
        let f = particular_field(paper_setup()).unwrap();
        let search = find_equilibria(&f, &grid_seeds(-5.0, 5.0, 5), DEFAULT_NEWTON_TOL);
        assert_eq!(search.equilibria.len(), 3, "found {:?}", search.equilibria);
        let cf = equilibria_closed_form(paper_setup());
        let mut expected = cf.points.clone();
        expected.sort_by(|p, q| p.x.partial_cmp(&q.x).unwrap());
        for (eq, want) in search.equilibria.iter().zip(&expected) {
            assert!((eq.point - *want).norm() < 1e-8, "{:?} vs {:?}", eq.point, want);
        }
    }

    #[test]
    fn newton_at_origin_is_exact() {
        let f = t_field(TParams::new(2.0, 0.2, 30.0).unwrap()).unwrap();
        let search = find_equilibria(&f, &[State::ZERO], DEFAULT_NEWTON_TOL);
        assert_eq!(search.equilibria.len(), 1);
        assert!(search.equilibria[0].residual < 1e-12);
        assert_eq!(search.equilibria[0].point, State::ZERO);
    }

    #[test]
    fn classification_of_reference_equilibria() {
        let f = particular_field(paper_setup()).unwrap();
        let cf = equilibria_closed_form(paper_setup());
        let search = find_equilibria(&f, &cf.points, DEFAULT_NEWTON_TOL);
        assert_eq!(search.equilibria.len(), 3);
        for eq in &search.equilibria {
            if eq.point.norm() < 1e-9 {
                assert_eq!(eq.classification, Classification::SaddlePoint);
            } else {
                assert_eq!(eq.classification, Classification::SaddleFocus);
            }
        }
    }
}
