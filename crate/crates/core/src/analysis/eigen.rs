//! Eigenvalues of 3x3 matrices via the characteristic cubic, plus the
//! stability classification of equilibria.

use num_complex::Complex64;

use crate::state::Matrix3;

/// Eigenvalues with |Re| below this are treated as lying on the imaginary
/// axis when classifying.
pub const HYPERBOLICITY_TOL: f64 = 1e-9;

/// Stability type of an equilibrium, read off the eigenvalue signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    SaddlePoint,
    SaddleFocus,
    Center,
    NonHyperbolic,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Classification::StableNode => "stable node",
            Classification::StableFocus => "stable focus",
            Classification::UnstableNode => "unstable node",
            Classification::UnstableFocus => "unstable focus",
            Classification::SaddlePoint => "saddle point",
            Classification::SaddleFocus => "saddle focus",
            Classification::Center => "center",
            Classification::NonHyperbolic => "non-hyperbolic",
        };
        f.write_str(name)
    }
}

/// Roots of the characteristic polynomial of `m`, sorted by real part
/// descending (ties broken by imaginary part descending).
///
/// The cubic is solved in closed form (trigonometric branch for three real
/// roots, Cardano otherwise) and each real root is polished by one Newton
/// step on the characteristic polynomial. Complex roots come out as exact
/// conjugate pairs.
pub fn eigenvalues_3x3(m: &Matrix3) -> [Complex64; 3] {
    // Characteristic polynomial: l^3 + c2 l^2 + c1 l + c0.
    let c2 = -m.trace();
    let c1 = m.minor_sum();
    let c0 = -m.det();

    let mut roots = solve_cubic(c2, c1, c0);
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re).unwrap().then(b.im.partial_cmp(&a.im).unwrap())
    });
    roots
}

fn eval_poly(c2: f64, c1: f64, c0: f64, x: f64) -> f64 {
    ((x + c2) * x + c1) * x + c0
}

fn eval_poly_deriv(c2: f64, c1: f64, x: f64) -> f64 {
    (3.0 * x + 2.0 * c2) * x + c1
}

fn newton_polish(c2: f64, c1: f64, c0: f64, x: f64) -> f64 {
    let d = eval_poly_deriv(c2, c1, x);
    // Near a multiple root the derivative vanishes; leave the root alone.
    if d.abs() < 1e-14 * (1.0 + x * x) {
        return x;
    }
    x - eval_poly(c2, c1, c0, x) / d
}

fn solve_cubic(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    // Depressed form t^3 + p t + q with l = t - c2/3.
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;

    let scale = shift.abs().max(p.abs().sqrt()).max(q.abs().cbrt()).max(1e-30);
    if p.abs() < 1e-14 * scale * scale && q.abs() < 1e-14 * scale * scale * scale {
        // Triple root.
        let r = -shift;
        return [Complex64::new(r, 0.0); 3];
    }

    let discriminant = -4.0 * p * p * p - 27.0 * q * q;
    if discriminant >= 0.0 {
        // Three real roots: trigonometric method.
        let amp = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (amp * p)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let t = amp * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            let r = newton_polish(c2, c1, c0, t - shift);
            *slot = Complex64::new(r, 0.0);
        }
        out
    } else {
        // One real root (Cardano, cancellation-safe branch) plus a
        // conjugate pair from the deflated quadratic.
        let d = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let u = if q <= 0.0 { (-q / 2.0 + d).cbrt() } else { -(q / 2.0 + d).cbrt() };
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let real = newton_polish(c2, c1, c0, u + v - shift);

        // l^3 + c2 l^2 + c1 l + c0 = (l - real)(l^2 + b l + c).
        let b = c2 + real;
        let c = c1 + real * b;
        let quad_disc = b * b - 4.0 * c;
        if quad_disc < 0.0 {
            let re = -b / 2.0;
            let im = (-quad_disc).sqrt() / 2.0;
            [Complex64::new(real, 0.0), Complex64::new(re, im), Complex64::new(re, -im)]
        } else {
            // Polishing nudged a near-degenerate pair back onto the real
            // axis; fall back to real quadratic roots.
            let sq = quad_disc.sqrt();
            let t = -(b + b.signum() * sq) / 2.0;
            let (r1, r2) = if t != 0.0 { (t, c / t) } else { (0.0, 0.0) };
            [
                Complex64::new(real, 0.0),
                Complex64::new(newton_polish(c2, c1, c0, r1), 0.0),
                Complex64::new(newton_polish(c2, c1, c0, r2), 0.0),
            ]
        }
    }
}

/// Classify an equilibrium from the eigenvalues of its Jacobian.
pub fn classify(eigs: &[Complex64; 3]) -> Classification {
    let has_pair = eigs.iter().any(|e| e.im != 0.0);
    let on_axis = |e: &Complex64| e.re.abs() < HYPERBOLICITY_TOL;
    if eigs.iter().all(on_axis) && has_pair {
        return Classification::Center;
    }
    if eigs.iter().any(on_axis) {
        return Classification::NonHyperbolic;
    }
    let n_positive = eigs.iter().filter(|e| e.re > 0.0).count();
    match (n_positive, has_pair) {
        (0, false) => Classification::StableNode,
        (0, true) => Classification::StableFocus,
        (3, false) => Classification::UnstableNode,
        (3, true) => Classification::UnstableFocus,
        (_, false) => Classification::SaddlePoint,
        (_, true) => Classification::SaddleFocus,
    }
}
