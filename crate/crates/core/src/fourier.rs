//! Fourier transforms of the kernel and the deficit functions.
//!
//! Convention: `f^(t) = int f(x) exp(-2 pi i x t) dx`, with `t` in cycles per unit.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::extremal::{beurling_deficit, deficit_closed_form, eval_kernel, Kernel};
use crate::quad::{FilonRule, OscResult};
use crate::specfun::sici;

/// A sampled transform value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformValue {
    pub t: f64,
    pub value: Complex64,
}

/// Functions whose transform [`numeric_ft`] can compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FtKind {
    /// The kernel `g`.
    Slope,
    /// `psi = M - sgn`.
    Psi,
    /// `B - sgn`.
    PsiBeurling,
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Closed-form transform of `g`, supported on `[-1, 1]`.
pub fn g_hat(t: f64) -> Complex64 {
    if t <= -1.0 || t >= 1.0 {
        return Complex64::new(0.0, 0.0);
    }
    let e = Complex64::from_polar(1.0, 2.0 * PI * t);
    let c = I / (2.0 * PI);
    if t <= 0.0 {
        e * (1.0 + t + c) - c
    } else {
        e * (1.0 - t - c) + c
    }
}

/// Transform of `psi`: `(g^(t) - 1) / (pi i t)`, equal to 2 at the origin.
pub fn psi_hat(t: f64) -> Complex64 {
    if t.abs() < 1e-5 {
        // second-order Taylor expansion; the t < 0 side is the conjugate
        let c1 = Complex64::new(-1.0, 2.0 * PI);
        let c2 = Complex64::new(-4.0 * PI * PI / 3.0, -4.0 * PI / 3.0);
        let v = 2.0 + c1 * t.abs() + c2 * (t * t);
        return if t < 0.0 { v.conj() } else { v };
    }
    (g_hat(t) - 1.0) / (PI * I * t)
}

/// Transform of `x -> psi(delta x)`, that is `psi_hat(t / delta) / delta`.
pub fn psi_hat_scaled(delta: f64, t: f64) -> Result<Complex64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(domain(format!("delta must be positive and finite, got {delta}")));
    }
    Ok(psi_hat(t / delta) / delta)
}

/// Transform of `phi(x) = psi(-x)`.
pub fn phi_hat(t: f64) -> Complex64 {
    psi_hat(-t)
}

/// Half-width of the directly integrated window.
const WINDOW: f64 = 64.0;
/// Geometric tail panels stop here; beyond it only the `1/x^2` term is kept.
const FAR: f64 = 1.0e6;

/// Numerical transform by Filon quadrature on `[-T, T]` plus tails.
///
/// On each tail the function is written as `sin^2(pi x) r(x)` with `r`
/// smooth, so the tail splits into three integrals of `r` against pure
/// exponentials. Those run over geometrically growing Filon panels out to
/// `1e6`, and beyond that the leading `c / x^2` term of `r` is integrated
/// exactly through `E_1` on the imaginary axis.
pub fn numeric_ft(kind: FtKind, t: f64, tol: f64) -> Result<OscResult> {
    if !t.is_finite() {
        return Err(domain(format!("frequency must be finite, got {t}")));
    }
    if !(tol >= 1e-8) || !tol.is_finite() {
        return Err(domain(format!("tolerance must be at least 1e-8, got {tol}")));
    }
    let rule = FilonRule::new(16);
    let mut window = WINDOW;
    loop {
        let r = numeric_ft_window(&rule, kind, t, window);
        if r.err_estimate <= tol {
            return Ok(r);
        }
        if window >= 1024.0 {
            return Err(Error::BudgetExceeded {
                value: r.value.re,
                err_estimate: r.err_estimate,
                evaluations: r.evaluations,
            });
        }
        window *= 4.0;
    }
}

fn numeric_ft_window(rule: &FilonRule, kind: FtKind, t: f64, w: f64) -> OscResult {
    let f: fn(f64) -> f64 = match kind {
        FtKind::Slope => |x| eval_kernel(Kernel::Slope, x),
        FtKind::Psi => deficit_closed_form,
        FtKind::PsiBeurling => beurling_deficit,
    };
    let left = rule.integrate(f, -w, 0.0, t, 0.5);
    let right = rule.integrate(f, 0.0, w, t, 0.5);
    let mut value = left.value + right.value;
    let mut err = left.err_estimate + right.err_estimate;
    let mut evaluations = left.evaluations + right.evaluations;
    let mut add = |(v, e, n): (Complex64, f64, usize)| {
        value += v;
        err += e;
        evaluations += n;
    };
    match kind {
        FtKind::Slope => {
            add(sin2_tail(rule, &SLOPE_RIGHT, t, w));
            add(sin2_tail(rule, &SLOPE_LEFT, -t, w));
        }
        FtKind::PsiBeurling => {
            add(sin2_tail(rule, &BEURLING_RIGHT, t, w));
            add(sin2_tail(rule, &BEURLING_LEFT, -t, w));
        }
        FtKind::Psi => {
            let (pr, pl) = (deficit_closed_form(w), deficit_closed_form(-w));
            if t == 0.0 {
                // int_T^inf psi = -T psi(T) + 2 int_T^inf H, and likewise on the left
                let (hr, er, nr) = sin2_tail(rule, &MOMENT_RIGHT, 0.0, w);
                let (hl, el, nl) = sin2_tail(rule, &MOMENT_LEFT, 0.0, w);
                add((-w * (pr + pl) + 2.0 * (hr + hl), 2.0 * (er + el), nr + nl));
            } else {
                // one integration by parts moves the tail onto psi' = 2g
                let k = 2.0 * PI * I * t;
                let er = Complex64::from_polar(1.0, -2.0 * PI * w * t);
                let boundary = (pr * er - pl * er.conj()) / k;
                let (gr, e1, n1) = sin2_tail(rule, &SLOPE_RIGHT, t, w);
                let (gl, e2, n2) = sin2_tail(rule, &SLOPE_LEFT, -t, w);
                let scale = 1.0 / (PI * t.abs());
                add((boundary + (gr + gl) / (PI * I * t), scale * (e1 + e2), n1 + n2));
            }
        }
    }
    OscResult {
        value,
        err_estimate: err,
        evaluations,
    }
}

/// Smooth factor `r` of a tail `sin^2(pi y) r(y)`, `y >= T`, with
/// `|r(y) - lead / y^2| <= rest / y^3`.
struct TailFactor {
    r: fn(f64) -> f64,
    lead: f64,
    rest: f64,
}

const PI2: f64 = PI * PI;

// g(y) for y > 0 and g(-y), as sin^2(pi y) r(y)
const SLOPE_RIGHT: TailFactor = TailFactor {
    r: |y| -1.0 / (PI2 * y * (y + 1.0) * (y + 1.0)),
    lead: 0.0,
    rest: 1.0 / PI2,
};
const SLOPE_LEFT: TailFactor = TailFactor {
    r: |y| 1.0 / (PI2 * y * (y - 1.0) * (y - 1.0)),
    lead: 0.0,
    rest: 1.1 / PI2,
};
const MOMENT_RIGHT: TailFactor = TailFactor {
    r: |y| 1.0 / (PI2 * (y + 1.0) * (y + 1.0)),
    lead: 1.0 / PI2,
    rest: 2.0 / PI2,
};
const MOMENT_LEFT: TailFactor = TailFactor {
    r: |y| 1.0 / (PI2 * (y - 1.0) * (y - 1.0)),
    lead: 1.0 / PI2,
    rest: 2.2 / PI2,
};
const BEURLING_RIGHT: TailFactor = TailFactor {
    r: |y| 2.0 * crate::extremal::beurling_remainder(y) / (PI2 * y),
    lead: 1.0 / PI2,
    rest: 0.4 / PI2,
};
const BEURLING_LEFT: TailFactor = TailFactor {
    r: |y| 2.0 * (1.0 - y * crate::extremal::beurling_remainder(y)) / (PI2 * y * y),
    lead: 1.0 / PI2,
    rest: 0.4 / PI2,
};

/// `int_T^inf sin^2(pi y) r(y) exp(-2 pi i y t) dy` via
/// `sin^2(pi y) = 1/2 - e^{2 pi i y}/4 - e^{-2 pi i y}/4`.
fn sin2_tail(rule: &FilonRule, factor: &TailFactor, t: f64, start: f64) -> (Complex64, f64, usize) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut evaluations = 0;
    for (c, nu) in [(0.5, t), (-0.25, t - 1.0), (-0.25, t + 1.0)] {
        let (v, e, n) = smooth_tail(rule, factor, nu, start);
        value += v * c;
        err += e * c.abs();
        evaluations += n;
    }
    (value, err, evaluations)
}

fn smooth_tail(rule: &FilonRule, factor: &TailFactor, nu: f64, start: f64) -> (Complex64, f64, usize) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut evaluations = 0;
    let mut a = start;
    while a < FAR {
        let b = (1.5 * a).min(FAR);
        let p = rule.integrate(factor.r, a, b, nu, b - a);
        value += p.value;
        err += p.err_estimate;
        evaluations += p.evaluations;
        a = b;
    }
    value += factor.lead * inverse_square_tail(nu, FAR);
    err += factor.rest / (2.0 * FAR * FAR);
    (value, err, evaluations)
}

/// `int_X^inf exp(-2 pi i nu y) / y^2 dy = E_2(i a X) / X`, `a = 2 pi nu`.
fn inverse_square_tail(nu: f64, x: f64) -> Complex64 {
    let z = 2.0 * PI * nu.abs() * x;
    if z == 0.0 {
        return Complex64::new(1.0 / x, 0.0);
    }
    let (si, ci) = sici(z).expect("z > 0");
    let e1 = Complex64::new(-ci, si - FRAC_PI_2);
    let e2 = Complex64::from_polar(1.0, -z) - I * z * e1;
    let v = e2 / x;
    if nu < 0.0 {
        v.conj()
    } else {
        v
    }
}

/// Largest `|f^(t) + 1/(pi i t)|` over `samples`, all with `|t| >= 1`.
pub fn band_limit_check(kind: FtKind, samples: &[f64], tol: f64) -> Result<f64> {
    if kind == FtKind::Slope {
        return Err(domain("band identity applies to the deficit transforms only"));
    }
    if let Some(t) = samples.iter().find(|t| !(t.abs() >= 1.0)) {
        return Err(domain(format!("band samples need |t| >= 1, got {t}")));
    }
    let mut worst: f64 = 0.0;
    for &t in samples {
        let v = numeric_ft(kind, t, tol)?.value;
        worst = worst.max((v + 1.0 / (PI * I * t)).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_adaptive;

    /// Brute-force transform of `g` by adaptive quadrature of the real and
    /// imaginary parts on `[-L, L]`; the neglected tails are below `1/L^2`.
    fn g_hat_brute(t: f64) -> Complex64 {
        let l = 3000.0;
        let g = |x: f64| eval_kernel(Kernel::Slope, x);
        let re = integrate_adaptive(|x| g(x) * (2.0 * PI * x * t).cos(), -l, l, 1e-11).unwrap();
        let im = integrate_adaptive(|x| -g(x) * (2.0 * PI * x * t).sin(), -l, l, 1e-11).unwrap();
        Complex64::new(re.value, im.value)
    }

    #[test]
    fn g_hat_support_and_origin() {
        assert_eq!(g_hat(-2.0), Complex64::new(0.0, 0.0));
        assert_eq!(g_hat(1.0), Complex64::new(0.0, 0.0));
        assert!((g_hat(0.0) - 1.0).norm() < 1e-15);
        // continuous at the support edges
        assert!(g_hat(-1.0 + 1e-12).norm() < 1e-10);
        assert!(g_hat(1.0 - 1e-12).norm() < 1e-10);
    }

    #[test]
    fn g_hat_against_brute_force() {
        for t in [-0.8, -0.3, 0.0, 0.5, 0.9] {
            let d = (g_hat(t) - g_hat_brute(t)).norm();
            assert!(d < 1e-6, "t = {t}: {d}");
        }
    }

    #[test]
    fn g_hat_derivative_is_transform_of_moment() {
        // H = -u g, so g^'(t) = 2 pi i e^{2 pi i t} triangle(t)
        for t in [-0.7, -0.2, 0.4, 0.85] {
            let h = 1e-6;
            let d = (g_hat(t + h) - g_hat(t - h)) / (2.0 * h);
            let expect = 2.0 * PI * I * Complex64::from_polar(1.0, 2.0 * PI * t) * (1.0 - f64::abs(t));
            assert!((d - expect).norm() < 1e-6, "{t}");
        }
    }

    #[test]
    fn psi_hat_values() {
        assert_eq!(psi_hat(0.0), Complex64::new(2.0, 0.0));
        let v = psi_hat(2.0);
        assert!((v - I / (2.0 * PI)).norm() < 1e-15);
        for t in [1.0, 1.5, -3.0, 10.0] {
            assert!((psi_hat(t) + 1.0 / (PI * I * t)).norm() < 1e-15);
        }
    }

    #[test]
    fn psi_hat_taylor_branch_is_continuous() {
        for t in [1e-5, -1e-5] {
            let inside = psi_hat(t * (1.0 - 1e-9));
            let direct = (g_hat(t) - 1.0) / (PI * I * t);
            assert!((inside - direct).norm() < 1e-9, "{t}");
        }
    }

    #[test]
    fn psi_hat_is_hermitian() {
        for i in 0..200 {
            let t = -2.5 + 0.0251 * i as f64;
            assert!((psi_hat(-t) - psi_hat(t).conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn psi_hat_continuous_at_band_edges() {
        for e in [1.0, -1.0] {
            let inner = psi_hat(e * (1.0 - 1e-13));
            let outer = psi_hat(e * (1.0 + 1e-13));
            assert!((inner - outer).norm() < 1e-10);
        }
    }

    #[test]
    fn scaled_transform() {
        assert!((psi_hat_scaled(0.25, 0.0).unwrap() - 8.0).norm() < 1e-15);
        let v = psi_hat_scaled(0.5, 1.0).unwrap();
        assert!((v + 1.0 / (PI * I)).norm() < 1e-15);
        assert!(psi_hat_scaled(0.0, 1.0).is_err());
        assert!(psi_hat_scaled(-1.0, 1.0).is_err());
    }

    #[test]
    fn inverse_square_tail_against_quadrature() {
        for nu in [0.3, -0.3, 1.7] {
            let x = 50.0;
            let a = 2.0 * PI * nu;
            let l = 50_000.0;
            let re = integrate_adaptive(|y| (a * y).cos() / (y * y), x, l, 1e-13)
                .unwrap()
                .value;
            let im = integrate_adaptive(|y| -(a * y).sin() / (y * y), x, l, 1e-13)
                .unwrap()
                .value;
            let v = inverse_square_tail(nu, x);
            // the truncated quadrature misses at most 1/(pi |a| l^2)
            assert!((v - Complex64::new(re, im)).norm() < 1e-9, "{nu}");
        }
        assert!((inverse_square_tail(0.0, 4.0).re - 0.25).abs() < 1e-16);
    }

    #[test]
    fn numeric_matches_closed_forms() {
        for t in [0.0, 0.3, -0.6, 1.0, 1.4] {
            let v = numeric_ft(FtKind::Slope, t, 1e-8).unwrap();
            assert!((v.value - g_hat(t)).norm() < 1e-7, "g at {t}: {}", v.value);
            let v = numeric_ft(FtKind::Psi, t, 1e-8).unwrap();
            assert!((v.value - psi_hat(t)).norm() < 1e-6, "psi at {t}: {}", v.value);
        }
    }

    #[test]
    fn beurling_transform_at_origin_and_band() {
        let v = numeric_ft(FtKind::PsiBeurling, 0.0, 1e-8).unwrap();
        assert!((v.value - 1.0).norm() < 1e-6, "{}", v.value);
        let r = band_limit_check(FtKind::PsiBeurling, &[1.25, 2.0, -3.5, 5.0], 1e-8).unwrap();
        assert!(r < 1e-5, "{r}");
    }

    #[test]
    fn band_check_rejects_inner_frequencies() {
        assert!(band_limit_check(FtKind::Psi, &[0.5], 1e-8).is_err());
        assert!(band_limit_check(FtKind::Slope, &[2.0], 1e-8).is_err());
        assert!(numeric_ft(FtKind::Psi, 0.0, 1e-9).is_err());
    }
}
