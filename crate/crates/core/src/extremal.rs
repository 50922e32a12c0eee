//! Extremal majorants of `sgn(x)` and of the Heaviside function, Beurling's
//! majorant, and the kernels they are built from.
//!
//! Notation follows the usual one for this construction:
//!
//! * `h(u) = sinc(u) / (u + 1)`, the square-root factor,
//! * `H(u) = u^2 h(u)^2 = sinc^2(u + 1)`,
//! * `g(u) = -u h(u)^2 = -sin^2(pi u) / (pi^2 u (u + 1)^2)`,
//! * `G(x) = int_{-inf}^x g`, the monotone majorant of `x_+^0`,
//! * `M = 2G - 1`, the monotone majorant of `sgn(x)`,
//! * `B`, Beurling's majorant of `sgn(x)` (no monotonicity constraint).
//!
//! Conventions: `sgn(0) = 0` and `x_+^0 = 1` for `x >= 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_adaptive, kronrod_apply, kronrod_error, kronrod_nodes, QuadResult};
use crate::specfun::{cin, si, sinc, trigamma};

/// The three real entire kernels behind `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    /// `g = G'`; nonnegative on `(-inf, 0)`, nonpositive on `(0, inf)`.
    Slope,
    /// `H(u) = -u g(u) >= 0`.
    Moment,
    /// `h`, with `H(z) = z^2 h(z) h(z)` on the real line and `h(-1) = 1`.
    Factor,
}

/// Majorants (and the one minorant) of the step functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Majorant {
    /// `G`, majorant of `x_+^0`.
    Heaviside,
    /// `M = 2G - 1`, majorant of `sgn`.
    Sign,
    /// Beurling's `B`.
    Beurling,
    /// `-M(-x)`, a minorant of `sgn`.
    SignMinorant,
}

/// Deficit functions; both are nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Deficit {
    /// `psi(x) = M(x) - sgn(x)`
    Majorant,
    /// `phi(x) = sgn(x) + M(-x) = psi(-x)`
    Minorant,
}

/// How `G` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Strategy {
    /// Adaptive quadrature of `g` on `[-T, x]` plus analytic tails.
    #[default]
    Quadrature,
    /// Antiderivative through `Si` and `Cin`.
    ClosedForm,
}

pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Upper semicontinuous Heaviside function.
pub fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

pub fn eval_kernel(kind: Kernel, u: f64) -> f64 {
    match kind {
        Kernel::Factor => factor(u),
        Kernel::Moment => {
            let s = sinc(u + 1.0);
            s * s
        }
        Kernel::Slope => {
            let h = factor(u);
            -u * h * h
        }
    }
}

// sinc(u)/(u+1) == -sinc(u+1)/u; pick the form whose denominator is away from zero.
fn factor(u: f64) -> f64 {
    if (u + 1.0).abs() >= 0.5 {
        sinc(u) / (u + 1.0)
    } else {
        -sinc(u + 1.0) / u
    }
}

/// `G(x)` to absolute accuracy `tol`, using [`Strategy::Quadrature`].
pub fn eval_heaviside_majorant(x: f64, tol: f64) -> Result<f64> {
    eval_heaviside_majorant_with(x, tol, Strategy::Quadrature).map(|r| r.value)
}

/// `G(x)` with its error estimate.
pub fn eval_heaviside_majorant_with(x: f64, tol: f64, strategy: Strategy) -> Result<QuadResult> {
    check_point(x, tol)?;
    match strategy {
        Strategy::ClosedForm => Ok(QuadResult {
            value: heaviside_majorant_closed_form(x),
            err_estimate: 1e-14,
            evaluations: 1,
        }),
        Strategy::Quadrature => heaviside_majorant_quadrature(x, tol),
    }
}

fn check_point(x: f64, tol: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(domain(format!("x must be finite, got {x}")));
    }
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(domain(format!("tolerance must lie in [1e-12, 1e-4], got {tol}")));
    }
    Ok(())
}

/// Integer cutoff so that each kernel tail is certified below `budget`.
fn slope_cutoff(budget: f64) -> f64 {
    // |f'(T)| / (4 pi^4) with |f'(T)| <= 3.5 / T^4 for T >= 16
    ((3.5 / (4.0 * PI.powi(4) * budget)).powf(0.25).ceil() + 1.0).max(16.0)
}

fn heaviside_majorant_quadrature(x: f64, tol: f64) -> Result<QuadResult> {
    let cutoff = slope_cutoff(tol / 8.0);
    let slope = |u: f64| eval_kernel(Kernel::Slope, u);
    let result = if x <= -cutoff {
        let (v, b, evaluations) = left_mass_at(-x, tol / 4.0)?;
        QuadResult {
            value: v,
            err_estimate: b,
            evaluations,
        }
    } else {
        let (lv, lb) = tails::slope_left(cutoff);
        let upper = x.min(cutoff);
        let body = if upper > -cutoff {
            integrate_adaptive(slope, -cutoff, upper, tol / 2.0)?
        } else {
            QuadResult {
                value: 0.0,
                err_estimate: 0.0,
                evaluations: 0,
            }
        };
        let mut r = QuadResult {
            value: lv + body.value,
            err_estimate: lb + body.err_estimate,
            evaluations: body.evaluations,
        };
        if x > cutoff {
            // int_T^x g = -(mass beyond T - mass beyond x)
            let (rt, rtb) = tails::slope_right(cutoff);
            let (rx, rxb, evaluations) = right_mass_at(x, tol / 8.0)?;
            r.value -= rt - rx;
            r.err_estimate += rtb + rxb;
            r.evaluations += evaluations;
        }
        r
    };
    if result.err_estimate > tol {
        return Err(Error::ToleranceNotMet {
            requested: tol,
            achieved: result.err_estimate,
        });
    }
    Ok(result)
}

/// `int_{-inf}^{-s} g` for `s >= 2`: integer tail from `ceil(s)` plus the short piece.
fn left_mass_at(s: f64, tol: f64) -> Result<(f64, f64, usize)> {
    let t = s.ceil();
    let (v, b) = tails::slope_left(t);
    if t == s {
        return Ok((v, b, 0));
    }
    let piece = integrate_adaptive(|u| eval_kernel(Kernel::Slope, u), -t, -s, tol)?;
    Ok((v + piece.value, b + piece.err_estimate, piece.evaluations))
}

/// `int_s^inf |g|` for `s >= 1`.
fn right_mass_at(s: f64, tol: f64) -> Result<(f64, f64, usize)> {
    let t = s.ceil();
    let (v, b) = tails::slope_right(t);
    if t == s {
        return Ok((v, b, 0));
    }
    let piece = integrate_adaptive(|u| -eval_kernel(Kernel::Slope, u), s, t, tol)?;
    Ok((v + piece.value, b + piece.err_estimate, piece.evaluations))
}

/// Closed form of `G` through the partial fraction
/// `1/(u (u+1)^2) = 1/u - 1/(u+1) - 1/(u+1)^2`.
pub fn heaviside_majorant_closed_form(x: f64) -> f64 {
    let v = x + 1.0;
    let sv = sinc(v);
    let antiderivative =
        0.5 * cin(2.0 * PI * x) - 0.5 * cin(2.0 * PI * v) + PI * PI * v * sv * sv - PI * si(2.0 * PI * v);
    0.5 - antiderivative / (PI * PI)
}

/// `G` on an ascending grid with the largest error estimate over the grid.
///
/// Short steps add a single Gauss–Kronrod increment to a running sum; steps
/// longer than half a unit restart from a full evaluation, so error does not
/// pile up across wide gaps.
pub fn eval_heaviside_majorant_sorted(xs: &[f64], tol: f64) -> Result<(Vec<f64>, f64)> {
    if xs.is_empty() {
        return Ok((Vec::new(), 0.0));
    }
    if xs.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(domain("grid must be sorted ascending"));
    }
    check_point(xs[0], tol)?;
    let fresh = |x: f64| heaviside_majorant_quadrature(x, (tol / 2.0).max(1e-12));
    let slope = |u: f64| eval_kernel(Kernel::Slope, u);
    let first = fresh(xs[0])?;
    let mut sum = Neumaier::new(first.value);
    let mut err = first.err_estimate;
    let mut worst = err;
    let mut out = Vec::with_capacity(xs.len());
    out.push(first.value);
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a > 0.5 {
            let r = fresh(b)?;
            sum = Neumaier::new(r.value);
            err = r.err_estimate;
        } else if b > a {
            let step = gk15(&slope, a, b);
            sum.add(step.value);
            err += step.err_estimate;
        }
        worst = worst.max(err);
        out.push(sum.total());
    }
    if worst > tol {
        return Err(Error::ToleranceNotMet {
            requested: tol,
            achieved: worst,
        });
    }
    Ok((out, worst))
}

pub fn eval_majorant(kind: Majorant, x: f64, tol: f64) -> Result<f64> {
    eval_majorant_with(kind, x, tol, Strategy::Quadrature)
}

pub fn eval_majorant_with(kind: Majorant, x: f64, tol: f64, strategy: Strategy) -> Result<f64> {
    match kind {
        Majorant::Heaviside => Ok(eval_heaviside_majorant_with(x, tol, strategy)?.value),
        // M = 2G - 1 doubles the error of G
        Majorant::Sign => Ok(2.0 * eval_heaviside_majorant_with(x, tol / 2.0, strategy)?.value - 1.0),
        Majorant::SignMinorant => Ok(-eval_majorant_with(Majorant::Sign, -x, tol, strategy)?),
        Majorant::Beurling => {
            check_point(x, tol)?;
            Ok(beurling(x))
        }
    }
}

pub fn eval_deficit(which: Deficit, x: f64, tol: f64) -> Result<f64> {
    eval_deficit_with(which, x, tol, Strategy::Quadrature)
}

pub fn eval_deficit_with(which: Deficit, x: f64, tol: f64, strategy: Strategy) -> Result<f64> {
    let x = match which {
        Deficit::Majorant => x,
        Deficit::Minorant => -x,
    };
    Ok(eval_majorant_with(Majorant::Sign, x, tol, strategy)? - sgn(x))
}

/// `psi(x) = M(x) - sgn(x)` through the closed form of `G`.
pub fn deficit_closed_form(x: f64) -> f64 {
    2.0 * (heaviside_majorant_closed_form(x) - heaviside(x)) + if x == 0.0 { 1.0 } else { 0.0 }
}

/// Beurling's majorant of `sgn(x)`.
///
/// Both one-sided series reduce to `trigamma(1 + |x|)` by reflection, which
/// leaves a form with no poles:
/// `B(x) = 1 + 2x sinc^2(x) R(x)` for `x > 0` and
/// `B(x) = -1 + 2 sinc^2(x) (1 - |x| R(|x|))` for `x < 0`,
/// where `R(y) = 1 - y trigamma(1 + y)`.
pub fn beurling(x: f64) -> f64 {
    beurling_deficit(x) + sgn(x)
}

/// `B(x) - sgn(x) >= 0`.
pub fn beurling_deficit(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let y = x.abs();
    let s = sinc(y);
    let s2 = s * s;
    let r = beurling_remainder(y);
    if x > 0.0 {
        2.0 * y * s2 * r
    } else {
        2.0 * s2 * (1.0 - y * r)
    }
}

/// `R(y) = 1 - y trigamma(1 + y)` for `y > 0`; asymptotic series past 20.
pub(crate) fn beurling_remainder(y: f64) -> f64 {
    if y >= 20.0 {
        let inv = 1.0 / y;
        let inv2 = inv * inv;
        inv * 0.5
            - inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0)))))
    } else {
        1.0 - y * trigamma(1.0 + y).expect("1 + y > 0")
    }
}

/// `int_{-T}^{T} psi` on a composite Kronrod grid, with `G` accumulated
/// node to node from its left tail. `T` must be an integer.
pub(crate) fn cumulative_deficit_integral(cutoff: f64) -> Result<QuadResult> {
    let panels = (4.0 * cutoff).round() as usize;
    let width = 0.5;
    let slope = |u: f64| eval_kernel(Kernel::Slope, u);
    let (g0, b0) = tails::slope_left(cutoff);
    let mut g = Neumaier::new(g0);
    let mut offset_err = b0;
    let mut prev = -cutoff;
    let mut total = Neumaier::new(0.0);
    let mut panel_err = 0.0;
    let mut evaluations = 0usize;
    for p in 0..panels {
        let a = -cutoff + width * p as f64;
        let b = a + width;
        let xs = kronrod_nodes(a, b);
        let mut fv = [0.0; 15];
        for (j, &x) in xs.iter().enumerate() {
            let step = gk15(&slope, prev, x);
            g.add(step.value);
            offset_err += step.err_estimate;
            evaluations += 15;
            prev = x;
            fv[j] = 2.0 * (g.total() - heaviside(x));
        }
        let step = gk15(&slope, prev, b);
        g.add(step.value);
        offset_err += step.err_estimate;
        evaluations += 15;
        prev = b;
        let (k, gauss, abs) = kronrod_apply(a, b, &fv);
        total.add(k);
        panel_err += kronrod_error(k, gauss, &fv, a, b, abs);
    }
    Ok(QuadResult {
        value: total.total(),
        // an error in G shifts the integrand over the remaining length
        err_estimate: panel_err + 2.0 * cutoff * 2.0 * offset_err,
        evaluations,
    })
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> QuadResult {
    if !(b > a) {
        return QuadResult {
            value: 0.0,
            err_estimate: 0.0,
            evaluations: 0,
        };
    }
    let xs = kronrod_nodes(a, b);
    let fv = xs.map(f);
    let (k, g, abs) = kronrod_apply(a, b, &fv);
    QuadResult {
        value: k,
        err_estimate: kronrod_error(k, g, &fv, a, b, abs),
        evaluations: 15,
    }
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn new(start: f64) -> Self {
        Neumaier { sum: start, comp: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Analytic tails of the `sin^2(pi u) f(u) / pi^2` integrands.
///
/// With `sin^2 = (1 - cos 2 pi u) / 2`, the mean part integrates in closed
/// form. For `f > 0` decreasing and convex, two integrations by parts bound
/// the oscillating part by `|f'(T)| / (2 pi^2)` when `T` is an integer, and by
/// roughly `f(T) / pi` otherwise, so only integer cutoffs are used. Each function returns `(value, bound)`.
pub(crate) mod tails {
    use std::f64::consts::PI;

    fn pi2() -> f64 {
        PI * PI
    }

    /// `int_{-inf}^{-T} g`, `T >= 2` an integer. Here `f(w) = 1/(w (w-1)^2)`.
    pub fn slope_left(t: f64) -> (f64, f64) {
        let mean = 1.0 / (t - 1.0) + (-1.0 / t).ln_1p();
        let fprime = (3.0 * t - 1.0) / (t * t * (t - 1.0).powi(3));
        (mean / (2.0 * pi2()), fprime / (4.0 * pi2() * pi2()))
    }

    /// `int_T^inf |g|`, `T >= 1` an integer. Here `f(u) = 1/(u (u+1)^2)`.
    pub fn slope_right(t: f64) -> (f64, f64) {
        let mean = (1.0 / t).ln_1p() - 1.0 / (t + 1.0);
        let fprime = (3.0 * t + 1.0) / (t * t * (t + 1.0).powi(3));
        (mean / (2.0 * pi2()), fprime / (4.0 * pi2() * pi2()))
    }

    /// `int_T^inf sinc^2`, `T >= 1` an integer. Here `f(v) = 1/v^2`.
    pub fn sinc2(t: f64) -> (f64, f64) {
        let mean = 1.0 / t;
        let fprime = 2.0 / (t * t * t);
        (mean / (2.0 * pi2()), fprime / (4.0 * pi2() * pi2()))
    }

    /// `int_{-inf}^{-T} psi = (2/pi^2) int_T^inf sin^2(pi w) (w - T)/(w (w-1)^2) dw`.
    ///
    /// `f(T) = 0`, so the oscillating part is bounded by
    /// `(|f'(T)| + int |f''|) / (4 pi^2)` for any `T`; `|f''| <= 12 T / (w-1)^4`.
    pub fn deficit_left(t: f64) -> (f64, f64) {
        let mean = -t * (-1.0 / t).ln_1p() - 1.0;
        let fprime = 1.0 / (t * (t - 1.0) * (t - 1.0));
        let tv = 4.0 * t / (t - 1.0).powi(3);
        (mean / pi2(), (fprime + tv) / (4.0 * pi2() * pi2()))
    }

    /// `int_T^inf psi = (2/pi^2) int_T^inf sin^2(pi u) (u - T)/(u (u+1)^2) du`;
    /// `|f''| <= (12 T + 6) / u^4`.
    pub fn deficit_right(t: f64) -> (f64, f64) {
        let mean = 1.0 - t * (1.0 / t).ln_1p();
        let fprime = 1.0 / (t * (t + 1.0) * (t + 1.0));
        let tv = (4.0 * t + 2.0) / (t * t * t);
        (mean / pi2(), (fprime + tv) / (4.0 * pi2() * pi2()))
    }
}
