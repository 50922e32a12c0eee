//! Scalar special functions shared by the rest of the crate.
//!
//! Everything here is pure and deterministic. Arguments are plain `f64`;
//! functions with a restricted domain return [`Result`].

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{domain, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `sin(pi * x)` with exact argument reduction, so integers give exactly zero.
pub fn sin_pi(x: f64) -> f64 {
    // r in [-1, 1], sin(pi x) = sin(pi r)
    let r = x - 2.0 * (x / 2.0).round();
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// Normalized sinc, `sin(pi x) / (pi x)`, equal to 1 at the origin.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let y = PI * x;
        let y2 = y * y;
        1.0 - y2 / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0))
    } else {
        sin_pi(x) / (PI * x)
    }
}

/// Triangle function `max(1 - |t|, 0)`, the Fourier transform of `sinc^2`.
pub fn triangle(t: f64) -> f64 {
    (1.0 - t.abs()).max(0.0)
}

/// Trigamma function `sum_{k >= 0} 1 / (x + k)^2` for `x > 0`.
///
/// Upward recurrence to `x >= 10`, then the Bernoulli asymptotic series
/// through `x^-15`.
pub fn trigamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("trigamma requires finite x > 0, got {x}")));
    }
    let shift = if x < 10.0 { (10.0 - x).ceil() as usize } else { 0 };
    let mut acc = trigamma_asymptotic(x + shift as f64);
    // smallest terms first
    for k in (0..shift).rev() {
        let y = x + k as f64;
        acc += 1.0 / (y * y);
    }
    Ok(acc)
}

fn trigamma_asymptotic(y: f64) -> f64 {
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // B_2k / y^(2k+1) terms
    let series = inv2
        * (1.0 / 6.0
            - inv2
                * (1.0 / 30.0
                    - inv2
                        * (1.0 / 42.0
                            - inv2
                                * (1.0 / 30.0 - inv2 * (5.0 / 66.0 - inv2 * (691.0 / 2730.0 - inv2 * (7.0 / 6.0)))))));
    inv + 0.5 * inv2 + inv * series
}

/// Sine and cosine integrals `(Si(x), Ci(x))` for `x > 0`.
///
/// Power series below 2, complex continued fraction (modified Lentz) above.
pub fn sici(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("sici requires finite x > 0, got {x}")));
    }
    const MAXIT: usize = 200;
    let eps = f64::EPSILON;
    if x > 2.0 {
        let mut b = (1.0, x);
        let mut c = (1.0 / f64::MIN_POSITIVE.sqrt(), 0.0);
        let mut d = cinv(b);
        let mut h = d;
        for i in 2..MAXIT {
            let a = -(((i - 1) * (i - 1)) as f64);
            b.0 += 2.0;
            d = cinv(cadd(cscale(d, a), b));
            c = cadd(b, cscale(cinv(c), a));
            let del = cmul(c, d);
            h = cmul(h, del);
            if (del.0 - 1.0).abs() + del.1.abs() < eps {
                break;
            }
        }
        let h = cmul(h, (x.cos(), -x.sin()));
        Ok((FRAC_PI_2 + h.1, -h.0))
    } else {
        let (mut sums, mut sumc) = (0.0, 0.0);
        let mut sum = 0.0;
        let mut sign = 1.0;
        let mut fact = 1.0;
        let mut odd = true;
        for k in 1..MAXIT {
            fact *= x / k as f64;
            let term = fact / k as f64;
            sum += sign * term;
            let err = term / sum.abs();
            if odd {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if err < eps {
                break;
            }
            odd = !odd;
        }
        Ok((sums, sumc + x.ln() + EULER_GAMMA))
    }
}

/// Sine integral `Si(x) = int_0^x sin(t)/t dt`, odd in `x`.
pub fn si(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let (s, _) = sici(x.abs()).expect("finite nonzero argument");
    s.copysign(x)
}

/// Entire cosine integral `Cin(x) = int_0^x (1 - cos t)/t dt`, even in `x`.
pub fn cin(x: f64) -> f64 {
    let t = x.abs();
    if t <= 2.0 {
        // sum_{k>=1} (-1)^(k+1) t^(2k) / (2k (2k)!)
        let t2 = t * t;
        let mut pow = 1.0;
        let mut sum = 0.0;
        for k in 1..40 {
            let kk = 2 * k;
            pow *= t2 / ((kk - 1) * kk) as f64;
            let term = pow / kk as f64;
            if k % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
            if term < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let (_, ci) = sici(t).expect("t > 2");
        EULER_GAMMA + t.ln() - ci
    }
}

type C = (f64, f64);

fn cadd(a: C, b: C) -> C {
    (a.0 + b.0, a.1 + b.1)
}

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cscale(a: C, s: f64) -> C {
    (a.0 * s, a.1 * s)
}

fn cinv(a: C) -> C {
    let n = a.0 * a.0 + a.1 * a.1;
    (a.0 / n, -a.1 / n)
}
