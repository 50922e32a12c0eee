//! Quadrature: adaptive Gauss–Kronrod on finite intervals, Filon-type
//! oscillatory integration, full-line integrals of the kernels with analytic
//! tails, and a Poisson-summation harness.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::extremal::{self, tails, Kernel, Strategy};

/// Value of an integral together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub err_estimate: f64,
    pub evaluations: usize,
}

impl QuadResult {
    fn add(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            err_estimate: self.err_estimate + other.err_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    fn plus_term(self, value: f64, bound: f64) -> QuadResult {
        QuadResult {
            value: self.value + value,
            err_estimate: self.err_estimate + bound,
            evaluations: self.evaluations,
        }
    }
}

// Kronrod 15-point abscissae and weights; the Gauss 7-point rule uses the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 Kronrod nodes of `[a, b]` in increasing order.
pub(crate) fn kronrod_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [0.0; 15];
    for j in 0..7 {
        out[j] = c - h * XGK[j];
        out[14 - j] = c + h * XGK[j];
    }
    out[7] = c;
    out
}

/// Apply the Kronrod/Gauss pair to values at [`kronrod_nodes`]; returns (K15, G7, |f| integral).
pub(crate) fn kronrod_apply(a: f64, b: f64, fv: &[f64; 15]) -> (f64, f64, f64) {
    let h = 0.5 * (b - a);
    let mut k = WGK[7] * fv[7];
    let mut g = WG[3] * fv[7];
    let mut abs = WGK[7] * fv[7].abs();
    for j in 0..7 {
        let pair = fv[j] + fv[14 - j];
        k += WGK[j] * pair;
        abs += WGK[j] * (fv[j].abs() + fv[14 - j].abs());
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    (k * h, g * h, abs * h.abs())
}

/// QUADPACK-style error scaling of `|K15 - G7|`.
pub(crate) fn kronrod_error(k: f64, g: f64, fv: &[f64; 15], a: f64, b: f64, resabs: f64) -> f64 {
    let h = 0.5 * (b - a);
    let mean = k / (2.0 * h);
    let mut asc = WGK[7] * (fv[7] - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let resasc = asc * h.abs();
    let mut err = (k - g).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    err.max(floor)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn eval_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let xs = kronrod_nodes(a, b);
    let fv = xs.map(f);
    let (k, g, abs) = kronrod_apply(a, b, &fv);
    Panel {
        a,
        b,
        value: k,
        err: kronrod_error(k, g, &fv, a, b, abs),
    }
}

/// Globally adaptive Gauss–Kronrod integrator.
#[derive(Debug, Clone)]
pub struct Integrator {
    /// Hard cap on integrand evaluations.
    pub max_evaluations: usize,
    /// Width of the initial panels; the kernels oscillate with period one,
    /// so half-width panels hold at most one arch of `sin^2(pi u)`.
    pub panel_width: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator {
            max_evaluations: 10_000_000,
            panel_width: 0.5,
        }
    }
}

impl Integrator {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(domain(format!("integration interval [{a}, {b}] is not a finite a < b")));
        }
        if !(tol > 0.0) {
            return Err(domain(format!("tolerance must be positive, got {tol}")));
        }
        let n0 = ((b - a) / self.panel_width).ceil().max(1.0) as usize;
        if n0.saturating_mul(15) > self.max_evaluations {
            return Err(Error::BudgetExceeded {
                value: f64::NAN,
                err_estimate: f64::INFINITY,
                evaluations: 0,
            });
        }
        let width = (b - a) / n0 as f64;
        let mut heap = BinaryHeap::with_capacity(2 * n0);
        let mut evaluations = 0;
        let mut total_err = 0.0;
        for i in 0..n0 {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 { b } else { a + width * (i + 1) as f64 };
            let p = eval_panel(&f, lo, hi);
            evaluations += 15;
            total_err += p.err;
            heap.push(p);
        }
        let mut frozen: Vec<Panel> = Vec::new();
        let mut steps = 0usize;
        while total_err > tol {
            if evaluations + 30 > self.max_evaluations {
                let (value, err) = summarize(&heap, &frozen);
                return Err(Error::BudgetExceeded {
                    value,
                    err_estimate: err,
                    evaluations,
                });
            }
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if !(worst.a < mid && mid < worst.b) || (worst.b - worst.a) < 1e3 * f64::EPSILON * mid.abs().max(1.0) {
                frozen.push(worst);
                continue;
            }
            let left = eval_panel(&f, worst.a, mid);
            let right = eval_panel(&f, mid, worst.b);
            evaluations += 30;
            total_err += left.err + right.err - worst.err;
            heap.push(left);
            heap.push(right);
            steps += 1;
            if steps.is_multiple_of(1024) {
                total_err = summarize(&heap, &frozen).1;
            }
        }
        let (value, err_estimate) = summarize(&heap, &frozen);
        if err_estimate > tol && !frozen.is_empty() {
            return Err(Error::ToleranceNotMet {
                requested: tol,
                achieved: err_estimate,
            });
        }
        Ok(QuadResult {
            value,
            err_estimate,
            evaluations,
        })
    }
}

fn summarize(heap: &BinaryHeap<Panel>, frozen: &[Panel]) -> (f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().chain(frozen.iter()).collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let err = panels.iter().map(|p| p.err).sum();
    (value, err)
}

/// Adaptive integral of `f` over `[a, b]` with the default [`Integrator`].
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    Integrator::default().integrate(f, a, b, tol)
}

/// Complex-valued integral with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscResult {
    pub value: Complex64,
    pub err_estimate: f64,
    pub evaluations: usize,
}

/// Filon-type rule for `int_a^b f(x) exp(-2 pi i x t) dx`.
///
/// On each panel `f` is interpolated at Gauss–Legendre nodes by a Legendre
/// series; the series is integrated against the exponential exactly through
/// the moments `int_{-1}^{1} P_k(s) e^{-i w s} ds = 2 (-i)^k j_k(w)`.
#[derive(Debug, Clone)]
pub struct FilonRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `legendre[k][j] = (2k+1)/2 * w_j * P_k(s_j)`
    projection: Vec<Vec<f64>>,
}

impl FilonRule {
    pub fn new(order: usize) -> FilonRule {
        assert!(order >= 4, "Filon order must be at least 4");
        let (nodes, weights) = gauss_legendre(order);
        let mut projection = vec![vec![0.0; order]; order];
        for (j, &s) in nodes.iter().enumerate() {
            let p = legendre_values(order, s);
            for k in 0..order {
                projection[k][j] = (2 * k + 1) as f64 / 2.0 * weights[j] * p[k];
            }
        }
        FilonRule {
            nodes,
            weights,
            projection,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate over `[a, b]` split into panels no wider than `panel_width`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, t: f64, panel_width: f64) -> OscResult {
        assert!(a < b && panel_width > 0.0);
        let n = self.order();
        let panels = ((b - a) / panel_width).ceil().max(1.0) as usize;
        let width = (b - a) / panels as f64;
        let h = 0.5 * width;
        let omega = 2.0 * PI * t * h;
        let moments = legendre_moments(n, omega);
        let mut value = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        let mut fv = vec![0.0; n];
        let mut coeffs = vec![0.0; n];
        for p in 0..panels {
            let lo = a + width * p as f64;
            let c = lo + h;
            for (j, &s) in self.nodes.iter().enumerate() {
                fv[j] = f(c + h * s);
            }
            for k in 0..n {
                coeffs[k] = self.projection[k].iter().zip(&fv).map(|(w, v)| w * v).sum();
            }
            let mut panel = Complex64::new(0.0, 0.0);
            for k in 0..n {
                panel += moments[k] * coeffs[k];
            }
            let phase = Complex64::from_polar(1.0, -2.0 * PI * t * c);
            value += phase * panel * h;
            // |moment_k| <= 2
            err += 2.0 * h * (coeffs[n - 1].abs() + coeffs[n - 2].abs());
        }
        let _ = &self.weights;
        OscResult {
            value,
            err_estimate: err,
            evaluations: panels * n,
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n];
    p[0] = 1.0;
    if n > 1 {
        p[1] = x;
    }
    for k in 2..n {
        p[k] = ((2 * k - 1) as f64 * x * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
    }
    p
}

/// `int_{-1}^{1} P_k(s) exp(-i w s) ds` for `k < n`.
pub fn legendre_moments(n: usize, omega: f64) -> Vec<Complex64> {
    let j = spherical_bessel_j(n, omega.abs());
    // j_k(-w) = (-1)^k j_k(w); the moment is 2 (-i)^k j_k(w)
    let sign = if omega < 0.0 { -1.0 } else { 1.0 };
    let mut rot = Complex64::new(2.0, 0.0);
    let mut out = Vec::with_capacity(n);
    for (k, jk) in j.iter().enumerate() {
        let s = if k % 2 == 1 { sign } else { 1.0 };
        out.push(rot * (jk * s));
        rot *= Complex64::new(0.0, -1.0);
    }
    out
}

/// Spherical Bessel functions `j_0 .. j_{n-1}` at `w >= 0`.
pub fn spherical_bessel_j(n: usize, w: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if w == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if w < 0.5 {
        let mut lead = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                lead *= w / (2 * k + 1) as f64;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for m in 1..30 {
                term *= -w * w / (2.0 * m as f64 * (2 * k + 2 * m + 1) as f64);
                sum += term;
                if term.abs() < 1e-18 {
                    break;
                }
            }
            *slot = lead * sum;
        }
        return out;
    }
    if w >= n as f64 {
        // forward recurrence is stable while k < w
        out[0] = w.sin() / w;
        if n > 1 {
            out[1] = w.sin() / (w * w) - w.cos() / w;
        }
        for k in 2..n {
            out[k] = (2 * k - 1) as f64 / w * out[k - 1] - out[k - 2];
        }
        return out;
    }
    // Miller backward recurrence normalized by sum (2k+1) j_k^2 = 1
    let start = n + w.ceil() as usize + 40;
    let (mut jp1, mut jk) = (0.0f64, 1.0f64);
    let mut norm = 0.0f64;
    for k in (0..=start).rev() {
        if k < n {
            out[k] = jk;
        }
        norm += (2 * k + 1) as f64 * jk * jk;
        if k == 0 {
            break;
        }
        let jm1 = (2 * k + 1) as f64 / w * jk - jp1;
        jp1 = jk;
        jk = jm1;
        if jk.abs() > 1e100 {
            let s = 1e-100;
            jk *= s;
            jp1 *= s;
            norm *= s * s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    let mut scale = 1.0 / norm.sqrt();
    let j0 = w.sin() / w;
    let j1 = w.sin() / (w * w) - w.cos() / w;
    let reference_sign = if j0.abs() >= j1.abs() {
        j0.signum() * out[0].signum()
    } else {
        j1.signum() * out.get(1).copied().unwrap_or(j1).signum()
    };
    scale *= reference_sign;
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// Integrands handled by [`integrate_with_tails`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FullLine {
    /// `g = G'`
    Slope,
    /// `H(u) = -u g(u)`
    Moment,
    /// `psi = M - sgn`
    Deficit,
    /// `G - x_+^0`
    HeavisideDeficit,
}

/// Integer cutoff for the `sin^2`-type kernels given a tail budget.
fn cutoff_cubic(budget: f64) -> f64 {
    // tail error ~ |f'(T)| / (4 pi^4) with |f'| ~ 3/T^4 (slope) or 2/T^3 (moment)
    ((1.0 / (PI.powi(4) * budget)).cbrt().ceil() + 2.0).max(32.0)
}

fn cutoff_deficit(budget: f64) -> f64 {
    // per-side error ~ 1/(pi^4 T^2)
    ((2.0 / (PI.powi(4) * budget)).sqrt().ceil() + 2.0).max(32.0)
}

/// Full-line integral: adaptive quadrature on `[-T, T]` plus analytic tails.
///
/// The deficit integrands use the default [`Strategy::Quadrature`] evaluation of `G`.
pub fn integrate_with_tails(kind: FullLine, tol: f64) -> Result<QuadResult> {
    integrate_with_tails_using(kind, tol, Strategy::Quadrature)
}

/// As [`integrate_with_tails`], selecting how `G` is evaluated inside the deficit integrands.
pub fn integrate_with_tails_using(kind: FullLine, tol: f64, strategy: Strategy) -> Result<QuadResult> {
    if !(tol >= 1e-10) {
        return Err(domain(format!("full-line tolerance must be >= 1e-10, got {tol}")));
    }
    let result = match kind {
        FullLine::Slope => {
            let t = cutoff_cubic(tol / 4.0);
            let body = integrate_adaptive(|u| extremal::eval_kernel(Kernel::Slope, u), -t, t, tol / 2.0)?;
            let (lv, lb) = tails::slope_left(t);
            let (rv, rb) = tails::slope_right(t);
            body.plus_term(lv - rv, lb + rb)
        }
        FullLine::Moment => {
            let t = cutoff_cubic(tol / 4.0);
            let body = integrate_adaptive(
                |u| extremal::eval_kernel(Kernel::Moment, u),
                -1.0 - t,
                -1.0 + t,
                tol / 2.0,
            )?;
            let (v, b) = tails::sinc2(t);
            body.plus_term(2.0 * v, 2.0 * b)
        }
        FullLine::Deficit | FullLine::HeavisideDeficit => {
            let scale = if kind == FullLine::Deficit { 1.0 } else { 0.5 };
            let t = cutoff_deficit(tol / (4.0 * scale));
            let body = match strategy {
                Strategy::ClosedForm => {
                    let heaviside = |x: f64| if x >= 0.0 { 1.0 } else { 0.0 };
                    let f = |x: f64| scale * 2.0 * (extremal::heaviside_majorant_closed_form(x) - heaviside(x));
                    // split at the jump of x_+^0
                    integrate_adaptive(f, -t, 0.0, tol / 4.0)?.add(integrate_adaptive(f, 0.0, t, tol / 4.0)?)
                }
                Strategy::Quadrature => {
                    let mut r = extremal::cumulative_deficit_integral(t)?;
                    r.value *= scale;
                    r.err_estimate *= scale;
                    r
                }
            };
            let (lv, lb) = tails::deficit_left(t);
            let (rv, rb) = tails::deficit_right(t);
            body.plus_term(scale * (lv + rv), scale * (lb + rb))
        }
    };
    if result.err_estimate > tol {
        return Err(Error::ToleranceNotMet {
            requested: tol,
            achieved: result.err_estimate,
        });
    }
    Ok(result)
}

/// Result of comparing an integer-grid sum with the full-line integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonCheck {
    pub sum: f64,
    pub integral: QuadResult,
}

/// `sum_{|n| <= truncation} kernel(n)` next to `int kernel`.
///
/// Poisson summation equates the two for kernels of exponential type `2 pi`
/// whose transform vanishes at the nonzero integers.
pub fn poisson_check(kernel: Kernel, truncation: usize) -> Result<PoissonCheck> {
    if truncation < 10 {
        return Err(domain(format!("truncation must be >= 10, got {truncation}")));
    }
    let kind = match kernel {
        Kernel::Slope => FullLine::Slope,
        Kernel::Moment => FullLine::Moment,
        Kernel::Factor => return Err(domain("the Poisson check applies to g and H only")),
    };
    let n = truncation as i64;
    let sum = (-n..=n).map(|k| extremal::eval_kernel(kernel, k as f64)).sum();
    Ok(PoissonCheck {
        sum,
        integral: integrate_with_tails(kind, 1e-10)?,
    })
}
