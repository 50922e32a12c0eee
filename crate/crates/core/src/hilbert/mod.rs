//! The weighted Hilbert inequality
//! `|sum_{m != n} a_m conj(a_n) / (lambda_m - lambda_n)| <= C sum |a_n|^2 / delta_n`,
//! where `delta_n` is the distance from `lambda_n` to its nearest neighbour.
//!
//! [`bilinear_form`] evaluates the left side, [`sharp_constant`] finds the best
//! `C` for a fixed node set, and the telescoping sums give the frequency-side
//! expansion that proves the inequality with `C = 2 pi`.

mod experiments;
mod spectral;

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fourier::{numeric_ft, psi_hat_scaled, FtKind};

pub use experiments::{
    constant_search, remark_experiment, ConstantReport, ConstantTrial, RemarkReport, RemarkSummary, RemarkTrial,
    SearchSummary,
};
pub use spectral::{sharp_constant, SpectralEstimate, MAX_ITERATIONS};

/// Best known constant, `sqrt(1 + (2/3) sqrt(6/5)) pi = 4.1324...`.
pub fn preissmann_constant() -> f64 {
    (1.0 + 2.0 / 3.0 * 1.2f64.sqrt()).sqrt() * PI
}

/// Constant reported by Selberg without a published proof. Kept for reference only.
pub const SELBERG_REPORTED: f64 = 3.2;

/// Distinct real nodes with their nearest-neighbour separations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSystem {
    lambdas: Vec<f64>,
    deltas: Vec<f64>,
    order: Vec<usize>,
}

impl NodeSystem {
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `delta_n = min_{m != n} |lambda_n - lambda_m|`, in input order.
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    /// Indices ordered so that the separations are non-increasing.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `sum |a_n|^2 / delta_n`.
    pub fn weighted_norm(&self, a: &CoefficientVector) -> Result<f64> {
        self.check(a)?;
        Ok(a.0.iter().zip(&self.deltas).map(|(x, d)| x.norm_sqr() / d).sum())
    }

    fn check(&self, a: &CoefficientVector) -> Result<()> {
        if a.len() != self.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                actual: a.len(),
            });
        }
        Ok(())
    }
}

/// Complex coefficients `a_1, ..., a_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector(pub Vec<Complex64>);

impl CoefficientVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

impl From<Vec<Complex64>> for CoefficientVector {
    fn from(v: Vec<Complex64>) -> Self {
        CoefficientVector(v)
    }
}

/// Builds a [`NodeSystem`], rejecting gaps below `1e-9` times the node range.
pub fn compute_deltas(lambdas: &[f64]) -> Result<NodeSystem> {
    let n = lambdas.len();
    if n < 2 {
        return Err(domain(format!("need at least 2 nodes, got {n}")));
    }
    if let Some(x) = lambdas.iter().find(|x| !x.is_finite()) {
        return Err(domain(format!("nodes must be finite, got {x}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| lambdas[i].total_cmp(&lambdas[j]));
    let range = lambdas[idx[n - 1]] - lambdas[idx[0]];
    let threshold = 1e-9 * range;
    let mut deltas = vec![f64::INFINITY; n];
    for w in idx.windows(2) {
        let gap = lambdas[w[1]] - lambdas[w[0]];
        if !(gap > threshold) {
            return Err(Error::DuplicateNode {
                first: w[0].min(w[1]),
                second: w[0].max(w[1]),
                gap,
            });
        }
        deltas[w[0]] = deltas[w[0]].min(gap);
        deltas[w[1]] = deltas[w[1]].min(gap);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| deltas[j].total_cmp(&deltas[i]).then(i.cmp(&j)));
    Ok(NodeSystem {
        lambdas: lambdas.to_vec(),
        deltas,
        order,
    })
}

/// `Phi(a) = sum_{m != n} a_m conj(a_n) / (lambda_m - lambda_n)`.
///
/// Pairing `(m, n)` with `(n, m)` gives `2 i Im(a_m conj(a_n)) / (lambda_m - lambda_n)`,
/// so the result is purely imaginary.
pub fn bilinear_form(nodes: &NodeSystem, a: &CoefficientVector) -> Result<Complex64> {
    nodes.check(a)?;
    let (l, a) = (&nodes.lambdas, &a.0);
    let mut im = 0.0;
    for m in 0..l.len() {
        for n in m + 1..l.len() {
            im += 2.0 * (a[m] * a[n].conj()).im / (l[m] - l[n]);
        }
    }
    Ok(Complex64::new(0.0, im))
}

/// `C sum |a_n|^2 / delta_n - |Phi(a)|`; nonnegative when the inequality holds.
pub fn verify_inequality(nodes: &NodeSystem, a: &CoefficientVector, c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain(format!("constant must be positive, got {c}")));
    }
    let norm = nodes.weighted_norm(a)?;
    Ok(c * norm - bilinear_form(nodes, a)?.norm())
}

/// Deficit used in the telescoping sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Telescoping {
    /// `psi = M - sgn`, closed-form transform.
    Sign,
    /// `phi(x) = psi(-x)`, the minorant side.
    SignReflected,
    /// `B - sgn`, numerical transform.
    Beurling,
}

/// Value of a telescoping sum with the imaginary part left over by roundoff
/// or quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TelescopingValue {
    pub value: f64,
    pub imaginary: f64,
    /// Accumulated quadrature error estimate (zero for closed forms).
    pub err_estimate: f64,
}

/// `sum_j sum_{m, n >= j} a_m conj(a_n) [f_{delta_j} - f_{delta_{j-1}}](lambda_m - lambda_n)`
/// over nodes in non-increasing-separation order, `f_{delta_0} = 0` and
/// `f_delta(t) = f^(t / delta) / delta`.
///
/// `tol` is passed to the numerical transform in the Beurling case.
pub fn telescoping_sum(
    nodes: &NodeSystem,
    a: &CoefficientVector,
    kind: Telescoping,
    tol: f64,
) -> Result<TelescopingValue> {
    nodes.check(a)?;
    let ord = &nodes.order;
    let l: Vec<f64> = ord.iter().map(|&i| nodes.lambdas[i]).collect();
    let d: Vec<f64> = ord.iter().map(|&i| nodes.deltas[i]).collect();
    let c: Vec<Complex64> = ord.iter().map(|&i| a.0[i]).collect();
    let mut transform = Transform::new(kind, tol);
    let n = l.len();
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let prev = j.checked_sub(1).map(|p| d[p]);
        let mut inner = Complex64::new(0.0, 0.0);
        // full double sum, so the imaginary part measures the Hermitian symmetry
        for m in j..n {
            for k in j..n {
                inner += c[m] * c[k].conj() * transform.step(d[j], prev, l[m] - l[k])?;
            }
        }
        total += inner;
    }
    Ok(TelescopingValue {
        value: total.re,
        imaginary: total.im,
        err_estimate: transform.err,
    })
}

struct Transform {
    kind: Telescoping,
    tol: f64,
    cache: HashMap<i64, (Complex64, f64)>,
    err: f64,
}

impl Transform {
    fn new(kind: Telescoping, tol: f64) -> Self {
        Transform {
            kind,
            tol,
            cache: HashMap::new(),
            err: 0.0,
        }
    }

    /// `f_delta(t) - f_prev(t)`, with the previous term absent for the first step.
    fn step(&mut self, delta: f64, prev: Option<f64>, t: f64) -> Result<Complex64> {
        let cur = self.scaled(delta, t)?;
        match prev {
            Some(p) => Ok(cur - self.scaled(p, t)?),
            None => Ok(cur),
        }
    }

    fn scaled(&mut self, delta: f64, t: f64) -> Result<Complex64> {
        match self.kind {
            Telescoping::Sign => psi_hat_scaled(delta, t),
            Telescoping::SignReflected => psi_hat_scaled(delta, -t),
            Telescoping::Beurling => {
                let s = t / delta;
                let key = (s * 1e12).round() as i64;
                let (v, e) = match self.cache.get(&key) {
                    Some(&hit) => hit,
                    None => {
                        let r = numeric_ft(FtKind::PsiBeurling, s, self.tol)?;
                        self.cache.insert(key, (r.value, r.err_estimate));
                        (r.value, r.err_estimate)
                    }
                };
                self.err += e / delta;
                Ok(v / delta)
            }
        }
    }
}

/// Closed form of the `psi` telescoping sum: `-Phi(a) / (pi i) + 2 sum |a_n|^2 / delta_n`.
pub fn telescoping_identity(nodes: &NodeSystem, a: &CoefficientVector) -> Result<f64> {
    let phi = bilinear_form(nodes, a)?;
    Ok(-phi.im / PI + 2.0 * nodes.weighted_norm(a)?)
}

/// Closed form of the `phi` telescoping sum: `Phi(a) / (pi i) + 2 sum |a_n|^2 / delta_n`.
pub fn telescoping_identity_reflected(nodes: &NodeSystem, a: &CoefficientVector) -> Result<f64> {
    let phi = bilinear_form(nodes, a)?;
    Ok(phi.im / PI + 2.0 * nodes.weighted_norm(a)?)
}
