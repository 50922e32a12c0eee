//! Sharp per-configuration constant.
//!
//! With `b_n = a_n / sqrt(delta_n)` the form becomes `Phi = b* A b`, where
//! `A_{nm} = sqrt(delta_n delta_m) / (lambda_m - lambda_n)` is real
//! antisymmetric. The best constant is the spectral radius `mu` of the
//! Hermitian matrix `iA`, whose eigenvalues come in `+-mu` pairs. Power
//! iteration therefore runs on `A^T A = -A^2` (real, symmetric, PSD).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{bilinear_form, CoefficientVector, NodeSystem};
use crate::error::{domain, Error, Result};

pub const MAX_ITERATIONS: usize = 100_000;

/// Store `A` densely below this size, apply it row by row above.
const DENSE_LIMIT: usize = 512;
const PARALLEL_ROWS: usize = 128;
const START_SEED: u64 = 0x5eed_1234;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    /// Best constant for this node set.
    pub constant: f64,
    pub iterations: usize,
    /// Bound on `constant - |Phi(witness)| / norm(witness)` together with the
    /// extrapolated distance of `constant` from its limit.
    pub residual: f64,
    /// Coefficients attaining the constant up to `residual`.
    pub witness: CoefficientVector,
}

enum Operator<'a> {
    Dense { n: usize, a: Vec<f64> },
    Free { lambdas: &'a [f64], roots: Vec<f64> },
}

impl Operator<'_> {
    fn new(nodes: &NodeSystem) -> Operator<'_> {
        let roots: Vec<f64> = nodes.deltas().iter().map(|d| d.sqrt()).collect();
        let l = nodes.lambdas();
        let n = l.len();
        if n < DENSE_LIMIT {
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        a[i * n + j] = roots[i] * roots[j] / (l[j] - l[i]);
                    }
                }
            }
            Operator::Dense { n, a }
        } else {
            Operator::Free { lambdas: l, roots }
        }
    }

    fn row(&self, i: usize, x: &[f64]) -> f64 {
        match self {
            Operator::Dense { n, a } => a[i * n..(i + 1) * n].iter().zip(x).map(|(p, q)| p * q).sum(),
            Operator::Free { lambdas, roots } => {
                let li = lambdas[i];
                let mut s = 0.0;
                for (j, (&lj, &rj)) in lambdas.iter().zip(roots).enumerate() {
                    if j != i {
                        s += rj * x[j] / (lj - li);
                    }
                }
                roots[i] * s
            }
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        if out.len() >= PARALLEL_ROWS {
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = self.row(i, x));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.row(i, x);
            }
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Spectral radius of `i A` by power iteration on `A^T A`.
///
/// Stops once the change in the estimate is below `tol` and the geometric
/// (Aitken) extrapolation of the remaining changes is below `tol` as well.
pub fn sharp_constant(nodes: &NodeSystem, tol: f64) -> Result<SpectralEstimate> {
    if !(tol >= 1e-12) || !tol.is_finite() {
        return Err(domain(format!("tolerance must be at least 1e-12, got {tol}")));
    }
    let n = nodes.len();
    let op = Operator::new(nodes);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s = norm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut mu_prev = f64::NAN;
    let mut change_prev = f64::NAN;
    for it in 1..=MAX_ITERATIONS {
        op.apply(&x, &mut y);
        op.apply(&y, &mut z);
        // x is a unit vector, so |A x|^2 is the Rayleigh quotient of A^T A
        let mu = norm(&y);
        let zn = norm(&z);
        if zn == 0.0 {
            return Err(domain("iteration collapsed to the zero vector"));
        }
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = -zi / zn;
        }
        let change = (mu - mu_prev).abs();
        let remaining = if change <= 8.0 * f64::EPSILON * mu {
            // converged to roundoff; the changes no longer contract
            change
        } else {
            let q = change / change_prev;
            if q < 1.0 {
                change * q / (1.0 - q)
            } else {
                f64::INFINITY
            }
        };
        if change < tol && remaining < tol {
            return Ok(finish(nodes, &op, &x, it, remaining));
        }
        mu_prev = mu;
        change_prev = change;
    }
    Err(Error::MaxIterations {
        iterations: MAX_ITERATIONS,
        estimate: mu_prev,
    })
}

fn finish(nodes: &NodeSystem, op: &Operator, u: &[f64], iterations: usize, remaining: f64) -> SpectralEstimate {
    let n = u.len();
    let mut au = vec![0.0; n];
    op.apply(u, &mut au);
    let mu = norm(&au);
    // A u = mu v and A v = -mu u, so z = u + i v satisfies (iA) z = mu z
    let witness: Vec<Complex64> = u
        .iter()
        .zip(&au)
        .zip(nodes.deltas())
        .map(|((&ui, &vi), d)| Complex64::new(ui, vi / mu) * d.sqrt())
        .collect();
    let witness = CoefficientVector(witness);
    let attained = bilinear_form(nodes, &witness).map(|p| p.norm()).unwrap_or(0.0)
        / nodes.weighted_norm(&witness).unwrap_or(f64::INFINITY);
    SpectralEstimate {
        constant: mu,
        iterations,
        residual: remaining.max(mu - attained).max(0.0),
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::compute_deltas;

    /// Largest singular value of the antisymmetric matrix by cyclic Jacobi
    /// rotations on `A^T A`, built independently of the solver.
    fn jacobi_radius(l: &[f64]) -> f64 {
        let n = l.len();
        let delta: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (l[i] - l[j]).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let a = |i: usize, j: usize| {
            if i == j {
                0.0
            } else {
                (delta[i] * delta[j]).sqrt() / (l[j] - l[i])
            }
        };
        let mut s = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                s[i][j] = (0..n).map(|k| a(k, i) * a(k, j)).sum();
            }
        }
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| s[i][j] * s[i][j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if s[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * c;
                    for k in 0..n {
                        let (skp, skq) = (s[k][p], s[k][q]);
                        s[k][p] = c * skp - sn * skq;
                        s[k][q] = sn * skp + c * skq;
                    }
                    for k in 0..n {
                        let (spk, sqk) = (s[p][k], s[q][k]);
                        s[p][k] = c * spk - sn * sqk;
                        s[q][k] = sn * spk + c * sqk;
                    }
                }
            }
        }
        (0..n).map(|i| s[i][i]).fold(0.0, f64::max).sqrt()
    }

    fn constant(l: &[f64]) -> SpectralEstimate {
        sharp_constant(&compute_deltas(l).unwrap(), 1e-12).unwrap()
    }

    #[test]
    fn two_nodes() {
        for (x, d) in [(0.0, 1.0), (-3.0, 0.25), (100.0, 7.0)] {
            let e = constant(&[x, x + d]);
            assert!((e.constant - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn three_equally_spaced() {
        let e = constant(&[1.0, 2.0, 3.0]);
        assert!((e.constant - 1.5).abs() < 1e-10, "{}", e.constant);
    }

    #[test]
    fn jacobi_oracle_small_configurations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=12 {
            let l: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..20.0)).collect();
            let e = constant(&l);
            let oracle = jacobi_radius(&l);
            assert!(
                (e.constant - oracle).abs() < 1e-9,
                "n = {n}: {} vs {oracle}",
                e.constant
            );
        }
        let l: Vec<f64> = (1..=12).map(f64::from).collect();
        assert!((constant(&l).constant - jacobi_radius(&l)).abs() < 1e-9);
    }

    #[test]
    fn witness_attains_the_constant() {
        let l = [0.0, 0.3, 1.7, 2.0, 4.5, 4.6, 9.0];
        let nodes = compute_deltas(&l).unwrap();
        let e = sharp_constant(&nodes, 1e-12).unwrap();
        let ratio = bilinear_form(&nodes, &e.witness).unwrap().norm() / nodes.weighted_norm(&e.witness).unwrap();
        assert!(ratio >= e.constant - e.residual - 1e-12);
        assert!((ratio - e.constant).abs() < 1e-8);
    }

    #[test]
    fn scale_and_shift_invariance() {
        let l = [0.0, 0.3, 1.7, 2.0, 4.5, 4.6, 9.0];
        let base = constant(&l).constant;
        for (c, d) in [(3.0, 1.0), (-0.5, 7.0), (1e3, -2e3)] {
            let m: Vec<f64> = l.iter().map(|x| c * x + d).collect();
            assert!((constant(&m).constant - base).abs() < 1e-9);
        }
    }

    #[test]
    fn matrix_free_matches_dense() {
        let l: Vec<f64> = (0..600)
            .map(|i| i as f64 + 0.3 * ((i * 7919) % 13) as f64 / 13.0)
            .collect();
        let nodes = compute_deltas(&l).unwrap();
        let free = Operator::new(&nodes);
        assert!(matches!(free, Operator::Free { .. }));
        let x: Vec<f64> = (0..600).map(|i| ((i * 31) % 17) as f64 - 8.0).collect();
        let mut y = vec![0.0; 600];
        free.apply(&x, &mut y);
        let roots: Vec<f64> = nodes.deltas().iter().map(|d| d.sqrt()).collect();
        for i in [0, 17, 599] {
            let direct: f64 = (0..600)
                .filter(|&j| j != i)
                .map(|j| roots[i] * roots[j] / (l[j] - l[i]) * x[j])
                .sum();
            assert!((y[i] - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn tolerance_floor() {
        let nodes = compute_deltas(&[0.0, 1.0]).unwrap();
        assert!(sharp_constant(&nodes, 1e-13).is_err());
    }
}
