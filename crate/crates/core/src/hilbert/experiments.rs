//! Seeded randomized experiments. Trials run in parallel, each with its own
//! ChaCha stream, and reports are assembled in trial order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::{
    compute_deltas, preissmann_constant, sharp_constant, telescoping_identity, telescoping_sum, CoefficientVector,
    NodeSystem, Telescoping,
};
use crate::error::{domain, Result};

/// Nodes for the remark experiment are drawn from `[0, NODE_SPAN]`.
const NODE_SPAN: f64 = 10.0;
/// Draws with a smaller nearest-neighbour gap are rejected.
const MIN_GAP: f64 = 0.01;

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn uniform_nodes(rng: &mut ChaCha8Rng, n: usize) -> NodeSystem {
    loop {
        let l: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=NODE_SPAN)).collect();
        if let Ok(nodes) = compute_deltas(&l) {
            if nodes.deltas().iter().all(|&d| d >= MIN_GAP) {
                return nodes;
            }
        }
    }
}

fn gaussian_coefficients(rng: &mut ChaCha8Rng, n: usize) -> CoefficientVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * s, im * s)
        })
        .collect::<Vec<_>>()
        .into()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemarkTrial {
    pub trial: usize,
    pub lambdas: Vec<f64>,
    pub coefficients: CoefficientVector,
    /// Telescoping sum built from Beurling's majorant.
    pub value: f64,
    pub imaginary: f64,
    pub err_estimate: f64,
    /// The same sum for the monotone majorant, from its closed form.
    pub monotone_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemarkSummary {
    pub min_value: f64,
    pub argmin_trial: usize,
    pub max_value: f64,
    pub mean_value: f64,
    pub negative_count: usize,
    pub max_imaginary: f64,
    pub max_err_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemarkReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub records: Vec<RemarkTrial>,
    pub summary: RemarkSummary,
}

/// Evaluates the Beurling telescoping sum on random configurations.
///
/// Whether that sum can be negative is open; the report records values and
/// makes no claim about their sign.
pub fn remark_experiment(n: usize, trials: usize, seed: u64, tol: f64) -> Result<RemarkReport> {
    if !(2..=8).contains(&n) {
        return Err(domain(format!("remark experiment needs 2 <= N <= 8, got {n}")));
    }
    if trials == 0 {
        return Err(domain("need at least one trial"));
    }
    let records = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let nodes = uniform_nodes(&mut rng, n);
            let a = gaussian_coefficients(&mut rng, n);
            let s = telescoping_sum(&nodes, &a, Telescoping::Beurling, tol)?;
            Ok(RemarkTrial {
                trial,
                lambdas: nodes.lambdas().to_vec(),
                monotone_value: telescoping_identity(&nodes, &a)?,
                coefficients: a,
                value: s.value,
                imaginary: s.imaginary,
                err_estimate: s.err_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut argmin = 0;
    for (i, r) in records.iter().enumerate() {
        if r.value < records[argmin].value {
            argmin = i;
        }
    }
    let summary = RemarkSummary {
        min_value: records[argmin].value,
        argmin_trial: argmin,
        max_value: records.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max),
        mean_value: records.iter().map(|r| r.value).sum::<f64>() / trials as f64,
        negative_count: records.iter().filter(|r| r.value < 0.0).count(),
        max_imaginary: records.iter().map(|r| r.imaginary.abs()).fold(0.0, f64::max),
        max_err_estimate: records.iter().map(|r| r.err_estimate).fold(0.0, f64::max),
    };
    Ok(RemarkReport {
        n,
        trials,
        seed,
        tol,
        records,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantTrial {
    pub trial: usize,
    /// `baseline`, `random` or `perturbed`.
    pub kind: &'static str,
    pub constant: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSummary {
    pub max_constant: f64,
    pub best_trial: usize,
    pub baseline_constant: f64,
    pub max_residual: f64,
    pub preissmann_bound: f64,
    pub within_preissmann_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub records: Vec<ConstantTrial>,
    pub best_lambdas: Vec<f64>,
    pub summary: SearchSummary,
}

fn random_gaps(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let exp = Exp::new(1.0).expect("positive rate");
    (0..n - 1).map(|_| 0.05 + exp.sample(rng)).collect()
}

fn nodes_from_gaps(gaps: &[f64]) -> Vec<f64> {
    let mut l = Vec::with_capacity(gaps.len() + 1);
    l.push(0.0);
    for g in gaps {
        l.push(l.last().unwrap() + g);
    }
    l
}

/// Searches for node sets with a large sharp constant.
///
/// Trial 0 is the equally spaced baseline, followed by `trials` random
/// configurations and then `trials` multiplicative perturbations of the best
/// gaps found so far, each accepted only if it improves the maximum.
pub fn constant_search(n: usize, trials: usize, seed: u64, tol: f64) -> Result<ConstantReport> {
    if !(2..=2048).contains(&n) {
        return Err(domain(format!("constant search needs 2 <= N <= 2048, got {n}")));
    }
    let mut records = Vec::with_capacity(2 * trials + 1);
    let baseline_gaps = vec![1.0; n - 1];
    let baseline = sharp_constant(&compute_deltas(&nodes_from_gaps(&baseline_gaps))?, tol)?;
    records.push(ConstantTrial {
        trial: 0,
        kind: "baseline",
        constant: baseline.constant,
        iterations: baseline.iterations,
        residual: baseline.residual,
    });
    let mut best = (baseline.constant, 0usize, baseline_gaps);

    let random: Vec<(Vec<f64>, ConstantTrial)> = (1..=trials)
        .into_par_iter()
        .map(|trial| {
            let gaps = random_gaps(&mut trial_rng(seed, trial), n);
            let e = sharp_constant(&compute_deltas(&nodes_from_gaps(&gaps))?, tol)?;
            let rec = ConstantTrial {
                trial,
                kind: "random",
                constant: e.constant,
                iterations: e.iterations,
                residual: e.residual,
            };
            Ok((gaps, rec))
        })
        .collect::<Result<_>>()?;
    for (gaps, rec) in random {
        if rec.constant > best.0 {
            best = (rec.constant, rec.trial, gaps);
        }
        records.push(rec);
    }

    // local search is sequential: each step starts from the current best
    for trial in trials + 1..=2 * trials {
        let mut rng = trial_rng(seed, trial);
        let gaps: Vec<f64> = best
            .2
            .iter()
            .map(|g| {
                let z: f64 = StandardNormal.sample(&mut rng);
                g * (0.1 * z).exp()
            })
            .collect();
        let e = sharp_constant(&compute_deltas(&nodes_from_gaps(&gaps))?, tol)?;
        if e.constant > best.0 {
            best = (e.constant, trial, gaps);
        }
        records.push(ConstantTrial {
            trial,
            kind: "perturbed",
            constant: e.constant,
            iterations: e.iterations,
            residual: e.residual,
        });
    }

    let bound = preissmann_constant();
    let max_residual = records.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(ConstantReport {
        n,
        trials,
        seed,
        tol,
        best_lambdas: nodes_from_gaps(&best.2),
        summary: SearchSummary {
            max_constant: best.0,
            best_trial: best.1,
            baseline_constant: baseline.constant,
            max_residual,
            preissmann_bound: bound,
            within_preissmann_bound: best.0 <= bound + tol.max(max_residual),
        },
        records,
    })
}
