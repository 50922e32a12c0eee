//! Command-line interface.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad usage or
//! input, 3 a numerical budget or tolerance could not be met.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::extremal::{beurling, eval_heaviside_majorant, eval_heaviside_majorant_sorted, eval_kernel, sgn, Kernel};
use crate::fourier::{band_limit_check, numeric_ft, psi_hat, FtKind};
use crate::hilbert::{
    bilinear_form, compute_deltas, constant_search, preissmann_constant, remark_experiment, sharp_constant,
    telescoping_identity, telescoping_identity_reflected, telescoping_sum, verify_inequality, CoefficientVector,
    NodeSystem, Telescoping,
};
use crate::quad::{integrate_with_tails, poisson_check, FullLine};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "extremal",
    version,
    about = "Extremal majorants of sgn(x) and the weighted Hilbert inequality"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate G, M, B and the two deficits on a grid.
    Eval(EvalArgs),
    /// Run the invariant suite and print a JSON report.
    Verify(VerifyArgs),
    /// Inequality margins and the sharp constant for a node file.
    Hilbert(HilbertArgs),
    /// Seeded searches: sharp constants or the Beurling telescoping sum.
    Search(SearchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// `start:stop:steps`, with steps >= 2.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance for the full-line integrals.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Debug, Args)]
struct HilbertArgs {
    /// One node per line; `#` starts a comment.
    #[arg(long)]
    nodes: PathBuf,
    /// `re,im` per line, one per node.
    #[arg(long)]
    coeffs: Option<PathBuf>,
    /// Extra constant to report a margin for.
    #[arg(long)]
    constant: Option<f64>,
    /// Tolerance of the power iteration.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Constant,
    Remark,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to 1e-10 for `constant` and 1e-8 for `remark`.
    #[arg(long)]
    tol: Option<f64>,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Hilbert(a) => cmd_hilbert(&a, out),
        Command::Search(a) => cmd_search(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(err, "numerical failure: {msg}");
            EXIT_NUMERICAL
        }
    }
}

fn emit_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("grid must look like start:stop:steps, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n < 2 {
        return Err(Failure::Usage(format!("grid needs at least 2 steps, got {n}")));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Failure::Usage(format!("grid needs finite start < stop, got {a}:{b}")));
    }
    let h = (b - a) / (n - 1) as f64;
    Ok((0..n).map(|i| if i + 1 == n { b } else { a + h * i as f64 }).collect())
}

#[derive(Debug, Serialize)]
struct EvalRow {
    x: f64,
    #[serde(rename = "G")]
    g: f64,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "B")]
    b: f64,
    psi: f64,
    phi: f64,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    tol_requested: f64,
    /// Largest error estimate of `M`, `psi` and `phi` over the grid.
    tol_achieved: f64,
    rows: Vec<EvalRow>,
}

fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let xs = parse_grid(&args.grid)?;
    if !(1e-12..=1e-4).contains(&args.tol) {
        return Err(Failure::Usage(format!(
            "tolerance must lie in [1e-12, 1e-4], got {}",
            args.tol
        )));
    }
    // M = 2G - 1 doubles the error of G
    let tol_g = (args.tol / 2.0).max(1e-12);
    let (g, err) = eval_heaviside_majorant_sorted(&xs, tol_g)?;
    let reflected: Vec<f64> = xs.iter().rev().map(|x| -x).collect();
    let (g_ref, err_ref) = eval_heaviside_majorant_sorted(&reflected, tol_g)?;
    let achieved = 2.0 * err.max(err_ref);
    if achieved > args.tol {
        return Err(Error::ToleranceNotMet {
            requested: args.tol,
            achieved,
        }
        .into());
    }
    let n = xs.len();
    let rows: Vec<EvalRow> = (0..n)
        .map(|i| {
            let x = xs[i];
            let m = 2.0 * g[i] - 1.0;
            let m_reflected = 2.0 * g_ref[n - 1 - i] - 1.0;
            EvalRow {
                x,
                g: g[i],
                m,
                b: beurling(x),
                psi: m - sgn(x),
                phi: m_reflected + sgn(x),
            }
        })
        .collect();
    let mut text = String::new();
    match args.format {
        Format::Csv => {
            text.push_str("x,G,M,B,psi,phi\n");
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    r.x, r.g, r.m, r.b, r.psi, r.phi
                );
            }
        }
        Format::Json => {
            let report = EvalReport {
                tol_requested: args.tol,
                tol_achieved: achieved,
                rows,
            };
            text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Usage(e.to_string()))?;
            text.push('\n');
        }
    }
    match &args.output {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    measured: f64,
    expected: f64,
    threshold: f64,
}

impl Check {
    fn near(name: &'static str, measured: f64, expected: f64, threshold: f64) -> Check {
        Check {
            name,
            passed: (measured - expected).abs() <= threshold,
            measured,
            expected,
            threshold,
        }
    }

    fn at_most(name: &'static str, measured: f64, threshold: f64) -> Check {
        Check {
            name,
            passed: measured <= threshold,
            measured,
            expected: 0.0,
            threshold,
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    seed: u64,
    tol: f64,
    psi_integral: f64,
    psi_integral_error: f64,
    heaviside_integral: f64,
    g_integral: f64,
    moment_integral: f64,
    g_at_zero: f64,
    poisson_g_sum: f64,
    poisson_moment_sum: f64,
    psi_hat_zero_numeric: f64,
    beurling_integral: f64,
    band_residual_max: f64,
    band_residual_closed_form: f64,
    factorization_residual: f64,
    telescoping_max_discrepancy: f64,
    telescoping_min_value: f64,
    inequality_min_margin: f64,
    checks: Vec<Check>,
    all_passed: bool,
}

/// Frequencies for the band identity.
const BAND_SAMPLES: [f64; 10] = [1.25, -1.25, 2.0, -2.0, 3.5, -3.5, 5.0, -5.0, 10.0, -10.0];

fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> (NodeSystem, CoefficientVector) {
    loop {
        let l: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        if let Ok(nodes) = compute_deltas(&l) {
            if nodes.deltas().iter().all(|&d| d > 1e-3) {
                let a: Vec<Complex64> = (0..n)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                return (nodes, a.into());
            }
        }
    }
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let tol = args.tol;
    let psi = integrate_with_tails(FullLine::Deficit, tol)?;
    let heaviside = integrate_with_tails(FullLine::HeavisideDeficit, tol)?;
    let g = integrate_with_tails(FullLine::Slope, tol)?;
    let moment = integrate_with_tails(FullLine::Moment, tol)?;
    let g0 = eval_heaviside_majorant(0.0, 1e-10)?;
    let poisson_g = poisson_check(Kernel::Slope, 1000)?;
    let poisson_h = poisson_check(Kernel::Moment, 1000)?;
    let psi_hat_zero = numeric_ft(FtKind::Psi, 0.0, 1e-8)?.value;
    let beurling_integral = numeric_ft(FtKind::PsiBeurling, 0.0, 1e-8)?.value;
    let band_numeric = band_limit_check(FtKind::Psi, &BAND_SAMPLES, 1e-8)?.max(band_limit_check(
        FtKind::PsiBeurling,
        &BAND_SAMPLES,
        1e-8,
    )?);
    let band_closed = BAND_SAMPLES
        .iter()
        .map(|&t| (psi_hat(t) + 1.0 / (PI * Complex64::i() * t)).norm())
        .fold(0.0, f64::max);
    let factorization = (0..=4000)
        .map(|i| {
            let u = -20.0 + 0.01 * i as f64;
            let h = eval_kernel(Kernel::Factor, u);
            (eval_kernel(Kernel::Moment, u) - u * u * h * h).abs()
        })
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut tele_gap: f64 = 0.0;
    let mut tele_min = f64::INFINITY;
    let mut margin_min = f64::INFINITY;
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let (nodes, a) = random_instance(&mut rng, n);
        let s = telescoping_sum(&nodes, &a, Telescoping::Sign, 1e-8)?;
        let id = telescoping_identity(&nodes, &a)?;
        tele_gap = tele_gap.max((s.value - id).abs());
        tele_min = tele_min.min(s.value).min(telescoping_identity_reflected(&nodes, &a)?);
        margin_min = margin_min.min(verify_inequality(&nodes, &a, 2.0 * PI)?);
    }

    let checks = vec![
        Check::near("psi_integral", psi.value, 2.0, 1e-8),
        Check::near("heaviside_integral", heaviside.value, 1.0, 1e-8),
        Check::near("g_integral", g.value, 1.0, 1e-8),
        Check::near("moment_integral", moment.value, 1.0, 1e-8),
        Check::near("g_at_zero", g0, 1.0749, 5e-4),
        Check::near("poisson_g_sum", poisson_g.sum, 1.0, 0.0),
        Check::near("poisson_moment_sum", poisson_h.sum, 1.0, 0.0),
        Check::near("psi_hat_zero", psi_hat_zero.re, 2.0, 1e-7),
        Check::near("beurling_integral", beurling_integral.re, 1.0, 1e-6),
        Check::at_most("band_residual_max", band_numeric, 1e-5),
        Check::at_most("band_residual_closed_form", band_closed, 1e-12),
        Check::at_most("factorization_residual", factorization, 1e-14),
        Check::at_most("telescoping_max_discrepancy", tele_gap, 1e-8),
        Check::at_most("telescoping_negativity", -tele_min, 1e-8),
        Check::at_most("inequality_negativity", -margin_min, 0.0),
    ];
    let all_passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        seed: args.seed,
        tol,
        psi_integral: psi.value,
        psi_integral_error: psi.err_estimate,
        heaviside_integral: heaviside.value,
        g_integral: g.value,
        moment_integral: moment.value,
        g_at_zero: g0,
        poisson_g_sum: poisson_g.sum,
        poisson_moment_sum: poisson_h.sum,
        psi_hat_zero_numeric: psi_hat_zero.re,
        beurling_integral: beurling_integral.re,
        band_residual_max: band_numeric,
        band_residual_closed_form: band_closed,
        factorization_residual: factorization,
        telescoping_max_discrepancy: tele_gap,
        telescoping_min_value: tele_min,
        inequality_min_margin: margin_min,
        checks,
        all_passed,
    };
    emit_json(&report, out)?;
    Ok(if all_passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let body = line.split('#').next().unwrap_or("").trim();
            (!body.is_empty()).then(|| (i + 1, body.to_string()))
        })
        .collect())
}

fn parse_nodes(path: &Path) -> Result<Vec<f64>, Failure> {
    read_lines(path)?
        .into_iter()
        .map(|(line, s)| {
            s.parse::<f64>()
                .map_err(|_| Failure::Usage(format!("{}:{line}: not a number: `{s}`", path.display())))
        })
        .collect()
}

fn parse_coeffs(path: &Path) -> Result<CoefficientVector, Failure> {
    let v = read_lines(path)?
        .into_iter()
        .map(|(line, s)| {
            let bad = || Failure::Usage(format!("{}:{line}: expected `re,im`, got `{s}`", path.display()));
            let (re, im) = s.split_once(',').ok_or_else(bad)?;
            let re: f64 = re.trim().parse().map_err(|_| bad())?;
            let im: f64 = im.trim().parse().map_err(|_| bad())?;
            Ok(Complex64::new(re, im))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(v.into())
}

#[derive(Debug, Serialize)]
struct Margin {
    label: String,
    constant: f64,
    margin: f64,
}

#[derive(Debug, Serialize)]
struct SharpSummary {
    constant: f64,
    iterations: usize,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct HilbertReport {
    n: usize,
    deltas: Vec<f64>,
    /// `file`, or `witness` when no coefficients were given.
    coefficients_source: &'static str,
    bilinear_form: Complex64,
    weighted_norm: f64,
    margins: Vec<Margin>,
    sharp_constant: SharpSummary,
}

fn cmd_hilbert(args: &HilbertArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let nodes = compute_deltas(&parse_nodes(&args.nodes)?)?;
    if let Some(c) = args.constant {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Failure::Usage(format!("constant must be positive, got {c}")));
        }
    }
    let sharp = sharp_constant(&nodes, args.tol)?;
    let (a, source) = match &args.coeffs {
        Some(p) => (parse_coeffs(p)?, "file"),
        None => (sharp.witness.clone(), "witness"),
    };
    let phi = bilinear_form(&nodes, &a)?;
    let mut constants = vec![
        ("pi".to_string(), PI),
        ("preissmann".to_string(), preissmann_constant()),
        ("2pi".to_string(), 2.0 * PI),
    ];
    if let Some(c) = args.constant {
        constants.push(("user".to_string(), c));
    }
    let margins = constants
        .into_iter()
        .map(|(label, c)| {
            Ok(Margin {
                margin: verify_inequality(&nodes, &a, c)?,
                label,
                constant: c,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let report = HilbertReport {
        n: nodes.len(),
        deltas: nodes.deltas().to_vec(),
        coefficients_source: source,
        bilinear_form: phi,
        weighted_norm: nodes.weighted_norm(&a)?,
        margins,
        sharp_constant: SharpSummary {
            constant: sharp.constant,
            iterations: sharp.iterations,
            residual: sharp.residual,
        },
    };
    emit_json(&report, out)?;
    Ok(EXIT_OK)
}

fn cmd_search(args: &SearchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    match args.mode {
        Mode::Constant => {
            let report = constant_search(args.n, args.trials, args.seed, args.tol.unwrap_or(1e-10))?;
            emit_json(&report, out)?;
            Ok(if report.summary.within_preissmann_bound {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            })
        }
        Mode::Remark => {
            let report = remark_experiment(args.n, args.trials, args.seed, args.tol.unwrap_or(1e-8))?;
            emit_json(&report, out)?;
            Ok(EXIT_OK)
        }
    }
}
