//! Benchmark harness: run the filtered Krylov solvers on built-in
//! convection–diffusion problems or Matrix Market files, emitting per-step
//! residual histories and an IT/MV/CPU summary, and run the randomized
//! invariant suites.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fkrylov::csr::CsrMatrix;
use fkrylov::problems::{assemble_pde, load_matrix_market, PdeCase, PdeCoefficients};
use fkrylov::solvers::{
    solve, FilterUsed, Method, SStrategy, SolveResult, SolverConfig,
};
use fkrylov::verify::run_all;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "fkrylov", about = "Filtered Krylov eigensolver benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one or more methods on a problem and write CSV histories.
    Run(RunArgs),
    /// Run the randomized invariant suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Problem: `case1`, `case2`, or `mm:<path>` for a Matrix Market file.
    #[arg(long)]
    problem: String,
    /// Interior grid size per direction for the built-in problems.
    #[arg(long = "N", default_value_t = 20)]
    n_grid: usize,
    /// Comma-separated subset of rfks,fks,cd,ac.
    #[arg(long, default_value = "rfks")]
    methods: String,
    /// Chebyshev filter degree.
    #[arg(long, default_value_t = 20)]
    m: usize,
    /// Restart length (Arnoldi cycle length for ac).
    #[arg(long = "nr", default_value_t = 40)]
    nr: usize,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Cap on recorded outer steps.
    #[arg(long = "max-outer", default_value_t = 20_000)]
    max_outer: usize,
    /// Combination strategy for rfks: last, weighted:<beta>, ritz, refined.
    #[arg(long = "s-strategy", default_value = "refined")]
    s_strategy: String,
    /// Reference-point placement fraction in (0, 1].
    #[arg(long = "zeta-fraction", default_value_t = 0.5)]
    zeta_fraction: f64,
    /// Seed for reseed perturbations (FK_SEED overrides).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Arnoldi warmup length for per-cycle filter calibration.
    #[arg(long, default_value_t = 20)]
    warmup: usize,
    /// Output directory for CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Sample count for the inequality suite; the others scale from it.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Suite seed (FK_SEED overrides).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Verify(args) => cmd_verify(args),
    };
    match code {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// `FK_SEED` wins over the flag when set.
fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var("FK_SEED") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .with_context(|| format!("FK_SEED must be an unsigned integer, got {s:?}")),
        Err(_) => Ok(flag),
    }
}

fn parse_methods(spec: &str) -> Result<Vec<Method>> {
    let mut methods = Vec::new();
    for tok in spec.split(',') {
        let tok = tok.trim();
        let m = match tok {
            "rfks" => Method::Rfks,
            "fks" => Method::Fks,
            "cd" => Method::Cd,
            "ac" => Method::Ac,
            other => bail!("unknown method {other:?} (expected rfks, fks, cd, ac)"),
        };
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        bail!("no methods requested");
    }
    Ok(methods)
}

fn parse_strategy(spec: &str) -> Result<SStrategy> {
    if let Some(beta) = spec.strip_prefix("weighted:") {
        let beta: f64 = beta
            .parse()
            .with_context(|| format!("bad weighted beta {beta:?}"))?;
        return Ok(SStrategy::Weighted(beta));
    }
    match spec {
        "last" => Ok(SStrategy::LastVector),
        "ritz" => Ok(SStrategy::RitzVector),
        "refined" => Ok(SStrategy::Refined),
        other => bail!("unknown s-strategy {other:?} (expected last, weighted:<beta>, ritz, refined)"),
    }
}

/// Loads the problem and returns the matrix plus the case label and size
/// reported in the summary.
fn load_problem(args: &RunArgs) -> Result<(CsrMatrix, String, usize)> {
    if let Some(path) = args.problem.strip_prefix("mm:") {
        let a = load_matrix_market(path).with_context(|| format!("loading {path}"))?;
        let n = a.n();
        return Ok((a, args.problem.clone(), n));
    }
    let coefficients = match args.problem.as_str() {
        "case1" => PdeCoefficients::CaseI,
        "case2" => PdeCoefficients::CaseII,
        other => bail!("unknown problem {other:?} (expected case1, case2, or mm:<path>)"),
    };
    if args.n_grid < 1 {
        bail!("N must be at least 1");
    }
    let case = PdeCase {
        coefficients,
        n_grid: args.n_grid,
    };
    Ok((assemble_pde(&case), args.problem.clone(), args.n_grid))
}

fn write_history(path: &PathBuf, result: &SolveResult) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(
        f,
        "step,theta_re,theta_im,resnorm,relresnorm,mv_total,elapsed_s,restarted,filter_d,filter_a,filter_m"
    )?;
    let res0 = result.initial_resnorm;
    for r in &result.history {
        let relres = if res0 > 0.0 { r.res_norm / res0 } else { 0.0 };
        let (fd, fa, fm) = match r.filter_used {
            FilterUsed::None => (String::new(), String::new(), 0),
            FilterUsed::Lambda => (String::new(), String::new(), 1),
            FilterUsed::Chebyshev { d, a_mod, m } => {
                (format!("{d:.17e}"), format!("{a_mod:.17e}"), m)
            }
            FilterUsed::Power { m } => (String::new(), String::new(), m),
        };
        writeln!(
            f,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.6e},{},{},{},{}",
            r.step,
            r.theta.re,
            r.theta.im,
            r.res_norm,
            relres,
            r.mv_total,
            r.elapsed_s,
            r.restarted,
            fd,
            fa,
            fm
        )?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn append_summary(
    path: &PathBuf,
    method: Method,
    case: &str,
    n_size: usize,
    cfg: &SolverConfig,
    result: &SolveResult,
    cpu_s: f64,
) -> Result<()> {
    let fresh = !path.exists();
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if fresh {
        writeln!(f, "method,case,N,m,n_r,IT,MV,CPU_s,lambda_re,lambda_im,converged")?;
    }
    let mv = result.history.last().map_or(0, |r| r.mv_total);
    writeln!(
        f,
        "{},{},{},{},{},{},{},{:.6e},{:.17e},{:.17e},{}",
        method.name(),
        case,
        n_size,
        cfg.m,
        cfg.n_r,
        result.history.len(),
        mv,
        cpu_s,
        result.eigenvalue.re,
        result.eigenvalue.im,
        result.converged
    )?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let seed = effective_seed(args.seed)?;
    let methods = parse_methods(&args.methods)?;
    let strategy = parse_strategy(&args.s_strategy)?;
    let (a, case, n_size) = load_problem(&args)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    // All-ones start vector; the solvers normalize it.
    let v0 = vec![1.0; a.n()];
    let mut all_converged = true;
    for &method in &methods {
        let mut cfg = SolverConfig::for_method(method);
        cfg.m = args.m;
        cfg.n_r = args.nr;
        cfg.tol = args.tol;
        cfg.max_outer = args.max_outer;
        cfg.zeta_fraction = args.zeta_fraction;
        cfg.arnoldi_warmup = args.warmup;
        cfg.seed = seed;
        if method == Method::Rfks {
            cfg.s_strategy = strategy;
        }
        let started = Instant::now();
        let result = solve(&a, &cfg, &v0)
            .with_context(|| format!("{} on {case}", method.name()))?;
        let cpu_s = started.elapsed().as_secs_f64();
        let history_path = args.out.join(format!("{}_history.csv", method.name()));
        write_history(&history_path, &result)?;
        append_summary(
            &args.out.join("summary.csv"),
            method,
            &case,
            n_size,
            &cfg,
            &result,
            cpu_s,
        )?;
        let last = result.history.last().expect("history is never empty");
        println!(
            "{}: {} in {} steps, {} products, {:.3} s: lambda = {:.12e}{:+.12e}i, residual {:.3e}",
            method.name(),
            if result.converged { "converged" } else { "NOT converged" },
            result.history.len(),
            last.mv_total,
            cpu_s,
            result.eigenvalue.re,
            result.eigenvalue.im,
            last.res_norm
        );
        all_converged &= result.converged;
    }
    Ok(if all_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let seed = effective_seed(args.seed)?;
    let reports = run_all(args.samples, seed);
    let mut all_passed = true;
    for r in &reports {
        if r.passed {
            println!(
                "suite {:<15} PASS  ({} samples, {:.2} s)",
                r.name, r.samples, r.elapsed_s
            );
        } else {
            all_passed = false;
            println!(
                "suite {:<15} FAIL  ({} samples, {:.2} s)",
                r.name, r.samples, r.elapsed_s
            );
            if let Some(c) = &r.counterexample {
                println!("  counterexample: {c}");
            }
        }
    }
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
