//! Randomized invariant suites: root-modulus inequality chains, the damping
//! bound sweep, recurrence/closed-form filter consistency, basis
//! orthonormality under adversarial growth, and small-problem oracle
//! equivalence. Each suite is deterministic for a fixed seed and reports the
//! first counterexample verbatim.

use crate::chebyshev::{arithmetic_sqrt, chebyshev_apply, damping_report, Ellipse, FilterSpec};
use crate::chebyshev::filter_value;
use crate::csr::{CsrMatrix, MatvecCounter};
use crate::dense::{normalize, DenseMat};
use crate::dense_eig::eig_real;
use crate::problems::{assemble_pde, PdeCase, PdeCoefficients};
use crate::solvers::{
    ac_solve, cd_solve, fks_solve, rfks_solve, Method, SolverConfig, SubspaceState,
};
use crate::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Slack scale for the inequality chains.
const LEMMA_SLACK: f64 = 1e-12;
/// Additive slack for the damping bound.
const BOUND_SLACK: f64 = 1e-12;
/// Relative tolerance for recurrence vs closed form.
const FILTER_REL: f64 = 1e-10;
/// Tolerance for filter normalization at the reference point.
const NORMALIZATION_TOL: f64 = 1e-13;
/// Orthonormality defect cap.
const ORTH_TOL: f64 = 1e-12;
/// Oracle agreement: |Δλ| ≤ this times ‖A‖_F.
const ORACLE_REL: f64 = 1e-8;

/// Outcome of one suite run.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    /// Number of random instances checked.
    pub samples: usize,
    pub elapsed_s: f64,
    /// First violation, formatted with inputs and both sides.
    pub counterexample: Option<String>,
}

impl SuiteReport {
    fn finish(
        name: &'static str,
        samples: usize,
        started: Instant,
        counterexample: Option<String>,
    ) -> Self {
        SuiteReport {
            name,
            passed: counterexample.is_none(),
            samples,
            elapsed_s: started.elapsed().as_secs_f64(),
            counterexample,
        }
    }
}

/// Root-modulus inequality chains on both half-planes, `samples` points
/// each: smaller root ≤ |‖z‖ + √(‖z‖²−1)| ≤ larger root ≤ ‖z‖ + √(‖z‖²+1),
/// with moduli log-uniform in [1e-3, 1e3].
pub fn lemma_suite(samples: usize, seed: u64) -> SuiteReport {
    lemma_suite_impl(samples, seed, false)
}

/// Test-only hook: `flip_branch` swaps which root is treated as the
/// modulus-largest one, which must make the suite fail.
#[doc(hidden)]
pub fn lemma_suite_impl(samples: usize, seed: u64, flip_branch: bool) -> SuiteReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counterexample = None;
    'outer: for half in 0..2 {
        for _ in 0..samples {
            let r = 10.0f64.powf(rng.gen_range(-3.0..3.0));
            let phi = if half == 0 {
                rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2)
            } else {
                rng.gen_range(std::f64::consts::FRAC_PI_2..3.0 * std::f64::consts::FRAC_PI_2)
            };
            let z = Complex64::from_polar(r, phi);
            if z.re == 0.0 {
                continue;
            }
            let s = arithmetic_sqrt(z * z - 1.0);
            let plus = (z + s).norm();
            let minus = (z - s).norm();
            // The modulus-largest root is z + √(z²−1) on the right
            // half-plane and z − √(z²−1) on the left.
            let right = (z.re > 0.0) != flip_branch;
            let (lo, hi) = if right { (minus, plus) } else { (plus, minus) };
            let zn = z.norm();
            let mid = (Complex64::new(zn, 0.0)
                + arithmetic_sqrt(Complex64::new(zn * zn - 1.0, 0.0)))
            .norm();
            let cap = zn + (zn * zn + 1.0).sqrt();
            let slack = LEMMA_SLACK * (1.0 + zn);
            let chain = [
                ("smaller root vs middle", lo, mid),
                ("middle vs larger root", mid, hi),
                ("larger root vs cap", hi, cap),
            ];
            for (label, lhs, rhs) in chain {
                if lhs > rhs + slack {
                    counterexample = Some(format!(
                        "z = {:+.15e}{:+.15e}i: {label} violated: {:.15e} > {:.15e} + {slack:.3e}",
                        z.re, z.im, lhs, rhs
                    ));
                    break 'outer;
                }
            }
        }
    }
    SuiteReport::finish("lemma", 2 * samples, started, counterexample)
}

/// Damping-bound sweep: random ellipses (fat, thin, and circles), a real
/// reference point outside, and 50 interior eigenvalues per instance by
/// rejection sampling; the max damping coefficient must respect the bound.
pub fn theorem_suite(instances: usize, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counterexample = None;
    'outer: for _ in 0..instances {
        let d = rng.gen_range(-3.0..3.0);
        let a_mod = rng.gen_range(0.2..2.5);
        let c2 = match rng.gen_range(0..3) {
            0 => 0.0,
            1 => rng.gen_range(0.0..0.9) * a_mod * a_mod,
            _ => -rng.gen_range(0.0..0.9) * a_mod * a_mod,
        };
        let ellipse = Ellipse { d, c2, a_mod };
        let lambda_ref = d + a_mod * rng.gen_range(1.05..3.0);
        let spec = FilterSpec {
            ellipse,
            m: 20,
            lambda_ref,
        };
        let (rx, ry) = (ellipse.real_semiaxis(), ellipse.imag_semiaxis());
        let mut interior = Vec::with_capacity(50);
        let mut attempts = 0;
        while interior.len() < 50 && attempts < 100_000 {
            attempts += 1;
            let z = Complex64::new(
                d + rng.gen_range(-1.0..1.0) * rx,
                rng.gen_range(-1.0..1.0) * ry,
            );
            if ellipse.contains(z) {
                interior.push(z);
            }
        }
        let report = damping_report(&interior, &spec);
        if report.kappa_max > report.bound + BOUND_SLACK {
            counterexample = Some(format!(
                "ellipse d={d:.15e} c2={c2:.15e} a={a_mod:.15e}, lambda1={lambda_ref:.15e}: \
                 kappa_max = {:.15e} > bound = {:.15e} + {BOUND_SLACK:.1e}",
                report.kappa_max, report.bound
            ));
            break 'outer;
        }
    }
    SuiteReport::finish("theorem", instances, started, counterexample)
}

/// Recurrence vs closed form on diagonal matrices (`specs` instances,
/// degrees up to 60), plus `normalizations` checks that the filter equals
/// one at its reference point.
pub fn filter_suite(specs: usize, normalizations: usize, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counterexample = None;
    'outer: for round in 0..specs {
        let n = 30;
        let d_center = rng.gen_range(-2.0..2.0);
        let a_mod = rng.gen_range(0.3..2.0);
        // Alternate circles with thin ellipses (imaginary foci); both keep
        // the real axis free of polynomial zeros away from the center.
        let c2 = if round % 2 == 0 {
            0.0
        } else {
            -rng.gen_range(0.1..0.9) * a_mod * a_mod
        };
        let ellipse = Ellipse {
            d: d_center,
            c2,
            a_mod,
        };
        let reach = ellipse.real_semiaxis();
        // Interior eigenvalues kept away from the exact center so the
        // elementwise comparison stays in the normal floating-point range.
        let eigs: Vec<f64> = (0..n)
            .map(|_| {
                let mut t: f64 = rng.gen_range(-1.0..1.0);
                if t.abs() < 1e-2 {
                    t = if t >= 0.0 { 1e-2 } else { -1e-2 };
                }
                d_center + t * reach
            })
            .collect();
        let lambda_ref = d_center + a_mod * rng.gen_range(1.2..3.0);
        let m = rng.gen_range(1..=60);
        let spec = FilterSpec { ellipse, m, lambda_ref };
        let a = CsrMatrix::from_triplets(
            n,
            &eigs
                .iter()
                .enumerate()
                .map(|(i, &x)| (i, i, x))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let z0 = vec![1.0; n];
        let mut counter = MatvecCounter::new();
        let out = match chebyshev_apply(&a, &spec, &z0, &mut counter) {
            Ok(v) => v,
            Err(e) => {
                counterexample = Some(format!(
                    "spec d={d_center:.6e} a={a_mod:.6e} m={m}: recurrence failed: {e}"
                ));
                break 'outer;
            }
        };
        for (i, &lam) in eigs.iter().enumerate() {
            let closed = match filter_value(&spec, Complex64::new(lam, 0.0)) {
                Ok(c) => c.re,
                Err(e) => {
                    counterexample = Some(format!("closed form failed at λ={lam:.6e}: {e}"));
                    break 'outer;
                }
            };
            let err = (out[i] - closed).abs();
            if err > FILTER_REL * (1.0 + closed.abs()) {
                counterexample = Some(format!(
                    "spec d={d_center:.15e} a={a_mod:.15e} ref={lambda_ref:.15e} m={m}, \
                     λ={lam:.15e}: recurrence {:.15e} vs closed {closed:.15e} (err {err:.3e})",
                    out[i]
                ));
                break 'outer;
            }
        }
    }
    if counterexample.is_none() {
        for _ in 0..normalizations {
            let d = rng.gen_range(-5.0..5.0);
            let a_mod = rng.gen_range(0.05..4.0);
            let c2 = match rng.gen_range(0..3) {
                0 => 0.0,
                1 => rng.gen_range(0.0..0.9) * a_mod * a_mod,
                _ => -rng.gen_range(0.0..0.9) * a_mod * a_mod,
            };
            let lambda_ref = d + a_mod * rng.gen_range(1.01..4.0);
            let m = rng.gen_range(1..=60);
            let spec = FilterSpec {
                ellipse: Ellipse { d, c2, a_mod },
                m,
                lambda_ref,
            };
            let v = filter_value(&spec, Complex64::new(lambda_ref, 0.0)).unwrap();
            let err = (v - Complex64::new(1.0, 0.0)).norm();
            if err > NORMALIZATION_TOL {
                counterexample = Some(format!(
                    "spec d={d:.15e} c2={c2:.15e} a={a_mod:.15e} ref={lambda_ref:.15e} m={m}: \
                     p(ref) = {:+.15e}{:+.15e}i, |p(ref) − 1| = {err:.3e} > {NORMALIZATION_TOL:.1e}",
                    v.re, v.im
                ));
                break;
            }
        }
    }
    SuiteReport::finish("filter", specs + normalizations, started, counterexample)
}

/// Orthonormality under adversarial subspace growth: random matrices,
/// extensions alternating random directions with nearly-dependent ones; the
/// basis defect must stay at round-off scale at every step.
pub fn orthonormality_suite(trials: usize, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counterexample = None;
    'outer: for trial in 0..trials {
        let n = 20 + 10 * (trial % 3);
        let dense = DenseMat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = CsrMatrix::from_dense(&dense).unwrap();
        let mut v0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        normalize(&mut v0);
        let mut counter = MatvecCounter::new();
        let mut st = SubspaceState::seed(&a, v0, &mut counter).unwrap();
        for step in 0..(n / 2) {
            let z: Vec<f64> = if step % 2 == 0 {
                (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
            } else {
                // Nearly in the span: last basis vector plus a tiny kick.
                let last = st.v.col(st.k() - 1);
                (0..n)
                    .map(|i| last[i] + 1e-9 * rng.gen_range(-1.0..1.0))
                    .collect()
            };
            if st.extend(&a, &z, &mut counter).is_err() {
                break;
            }
            let defect = st.v.orthonormality_defect();
            if defect > ORTH_TOL {
                counterexample = Some(format!(
                    "trial {trial} (n={n}), step {step}: orthonormality defect \
                     {defect:.15e} > {ORTH_TOL:.1e}"
                ));
                break 'outer;
            }
        }
    }
    SuiteReport::finish("orthonormality", trials, started, counterexample)
}

/// Oracle equivalence on small assembled problems: every method must agree
/// with the dense rightmost eigenvalue to `1e-8·‖A‖_F`.
pub fn oracle_suite(seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut counterexample = None;
    let cases = [
        (PdeCoefficients::CaseI, 8usize),
        (PdeCoefficients::CaseII, 8usize),
    ];
    'outer: for (coefficients, n_grid) in cases {
        let case = PdeCase {
            coefficients,
            n_grid,
        };
        let a = assemble_pde(&case);
        let fro = a.frobenius_norm();
        let exact = match eig_real(&a.to_dense()) {
            Ok(p) => p.values[0],
            Err(e) => {
                counterexample = Some(format!("dense oracle failed: {e}"));
                break 'outer;
            }
        };
        let v0 = vec![1.0; a.n()];
        let mut cfg = SolverConfig::for_method(Method::Rfks);
        cfg.m = 10;
        cfg.n_r = 20;
        cfg.tol = 1e-11;
        cfg.seed = seed;
        let mut ac_cfg = cfg.clone();
        ac_cfg.method = Method::Ac;
        ac_cfg.n_r = 10;
        let runs = [
            ("rfks", rfks_solve(&a, &cfg, &v0)),
            ("fks", fks_solve(&a, &cfg, &v0)),
            ("cd", cd_solve(&a, &cfg, &v0)),
            ("ac", ac_solve(&a, &ac_cfg, &v0)),
        ];
        for (name, run) in runs {
            let run = match run {
                Ok(r) => r,
                Err(e) => {
                    counterexample = Some(format!("{name} failed on n_grid={n_grid}: {e}"));
                    break 'outer;
                }
            };
            let delta = (run.eigenvalue - exact).norm();
            if !run.converged || delta > ORACLE_REL * fro {
                counterexample = Some(format!(
                    "{name} on n_grid={n_grid}: λ = {:+.15e}{:+.15e}i vs oracle \
                     {:+.15e}{:+.15e}i, |Δ| = {delta:.3e} > {:.3e} (converged={})",
                    run.eigenvalue.re,
                    run.eigenvalue.im,
                    exact.re,
                    exact.im,
                    ORACLE_REL * fro,
                    run.converged
                ));
                break 'outer;
            }
        }
    }
    SuiteReport::finish("oracle", cases.len(), started, counterexample)
}

/// Runs every suite with sizes scaled from `samples` (the lemma sample
/// count; the defaults mirror `samples = 100_000`).
pub fn run_all(samples: usize, seed: u64) -> Vec<SuiteReport> {
    let theorem = (samples / 100).max(1);
    let specs = (samples / 1000).max(1);
    let normalizations = (samples / 10).max(1);
    let trials = (samples / 20_000).max(1);
    vec![
        lemma_suite(samples, seed),
        theorem_suite(theorem, seed.wrapping_add(1)),
        filter_suite(specs, normalizations, seed.wrapping_add(2)),
        orthonormality_suite(trials, seed.wrapping_add(3)),
        oracle_suite(seed.wrapping_add(4)),
    ]
}
