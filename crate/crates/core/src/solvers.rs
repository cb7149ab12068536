//! Filtered Krylov solvers for the rightmost eigenpair of a sparse real
//! matrix: a relaxed filtered Krylov iteration with pluggable combination
//! strategies, its fixed-combination specialization, a Chebyshev–Davidson
//! style variant, and a restarted Arnoldi–Chebyshev baseline.

use crate::chebyshev::{chebyshev_apply, determine_ellipse, FilterSpec};
use crate::csr::{CsrMatrix, MatvecCounter};
use crate::dense::{dot, normalize, DenseMat};
use crate::dense_eig::{eig_real, refined_s, EigenPairSet};
use crate::mgs::{is_breakdown, mgs_orthonormalize, mgs_project};
use crate::{Complex64, Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Relative size of the random reseed perturbation after a breakdown.
const PERTURB_REL: f64 = 1e-8;

/// Which solver drives the outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rfks,
    Fks,
    Cd,
    Ac,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rfks => "rfks",
            Method::Fks => "fks",
            Method::Cd => "cd",
            Method::Ac => "ac",
        }
    }
}

/// How the combination vector `s` is chosen before filtering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SStrategy {
    /// `s = e_k`: filter the newest basis vector.
    LastVector,
    /// Geometrically decaying weights `s_i ∝ beta^{k-i}`, unit-normalized.
    Weighted(f64),
    /// Real part of the current rightmost Ritz vector coefficients.
    RitzVector,
    /// Refined direction minimizing `‖(A - θI)V s‖` over unit `s`.
    Refined,
}

/// When the damping ellipse is re-estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterPolicy {
    /// Rebuild the ellipse from the current Ritz values at every step.
    DynamicEveryStep,
    /// Calibrate once per restart cycle from a short Arnoldi warmup.
    FrozenPerCycle,
}

/// Full configuration for one solver run.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    /// Chebyshev filter degree.
    pub m: usize,
    /// Restart parameter: maximum subspace dimension (Arnoldi cycle length
    /// for [`Method::Ac`]).
    pub n_r: usize,
    /// Relative residual tolerance against the seed residual.
    pub tol: f64,
    /// Cap on the number of recorded outer steps.
    pub max_outer: usize,
    pub s_strategy: SStrategy,
    /// Fractional placement of the reference point between the unwanted
    /// spectrum edge and a real target.
    pub zeta_fraction: f64,
    /// Arnoldi length for per-cycle filter calibration.
    pub arnoldi_warmup: usize,
    /// Seed for the reseed-perturbation stream.
    pub seed: u64,
    pub filter_policy: FilterPolicy,
}

impl SolverConfig {
    /// Defaults for `method`; tune fields afterwards as needed.
    pub fn for_method(method: Method) -> Self {
        let (s_strategy, filter_policy) = match method {
            Method::Rfks => (SStrategy::Refined, FilterPolicy::DynamicEveryStep),
            Method::Fks => (SStrategy::LastVector, FilterPolicy::FrozenPerCycle),
            Method::Cd => (SStrategy::RitzVector, FilterPolicy::DynamicEveryStep),
            Method::Ac => (SStrategy::RitzVector, FilterPolicy::DynamicEveryStep),
        };
        SolverConfig {
            method,
            m: 20,
            n_r: 40,
            tol: 1e-10,
            max_outer: 20_000,
            s_strategy,
            zeta_fraction: 0.5,
            arnoldi_warmup: 20,
            seed: 0,
            filter_policy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::Config("filter degree m must be at least 1".into()));
        }
        if self.n_r < 2 {
            return Err(Error::Config("restart length n_r must be at least 2".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.max_outer < 1 {
            return Err(Error::Config("max_outer must be at least 1".into()));
        }
        if !(self.zeta_fraction > 0.0 && self.zeta_fraction <= 1.0) {
            return Err(Error::Config("zeta_fraction must lie in (0, 1]".into()));
        }
        if self.arnoldi_warmup < 1 {
            return Err(Error::Config("arnoldi_warmup must be at least 1".into()));
        }
        if let SStrategy::Weighted(beta) = self.s_strategy {
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::Config("weighted beta must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// What polynomial produced the step recorded in a [`RunRecord`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterUsed {
    /// Seed or plain restart: no polynomial applied.
    None,
    /// Identity filter `p(λ) = λ` (single product).
    Lambda,
    /// Degree-`m` Chebyshev filter on the recorded circle.
    Chebyshev { d: f64, a_mod: f64, m: usize },
    /// Fallback power iteration of length `m`.
    Power { m: usize },
}

impl FilterUsed {
    /// Matrix products consumed by the filter application itself.
    pub fn cost(&self) -> u64 {
        match self {
            FilterUsed::None => 0,
            FilterUsed::Lambda => 1,
            FilterUsed::Chebyshev { m, .. } | FilterUsed::Power { m } => *m as u64,
        }
    }
}

/// One recorded outer step.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub step: usize,
    pub theta: Complex64,
    pub res_norm: f64,
    /// Cumulative matrix–vector products after this step.
    pub mv_total: u64,
    pub elapsed_s: f64,
    /// Whether this row re-seeded the subspace.
    pub restarted: bool,
    pub filter_used: FilterUsed,
}

/// Outcome of a solver run. `converged = false` reports the best pair seen.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub eigenvalue: Complex64,
    /// Unit real vector approximating the rightmost eigenvector.
    pub eigenvector: Vec<f64>,
    pub history: Vec<RunRecord>,
    pub converged: bool,
    /// Residual norm of the seed state, the reference for relative tests.
    pub initial_resnorm: f64,
}

/// Read-only snapshot behind one history row, handed to the observer of
/// [`solve_probed`] right after the row is recorded. The lifted approximate
/// eigenvector is `basis · combo`.
pub struct StepView<'a> {
    /// Orthonormal basis of the projection subspace at this step.
    pub basis: &'a DenseMat,
    /// Small-problem eigenvector behind the reported Ritz pair.
    pub combo: &'a [Complex64],
    pub theta: Complex64,
    pub res_norm: f64,
}

/// Outcome of a (possibly early-terminated) Arnoldi factorization.
#[derive(Debug, Clone)]
pub struct ArnoldiResult {
    /// Orthonormal basis `V` with `j` columns.
    pub basis: DenseMat,
    /// Square upper-Hessenberg projection `H = Vᵀ A V` (j × j).
    pub hess: DenseMat,
    /// `(v_{j+1}, h_{j+1,j})` unless the factorization hit an invariant
    /// subspace.
    pub next: Option<(Vec<f64>, f64)>,
}

/// Runs `steps` Arnoldi steps from `v0` (normalized internally).
/// Consumes exactly one product per completed step.
pub fn arnoldi(
    a: &CsrMatrix,
    v0: &[f64],
    steps: usize,
    counter: &mut MatvecCounter,
) -> Result<ArnoldiResult> {
    let n = a.n();
    if v0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "start vector has length {}, matrix order is {n}",
            v0.len()
        )));
    }
    if steps < 1 || steps > n {
        return Err(Error::Config(format!(
            "arnoldi steps must lie in [1, {n}], got {steps}"
        )));
    }
    let mut v1 = v0.to_vec();
    if normalize(&mut v1) == 0.0 {
        return Err(Error::Config("arnoldi start vector is zero".into()));
    }
    let mut basis = DenseMat::with_rows(n);
    basis.push_col(v1)?;
    // Per column: projection coefficients plus the subdiagonal entry for
    // non-terminal columns.
    let mut cols: Vec<(Vec<f64>, Option<f64>)> = Vec::with_capacity(steps);
    let mut next = None;
    for t in 0..steps {
        let w = a.matvec(basis.col(t), counter);
        let (h, mut rem, rem_norm, norm0) = mgs_project(&basis, &w)?;
        if is_breakdown(rem_norm, norm0) {
            cols.push((h, None));
            break;
        }
        for x in rem.iter_mut() {
            *x /= rem_norm;
        }
        if t + 1 == steps {
            cols.push((h, None));
            next = Some((rem, rem_norm));
            break;
        }
        cols.push((h, Some(rem_norm)));
        basis.push_col(rem)?;
    }
    let j = cols.len();
    let hess = DenseMat::from_fn(j, j, |i, c| {
        if i < cols[c].0.len() {
            cols[c].0[i]
        } else if i == c + 1 {
            cols[c].1.unwrap_or(0.0)
        } else {
            0.0
        }
    });
    Ok(ArnoldiResult { basis, hess, next })
}

/// Rayleigh–Ritz subspace with the cached small matrices needed by the
/// refined combination strategy.
#[derive(Debug, Clone)]
pub struct SubspaceState {
    pub v: DenseMat,
    pub w: DenseMat,
    /// `H = VᵀW = VᵀAV`.
    pub h: DenseMat,
    /// `WᵀW` (symmetric).
    pub wtw: DenseMat,
    /// `WᵀV`.
    pub wtv: DenseMat,
    pub ritz: EigenPairSet,
    /// Current real approximate eigenvector (unit norm).
    pub x_cur: Vec<f64>,
    pub theta_cur: Complex64,
    pub res_norm: f64,
}

impl SubspaceState {
    /// Starts a one-dimensional subspace from the unit vector `v1`.
    /// Consumes one matrix product.
    pub fn seed(a: &CsrMatrix, v1: Vec<f64>, counter: &mut MatvecCounter) -> Result<Self> {
        if v1.len() != a.n() {
            return Err(Error::DimensionMismatch(format!(
                "seed vector has length {}, matrix order is {}",
                v1.len(),
                a.n()
            )));
        }
        let w1 = a.matvec(&v1, counter);
        // Explicit Rayleigh quotient: dividing by ‖v₁‖² (1 up to round-off)
        // keeps exactly-invariant seeds, e.g. the identity matrix, exact.
        let h11 = dot(&v1, &w1) / dot(&v1, &v1);
        let g11 = dot(&w1, &w1);
        let mut v = DenseMat::with_rows(a.n());
        v.push_col(v1.clone())?;
        let mut w = DenseMat::with_rows(a.n());
        w.push_col(w1)?;
        let mut state = SubspaceState {
            v,
            w,
            h: DenseMat::from_fn(1, 1, |_, _| h11),
            wtw: DenseMat::from_fn(1, 1, |_, _| g11),
            wtv: DenseMat::from_fn(1, 1, |_, _| h11),
            ritz: EigenPairSet {
                values: Vec::new(),
                vectors: Vec::new(),
            },
            x_cur: v1,
            theta_cur: Complex64::new(0.0, 0.0),
            res_norm: 0.0,
        };
        state.refresh_ritz()?;
        Ok(state)
    }

    pub fn k(&self) -> usize {
        self.v.cols()
    }

    /// Orthonormalizes `z` against the basis, appends it, updates the small
    /// matrices incrementally, and refreshes the Ritz data.
    /// Consumes one matrix product.
    pub fn extend(&mut self, a: &CsrMatrix, z: &[f64], counter: &mut MatvecCounter) -> Result<()> {
        let (v_new, _) = mgs_orthonormalize(&self.v, z)?;
        let w_new = a.matvec(&v_new, counter);
        let ko = self.k();
        let a_vec: Vec<f64> = (0..ko).map(|i| dot(self.v.col(i), &w_new)).collect();
        let b_vec: Vec<f64> = (0..ko).map(|j| dot(&v_new, self.w.col(j))).collect();
        let c_vec: Vec<f64> = (0..ko).map(|i| dot(self.w.col(i), &w_new)).collect();
        let delta = dot(&v_new, &w_new);
        let gamma = dot(&w_new, &w_new);
        let (h, wtw, wtv) = (&self.h, &self.wtw, &self.wtv);
        self.h = DenseMat::from_fn(ko + 1, ko + 1, |i, j| match (i < ko, j < ko) {
            (true, true) => h[(i, j)],
            (true, false) => a_vec[i],
            (false, true) => b_vec[j],
            (false, false) => delta,
        });
        self.wtw = DenseMat::from_fn(ko + 1, ko + 1, |i, j| match (i < ko, j < ko) {
            (true, true) => wtw[(i, j)],
            (true, false) => c_vec[i],
            (false, true) => c_vec[j],
            (false, false) => gamma,
        });
        self.wtv = DenseMat::from_fn(ko + 1, ko + 1, |i, j| match (i < ko, j < ko) {
            (true, true) => wtv[(i, j)],
            (true, false) => b_vec[i],
            (false, true) => a_vec[j],
            (false, false) => delta,
        });
        self.v.push_col(v_new)?;
        self.w.push_col(w_new)?;
        self.refresh_ritz()
    }

    /// Recomputes eigenpairs of `H`, the rightmost Ritz pair, the lifted
    /// real vector, and the true residual `‖W y - θ V y‖`.
    fn refresh_ritz(&mut self) -> Result<()> {
        self.ritz = eig_real(&self.h)?;
        let theta = self.ritz.values[0];
        let y = &self.ritz.vectors[0];
        let vy = self.v.matvec_complex(y);
        let wy = self.w.matvec_complex(y);
        let mut res2 = 0.0;
        for i in 0..vy.len() {
            res2 += (wy[i] - theta * vy[i]).norm_sqr();
        }
        let x = real_unit(&vy).ok_or(Error::SubspaceExhausted)?;
        self.theta_cur = theta;
        self.res_norm = res2.sqrt();
        self.x_cur = x;
        Ok(())
    }
}

/// Real part of a complex vector, unit-normalized; `None` if it vanishes.
fn real_unit(z: &[Complex64]) -> Option<Vec<f64>> {
    let mut x: Vec<f64> = z.iter().map(|c| c.re).collect();
    if normalize(&mut x) == 0.0 {
        None
    } else {
        Some(x)
    }
}

/// Combination coefficients for the current subspace, unit-normalized.
pub fn select_s(strategy: &SStrategy, state: &SubspaceState) -> Result<Vec<f64>> {
    let k = state.k();
    match strategy {
        SStrategy::LastVector => {
            let mut s = vec![0.0; k];
            s[k - 1] = 1.0;
            Ok(s)
        }
        SStrategy::Weighted(beta) => {
            let mut s: Vec<f64> = (0..k).map(|j| beta.powi((k - 1 - j) as i32)).collect();
            normalize(&mut s);
            Ok(s)
        }
        SStrategy::RitzVector => {
            real_unit(&state.ritz.vectors[0]).ok_or(Error::SubspaceExhausted)
        }
        SStrategy::Refined => refined_s(&state.wtw, &state.wtv, state.theta_cur).map(|(s, _)| s),
    }
}

fn converged(res: f64, res0: f64, tol: f64) -> bool {
    res <= tol * res0
}

fn perturb(x: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut p = x.to_vec();
    for e in p.iter_mut() {
        *e += PERTURB_REL * rng.gen_range(-1.0..1.0);
    }
    normalize(&mut p);
    p
}

struct Recorder {
    history: Vec<RunRecord>,
    started: Instant,
    best: Option<(f64, Complex64, Vec<f64>)>,
}

impl Recorder {
    fn new() -> Self {
        Recorder {
            history: Vec::new(),
            started: Instant::now(),
            best: None,
        }
    }

    fn push(
        &mut self,
        theta: Complex64,
        res_norm: f64,
        x: &[f64],
        counter: &MatvecCounter,
        restarted: bool,
        filter_used: FilterUsed,
    ) {
        let step = self.history.len();
        self.history.push(RunRecord {
            step,
            theta,
            res_norm,
            mv_total: counter.count(),
            elapsed_s: self.started.elapsed().as_secs_f64(),
            restarted,
            filter_used,
        });
        if self.best.as_ref().map_or(true, |(r, _, _)| res_norm < *r) {
            self.best = Some((res_norm, theta, x.to_vec()));
        }
    }

    fn finish(self, converged: bool, res0: f64) -> SolveResult {
        let (_, eigenvalue, eigenvector) = self
            .best
            .expect("at least one step is always recorded");
        SolveResult {
            eigenvalue,
            eigenvector,
            history: self.history,
            converged,
            initial_resnorm: res0,
        }
    }
}

/// Builds the filter for this step from Ritz values (`values[0]` is the
/// target, the rest are damped). `None` means no usable separation: fall
/// back to `p(λ) = λ`.
fn step_filter(
    values: &[Complex64],
    theta: Complex64,
    m: usize,
    zeta_fraction: f64,
) -> Result<Option<FilterSpec>> {
    if values.len() < 2 {
        return Ok(None);
    }
    match determine_ellipse(&values[1..], theta, zeta_fraction) {
        Ok((ellipse, _)) => Ok(Some(FilterSpec {
            ellipse,
            m,
            lambda_ref: theta.re,
        })),
        Err(Error::NoSeparation { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Per-cycle calibration: short Arnoldi warmup from the cycle seed, then an
/// ellipse from its Ritz values. Consumes one product per warmup step.
fn frozen_filter(
    a: &CsrMatrix,
    v1: &[f64],
    cfg: &SolverConfig,
    counter: &mut MatvecCounter,
) -> Result<Option<FilterSpec>> {
    let steps = cfg.arnoldi_warmup.min(a.n());
    let ar = arnoldi(a, v1, steps, counter)?;
    let ritz = eig_real(&ar.hess)?;
    step_filter(&ritz.values, ritz.values[0], cfg.m, cfg.zeta_fraction)
}

/// Hands the state behind the newest history row to the observer.
fn observe(probe: &mut dyn FnMut(StepView), state: &SubspaceState) {
    probe(StepView {
        basis: &state.v,
        combo: &state.ritz.vectors[0],
        theta: state.theta_cur,
        res_norm: state.res_norm,
    });
}

/// Shared outer loop for the subspace methods (everything except
/// [`Method::Ac`]).
fn krylov_engine(
    a: &CsrMatrix,
    cfg: &SolverConfig,
    v0: &[f64],
    probe: &mut dyn FnMut(StepView),
) -> Result<SolveResult> {
    cfg.validate()?;
    let n = a.n();
    if v0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "start vector has length {}, matrix order is {n}",
            v0.len()
        )));
    }
    let mut v1 = v0.to_vec();
    if normalize(&mut v1) == 0.0 {
        return Err(Error::Config("start vector is zero".into()));
    }
    let mut counter = MatvecCounter::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rec = Recorder::new();
    // Per-cycle filter cache: `None` until calibrated for the current cycle.
    let mut frozen: Option<Option<FilterSpec>> = None;

    let mut state = SubspaceState::seed(a, v1, &mut counter)?;
    let res0 = state.res_norm;
    rec.push(
        state.theta_cur,
        state.res_norm,
        &state.x_cur,
        &counter,
        false,
        FilterUsed::None,
    );
    observe(probe, &state);
    if converged(state.res_norm, res0, cfg.tol) {
        return Ok(rec.finish(true, res0));
    }

    loop {
        if rec.history.len() >= cfg.max_outer {
            return Ok(rec.finish(false, res0));
        }
        if state.k() == cfg.n_r - 1 {
            // Scheduled restart: re-seed from the current approximation.
            let x = state.x_cur.clone();
            frozen = None;
            state = SubspaceState::seed(a, x, &mut counter)?;
            rec.push(
                state.theta_cur,
                state.res_norm,
                &state.x_cur,
                &counter,
                true,
                FilterUsed::None,
            );
            observe(probe, &state);
            if converged(state.res_norm, res0, cfg.tol) {
                return Ok(rec.finish(true, res0));
            }
            continue;
        }

        let s = match select_s(&cfg.s_strategy, &state) {
            Ok(s) => s,
            Err(Error::SubspaceExhausted) | Err(Error::DimensionMismatch(_)) => {
                // No usable direction: perturbed re-seed.
                let p = perturb(&state.x_cur, &mut rng);
                frozen = None;
                state = SubspaceState::seed(a, p, &mut counter)?;
                rec.push(
                    state.theta_cur,
                    state.res_norm,
                    &state.x_cur,
                    &counter,
                    true,
                    FilterUsed::None,
                );
                observe(probe, &state);
                if converged(state.res_norm, res0, cfg.tol) {
                    return Ok(rec.finish(true, res0));
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let vs = state.v.matvec(&s);

        // Choose the polynomial: the first extension of a subspace always
        // uses p(λ) = λ; afterwards the policy decides.
        let spec = if state.k() == 1 {
            None
        } else {
            match cfg.filter_policy {
                FilterPolicy::DynamicEveryStep => step_filter(
                    &state.ritz.values,
                    state.theta_cur,
                    cfg.m,
                    cfg.zeta_fraction,
                )?,
                FilterPolicy::FrozenPerCycle => {
                    if frozen.is_none() {
                        frozen = Some(frozen_filter(a, state.v.col(0), cfg, &mut counter)?);
                    }
                    frozen.unwrap()
                }
            }
        };
        let (z, filter_used) = match spec {
            Some(f) => (
                chebyshev_apply(a, &f, &vs, &mut counter)?,
                FilterUsed::Chebyshev {
                    d: f.ellipse.d,
                    a_mod: f.ellipse.a_mod,
                    m: f.m,
                },
            ),
            None => (a.matvec(&vs, &mut counter), FilterUsed::Lambda),
        };

        match state.extend(a, &z, &mut counter) {
            Ok(()) => {
                rec.push(
                    state.theta_cur,
                    state.res_norm,
                    &state.x_cur,
                    &counter,
                    false,
                    filter_used,
                );
                observe(probe, &state);
                if converged(state.res_norm, res0, cfg.tol) {
                    return Ok(rec.finish(true, res0));
                }
            }
            Err(Error::SubspaceExhausted) => {
                // The filtered vector lay in the span: perturbed re-seed.
                // The spent filter products are carried by this restart row.
                let p = perturb(&state.x_cur, &mut rng);
                frozen = None;
                state = SubspaceState::seed(a, p, &mut counter)?;
                rec.push(
                    state.theta_cur,
                    state.res_norm,
                    &state.x_cur,
                    &counter,
                    true,
                    filter_used,
                );
                observe(probe, &state);
                if converged(state.res_norm, res0, cfg.tol) {
                    return Ok(rec.finish(true, res0));
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Relaxed filtered Krylov iteration with the configured combination
/// strategy and filter policy.
pub fn rfks_solve(a: &CsrMatrix, cfg: &SolverConfig, v0: &[f64]) -> Result<SolveResult> {
    if cfg.method == Method::Ac {
        return Err(Error::Config(
            "Arnoldi–Chebyshev runs through ac_solve".into(),
        ));
    }
    krylov_engine(a, cfg, v0, &mut |_| {})
}

/// Fixed-combination specialization: always filters the newest basis vector
/// with a per-cycle frozen filter. Shares the engine, so a matching relaxed
/// run reproduces it exactly.
pub fn fks_solve(a: &CsrMatrix, cfg: &SolverConfig, v0: &[f64]) -> Result<SolveResult> {
    krylov_engine(a, &fks_config(cfg), v0, &mut |_| {})
}

fn fks_config(cfg: &SolverConfig) -> SolverConfig {
    let mut c = cfg.clone();
    c.method = Method::Fks;
    c.s_strategy = SStrategy::LastVector;
    c.filter_policy = FilterPolicy::FrozenPerCycle;
    c
}

/// Chebyshev–Davidson style variant: filters the lifted Ritz vector with a
/// per-step ellipse.
pub fn cd_solve(a: &CsrMatrix, cfg: &SolverConfig, v0: &[f64]) -> Result<SolveResult> {
    krylov_engine(a, &cd_config(cfg), v0, &mut |_| {})
}

fn cd_config(cfg: &SolverConfig) -> SolverConfig {
    let mut c = cfg.clone();
    c.method = Method::Cd;
    c.s_strategy = SStrategy::RitzVector;
    c.filter_policy = FilterPolicy::DynamicEveryStep;
    c
}

/// Restarted Arnoldi–Chebyshev baseline: `n_r`-step Arnoldi cycles, each
/// followed by a degree-`m` filter of the lifted Ritz vector. One history
/// row per cycle; products per full cycle are exactly `n_r + m`.
pub fn ac_solve(a: &CsrMatrix, cfg: &SolverConfig, v0: &[f64]) -> Result<SolveResult> {
    ac_engine(a, cfg, v0, &mut |_| {})
}

fn ac_engine(
    a: &CsrMatrix,
    cfg: &SolverConfig,
    v0: &[f64],
    probe: &mut dyn FnMut(StepView),
) -> Result<SolveResult> {
    cfg.validate()?;
    let n = a.n();
    if v0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "start vector has length {}, matrix order is {n}",
            v0.len()
        )));
    }
    let mut v = v0.to_vec();
    if normalize(&mut v) == 0.0 {
        return Err(Error::Config("start vector is zero".into()));
    }
    let steps = cfg.n_r.min(n);
    let mut counter = MatvecCounter::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rec = Recorder::new();
    let mut res0: Option<f64> = None;

    loop {
        if rec.history.len() >= cfg.max_outer {
            return Ok(rec.finish(false, res0.unwrap_or(0.0)));
        }
        let ar = arnoldi(a, &v, steps, &mut counter)?;
        let j = ar.basis.cols();
        let ritz = eig_real(&ar.hess)?;
        let theta = ritz.values[0];
        let y = &ritz.vectors[0];
        // Residual via the Arnoldi relation:
        // ‖A(Vy) - θ(Vy)‖² = ‖Hy - θy‖² + (h_{j+1,j} |y_j|)².
        let hy = ar.hess.matvec_complex(y);
        let mut r2 = 0.0;
        for i in 0..j {
            r2 += (hy[i] - theta * y[i]).norm_sqr();
        }
        if let Some((_, h_next)) = &ar.next {
            r2 += (h_next * y[j - 1].norm()).powi(2);
        }
        let res = r2.sqrt();
        if res0.is_none() {
            // Seed residual ‖Av₀ - θ₀v₀‖ read off the factorization:
            // the first subdiagonal entry (zero on immediate breakdown).
            res0 = Some(if j >= 2 {
                ar.hess[(1, 0)]
            } else {
                ar.next.as_ref().map_or(0.0, |(_, h)| *h)
            });
        }
        let r0 = res0.unwrap();

        let vy = ar.basis.matvec_complex(y);
        let x = match real_unit(&vy) {
            Some(x) => x,
            None => perturb(ar.basis.col(0), &mut rng),
        };

        // Filter before recording so each cycle costs exactly n_r + m
        // products; without separation fall back to normalized power steps.
        let (z, filter_used) = match step_filter(&ritz.values, theta, cfg.m, cfg.zeta_fraction)? {
            Some(f) => (
                chebyshev_apply(a, &f, &x, &mut counter)?,
                FilterUsed::Chebyshev {
                    d: f.ellipse.d,
                    a_mod: f.ellipse.a_mod,
                    m: f.m,
                },
            ),
            None => {
                let mut z = x.clone();
                for _ in 0..cfg.m {
                    z = a.matvec(&z, &mut counter);
                    if normalize(&mut z) == 0.0 {
                        z = perturb(&x, &mut rng);
                    }
                }
                (z, FilterUsed::Power { m: cfg.m })
            }
        };

        let restarted = !rec.history.is_empty();
        rec.push(theta, res, &x, &counter, restarted, filter_used);
        probe(StepView {
            basis: &ar.basis,
            combo: y,
            theta,
            res_norm: res,
        });
        if converged(res, r0, cfg.tol) {
            return Ok(rec.finish(true, r0));
        }
        let mut next = z;
        if normalize(&mut next) == 0.0 {
            next = perturb(&x, &mut rng);
        }
        v = next;
    }
}

/// Dispatches on `cfg.method`.
pub fn solve(a: &CsrMatrix, cfg: &SolverConfig, v0: &[f64]) -> Result<SolveResult> {
    match cfg.method {
        Method::Rfks => rfks_solve(a, cfg, v0),
        Method::Fks => fks_solve(a, cfg, v0),
        Method::Cd => cd_solve(a, cfg, v0),
        Method::Ac => ac_solve(a, cfg, v0),
    }
}

/// [`solve`] with an observer that receives a [`StepView`] right after each
/// history row is recorded. The observer is read-only: probed runs follow
/// the exact trajectory and product counts of unprobed ones.
pub fn solve_probed(
    a: &CsrMatrix,
    cfg: &SolverConfig,
    v0: &[f64],
    probe: &mut dyn FnMut(StepView),
) -> Result<SolveResult> {
    match cfg.method {
        Method::Rfks => krylov_engine(a, cfg, v0, probe),
        Method::Fks => krylov_engine(a, &fks_config(cfg), v0, probe),
        Method::Cd => krylov_engine(a, &cd_config(cfg), v0, probe),
        Method::Ac => ac_engine(a, cfg, v0, probe),
    }
}
