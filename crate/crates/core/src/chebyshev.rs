//! Complex Chebyshev polynomial filters.
//!
//! A filter is the degree-`m` Chebyshev polynomial of an ellipse in the
//! complex plane, normalized at a reference point `λ₁`:
//!
//! ```text
//! p_m(λ) = T_m((λ - d)/c) / T_m((λ₁ - d)/c),
//! T_m(ξ) = (w^m + w^-m)/2,  (w + 1/w)/2 = ξ,  |w| >= 1,
//! ```
//!
//! with `d` the ellipse center and `c` its focal half-distance (real for a
//! "fat" ellipse hugging the real axis, purely imaginary for a "thin" one, so
//! `c²` is a signed real either way). Applied to a matrix, the filter damps
//! every eigenvalue inside the ellipse by roughly `|w_i/w₁|^m` relative to the
//! reference point — the mechanism all the solvers in this crate rely on.
//!
//! Branch conventions matter here: the square root is the *arithmetic* one
//! (positive real part, or non-negative imaginary part on the imaginary
//! axis), and `w` is the modulus-largest of the two roots of its quadratic.
//! [`determine_ellipse`] chooses the damping region adaptively from the
//! currently unwanted Ritz values, degenerating to a circle (`c² = 0`), and
//! [`chebyshev_apply`] evaluates `p_m(A)z` with exactly `m` matvecs through a
//! three-term recurrence that stays well-defined in that limit.

use crate::csr::{CsrMatrix, MatvecCounter};
use crate::dense::axpy;
use crate::{Complex64, Error, Result};

/// Exponent cap: magnitudes beyond `e^700` are reported as out of range
/// rather than silently overflowing to infinity.
const MAX_LOG_MAG: f64 = 700.0;

/// Relative separation below which no damping ellipse can be built.
const SEPARATION_REL: f64 = 1e-12;

/// Relative radius assigned to a degenerate (single-point) damping region.
const DEGENERATE_RADIUS_REL: f64 = 1e-8;

/// Floor for the three-term recurrence denominator.
const RECURRENCE_FLOOR: f64 = 1e-300;

/// Damping region: center `d` on the real axis, signed focal half-distance
/// square `c2` (`> 0` fat, `< 0` thin, `= 0` circle), and the modulus `a_mod`
/// of the major semiaxis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub d: f64,
    pub c2: f64,
    pub a_mod: f64,
}

impl Ellipse {
    /// Semiaxis along the real direction.
    pub fn real_semiaxis(&self) -> f64 {
        if self.c2 >= 0.0 {
            self.a_mod
        } else {
            (self.a_mod * self.a_mod - self.c2.abs()).max(0.0).sqrt()
        }
    }

    /// Semiaxis along the imaginary direction.
    pub fn imag_semiaxis(&self) -> f64 {
        if self.c2 >= 0.0 {
            (self.a_mod * self.a_mod - self.c2).max(0.0).sqrt()
        } else {
            self.a_mod
        }
    }

    /// Whether `z` lies inside or on the ellipse.
    pub fn contains(&self, z: Complex64) -> bool {
        let (rx, ry) = (self.real_semiaxis(), self.imag_semiaxis());
        if rx == 0.0 || ry == 0.0 {
            return (z.re - self.d).abs() <= rx && z.im.abs() <= ry;
        }
        let u = (z.re - self.d) / rx;
        let v = z.im / ry;
        u * u + v * v <= 1.0
    }
}

/// A concrete filter: ellipse, polynomial degree, and the (real) reference
/// point where the filter is normalized to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub ellipse: Ellipse,
    pub m: usize,
    pub lambda_ref: f64,
}

/// Per-eigenvalue damping factors against the a-priori bound of the
/// enclosing ellipse.
#[derive(Debug, Clone)]
pub struct DampingReport {
    pub kappas: Vec<f64>,
    pub kappa_max: f64,
    pub bound: f64,
}

/// Arithmetic square root: `r² = z` with `Re(r) > 0`, or `Re(r) = 0` and
/// `Im(r) >= 0`.
pub fn arithmetic_sqrt(z: Complex64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let t = ((z.norm() + z.re.abs()) / 2.0).sqrt();
    if z.re >= 0.0 {
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        let re = z.im.abs() / (2.0 * t);
        if re == 0.0 {
            // negative real input: force the +i branch regardless of the
            // sign of the zero imaginary part
            Complex64::new(0.0, t)
        } else {
            Complex64::new(re, t.copysign(z.im))
        }
    }
}

/// The modulus-largest root `w` of `(w + 1/w)/2 = ξ`: `ξ + sqrt(ξ² - 1)` when
/// `Re(ξ) > 0` or (`Re(ξ) = 0` and `Im(ξ) >= 0`), else `ξ - sqrt(ξ² - 1)`.
pub fn modulus_largest_root(xi: Complex64) -> Complex64 {
    let r = arithmetic_sqrt(xi * xi - 1.0);
    if xi.re > 0.0 || (xi.re == 0.0 && xi.im >= 0.0) {
        xi + r
    } else {
        xi - r
    }
}

/// `w^p` through the polar form; precondition: `p * ln|w|` under the overflow cap.
fn polar_pow(w: Complex64, p: f64) -> Complex64 {
    let (r, theta) = w.to_polar();
    Complex64::from_polar(r.powf(p), theta * p)
}

/// Complex Chebyshev polynomial `T_m(ξ) = (w^m + w^-m)/2`.
pub fn cheb_t(m: usize, xi: Complex64) -> Result<Complex64> {
    let w = modulus_largest_root(xi);
    let log_mag = m as f64 * w.norm().ln();
    if log_mag > MAX_LOG_MAG {
        return Err(Error::RangeExceeded { m, w_abs: w.norm() });
    }
    Ok((polar_pow(w, m as f64) + polar_pow(w, -(m as f64))) / 2.0)
}

/// Evaluates `p_m(λ) = T_m((λ-d)/c) / T_m((λ₁-d)/c)`, or its `c² -> 0` limit
/// `((λ-d)/(λ₁-d))^m` for a circle.
pub fn filter_value(spec: &FilterSpec, lambda: Complex64) -> Result<Complex64> {
    let d = spec.ellipse.d;
    let m = spec.m as f64;
    if spec.ellipse.c2 == 0.0 {
        let ratio = (lambda - d) / (spec.lambda_ref - d);
        let log_mag = m * ratio.norm().ln();
        if log_mag > MAX_LOG_MAG {
            return Err(Error::RangeExceeded { m: spec.m, w_abs: ratio.norm() });
        }
        return Ok(polar_pow(ratio, m));
    }
    let c = arithmetic_sqrt(Complex64::new(spec.ellipse.c2, 0.0));
    let w = modulus_largest_root((lambda - d) / c);
    let w1 = modulus_largest_root((Complex64::new(spec.lambda_ref - d, 0.0)) / c);
    // (w^m + w^-m)/(w1^m + w1^-m), rearranged so only the modulus ratio is
    // ever raised to the m-th power
    let q = w / w1;
    let log_mag = m * q.norm().ln();
    if log_mag > MAX_LOG_MAG {
        return Err(Error::RangeExceeded { m: spec.m, w_abs: q.norm() });
    }
    let tail = (1.0 + polar_pow(w, -2.0 * m)) / (1.0 + polar_pow(w1, -2.0 * m));
    Ok(polar_pow(q, m) * tail)
}

/// Applies the filter to a vector: `z_m = p_m(A) z0` with exactly `m` counted
/// matvecs, through the scaled three-term recurrence
///
/// ```text
/// ρ₁ = 1/(λ₁-d),              z₁ = ρ₁ (A - dI) z₀,
/// ρ_{k+1} = 1/(2(λ₁-d) - c²ρ_k),
/// z_{k+1} = 2 ρ_{k+1} (A - dI) z_k  -  c² ρ_k ρ_{k+1} z_{k-1},
/// ```
///
/// which is real throughout (`c²` enters, never `c`) and remains well-defined
/// at `c² = 0`, where it degenerates to scaled power iteration with `A - dI`.
pub fn chebyshev_apply(
    a: &CsrMatrix,
    spec: &FilterSpec,
    z0: &[f64],
    counter: &mut MatvecCounter,
) -> Result<Vec<f64>> {
    if z0.len() != a.n() {
        return Err(Error::DimensionMismatch(format!(
            "chebyshev_apply: vector length {} vs matrix dimension {}",
            z0.len(),
            a.n()
        )));
    }
    let d = spec.ellipse.d;
    let c2 = spec.ellipse.c2;
    let gap = spec.lambda_ref - d;
    if gap.abs() <= RECURRENCE_FLOOR {
        return Err(Error::FilterDegenerate { step: 0, denom: gap });
    }

    let shifted = |zk: &[f64], counter: &mut MatvecCounter| {
        let mut w = a.matvec(zk, counter);
        axpy(-d, zk, &mut w);
        w
    };

    let mut rho = 1.0 / gap;
    let mut z_prev = z0.to_vec();
    let mut z_cur = shifted(&z_prev, counter);
    for x in z_cur.iter_mut() {
        *x *= rho;
    }

    for k in 1..spec.m {
        let denom = 2.0 * gap - c2 * rho;
        if denom.abs() <= RECURRENCE_FLOOR {
            return Err(Error::FilterDegenerate { step: k, denom });
        }
        let rho_next = 1.0 / denom;
        let mut z_next = shifted(&z_cur, counter);
        let cross = c2 * rho * rho_next;
        for i in 0..z_next.len() {
            z_next[i] = 2.0 * rho_next * z_next[i] - cross * z_prev[i];
        }
        z_prev = z_cur;
        z_cur = z_next;
        rho = rho_next;
    }
    Ok(z_cur)
}

/// Damping factors `κ_i = |w_i/w₁|` for the supplied eigenvalues under the
/// filter's ellipse, with the a-priori bound
/// `(|a| + sqrt(|a|² + |c|²)) / ||λ₁-d| + sqrt(|λ₁-d|² - |c|²)|`
/// that holds whenever all the values lie inside the ellipse.
pub fn damping_report(unwanted: &[Complex64], spec: &FilterSpec) -> DampingReport {
    let d = spec.ellipse.d;
    let c2 = spec.ellipse.c2;
    let a_mod = spec.ellipse.a_mod;
    let c_abs2 = c2.abs();
    let x1 = (spec.lambda_ref - d).abs();

    let numer = a_mod + (a_mod * a_mod + c_abs2).sqrt();
    let denom =
        (Complex64::new(x1, 0.0) + arithmetic_sqrt(Complex64::new(x1 * x1 - c_abs2, 0.0))).norm();
    let bound = numer / denom;

    let kappas: Vec<f64> = if c2 == 0.0 {
        unwanted.iter().map(|&lam| (lam - d).norm() / x1).collect()
    } else {
        let c = arithmetic_sqrt(Complex64::new(c2, 0.0));
        let w1 = modulus_largest_root(Complex64::new(spec.lambda_ref - d, 0.0) / c).norm();
        unwanted
            .iter()
            .map(|&lam| modulus_largest_root((lam - d) / c).norm() / w1)
            .collect()
    };
    let kappa_max = kappas.iter().fold(0.0f64, |acc, &k| acc.max(k));
    DampingReport { kappas, kappa_max, bound }
}

/// Chooses the damping region for the current step from the unwanted Ritz
/// values and the rightmost Ritz value `θ₁`.
///
/// With `x₊ = max Re`, `x₋ = min Re`, `y₊ = max |Im|` over the unwanted set
/// and the reference abscissa `ζ` (equal to `Re(θ₁)` when `θ₁` is complex,
/// else placed `zeta_fraction` of the way from `x₊` towards `θ₁`), the circle
/// is either the one centered mid-interval (when `y₊² < (ζ-x₊)(ζ-x₋)`) or the
/// one through both `(x₊, y₊)` and `ζ`. Returns the ellipse (always a circle,
/// `c² = 0`) and the predicted damping ratio `κ_u = a/|θ₁ - d|`.
///
/// A point-degenerate region is inflated to a relative radius of `1e-8`;
/// a target not separated from `x₊` is an error.
pub fn determine_ellipse(
    unwanted: &[Complex64],
    theta1: Complex64,
    zeta_fraction: f64,
) -> Result<(Ellipse, f64)> {
    if unwanted.is_empty() {
        return Err(Error::DimensionMismatch("determine_ellipse: empty unwanted set".into()));
    }
    let x_plus = unwanted.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let x_minus = unwanted.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let y_plus = unwanted.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);

    if theta1.re - x_plus <= SEPARATION_REL * (1.0 + x_plus.abs()) {
        return Err(Error::NoSeparation { target: theta1.re, x_plus });
    }
    let zeta = if theta1.im != 0.0 {
        theta1.re
    } else {
        x_plus + zeta_fraction * (theta1.re - x_plus)
    };

    let (d, a) = if y_plus * y_plus < (zeta - x_plus) * (zeta - x_minus) {
        let d = (x_plus + x_minus) / 2.0;
        let dx = x_plus - d;
        (d, (dx * dx + y_plus * y_plus).sqrt())
    } else {
        let d = (zeta * zeta - x_plus * x_plus - y_plus * y_plus) / (2.0 * (zeta - x_plus));
        (d, zeta - d)
    };
    let a = a.max(DEGENERATE_RADIUS_REL * (1.0 + x_plus.abs()));
    let kappa_u = a / (theta1 - d).norm();
    Ok((Ellipse { d, c2: 0.0, a_mod: a }, kappa_u))
}
