//! Self-contained dense eigensolver for the small projected matrices the
//! subspace methods produce every step.
//!
//! [`eig_real`] handles general real square matrices: Householder reduction
//! to Hessenberg form with an accumulated orthogonal `Q`, Francis
//! double-shift QR in real arithmetic for the eigenvalues, then one complex
//! inverse-iteration solve per eigenvalue on the *preserved* Hessenberg
//! matrix, lifted back through `Q`. Complex eigenvalues come out in exact
//! (bitwise) conjugate pairs because the second vector of a pair is the
//! conjugate of the first rather than a separate solve.
//!
//! [`hermitian_smallest_eigvec`] (cyclic Jacobi, with complex Hermitian input
//! handled through the real symmetric embedding `[[S, -K], [K, S]]`) backs
//! [`refined_s`], the minimizer of `||(A - θI) V s||` over unit `s` used for
//! refined Ritz extraction.

use crate::dense::{norm2, norm2_complex, DenseMat};
use crate::{Complex64, Error, Result};

/// QR sweeps allowed per eigenvalue, as a multiple of the matrix dimension.
const QR_SWEEPS_PER_DIM: usize = 30;

/// Inverse-iteration refinements per eigenvector.
const MAX_INVERSE_ITERS: usize = 5;

/// Target for the per-pair residual `||H y - θ y||`, relative to `||H||_F`.
const EIGVEC_RESIDUAL_REL: f64 = 1e-12;

/// All eigenpairs of a real square matrix, sorted by decreasing real part
/// (ties: decreasing imaginary part, then original deflation index).
#[derive(Debug, Clone)]
pub struct EigenPairSet {
    pub values: Vec<Complex64>,
    /// Unit eigenvectors, one per value; the entry of largest modulus is made
    /// real and positive, so real eigenvalues get real vectors.
    pub vectors: Vec<Vec<Complex64>>,
}

impl EigenPairSet {
    /// The rightmost pair (first after sorting).
    pub fn rightmost(&self) -> (Complex64, &[Complex64]) {
        (self.values[0], &self.vectors[0])
    }
}

/// Householder reduction `A = Q H Q^T`; returns `(H, Q)`.
fn hessenberg_reduce(a: &DenseMat) -> (DenseMat, DenseMat) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = DenseMat::identity(n);
    if n < 3 {
        return (h, q);
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        // Householder vector for column k, rows k+1..n
        let mut scale = 0.0;
        for i in k + 1..n {
            scale += h[(i, k)].abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut sigma = 0.0;
        for i in k + 2..n {
            v[i] = h[(i, k)] / scale;
            sigma += v[i] * v[i];
        }
        let x0 = h[(k + 1, k)] / scale;
        if sigma == 0.0 {
            continue; // already in Hessenberg form at this column
        }
        let mu = (x0 * x0 + sigma).sqrt();
        let v0 = if x0 <= 0.0 { x0 - mu } else { -sigma / (x0 + mu) };
        let beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
        v[k + 1] = 1.0;
        for i in k + 2..n {
            v[i] /= v0;
        }
        // H <- P H P,  Q <- Q P  with  P = I - beta v v^T  (v supported on k+1..n)
        for j in k..n {
            let mut s = 0.0;
            for i in k + 1..n {
                s += v[i] * h[(i, j)];
            }
            s *= beta;
            for i in k + 1..n {
                h[(i, j)] -= s * v[i];
            }
        }
        for i in 0..n {
            let mut s = 0.0;
            for j in k + 1..n {
                s += h[(i, j)] * v[j];
            }
            s *= beta;
            for j in k + 1..n {
                h[(i, j)] -= s * v[j];
            }
        }
        for i in 0..n {
            let mut s = 0.0;
            for j in k + 1..n {
                s += q[(i, j)] * v[j];
            }
            s *= beta;
            for j in k + 1..n {
                q[(i, j)] -= s * v[j];
            }
        }
        // the reflection zeroes these exactly
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    (h, q)
}

/// Francis double-shift QR, eigenvalues only. `h` is destroyed. Values land
/// in deflation slots `0..n`, complex pairs adjacent with `+Im` first.
fn francis_values(h: &mut DenseMat) -> Result<Vec<Complex64>> {
    let nn = h.rows();
    let mut values = vec![Complex64::new(0.0, 0.0); nn];
    if nn == 0 {
        return Ok(values);
    }
    let eps = f64::EPSILON;
    let max_iter = QR_SWEEPS_PER_DIM * nn.max(1);
    let idx = |i: isize, j: isize| (i as usize, j as usize);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z, mut w, mut x, mut y);
    let mut iter = 0usize;

    while n >= 0 {
        // find the start of the active block
        let mut l = n;
        while l > 0 {
            s = h[idx(l - 1, l - 1)].abs() + h[idx(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[idx(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // single real eigenvalue
            let v = h[idx(n, n)] + exshift;
            h[idx(n, n)] = v;
            values[n as usize] = Complex64::new(v, 0.0);
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // 2x2 block: real or complex pair
            w = h[idx(n, n - 1)] * h[idx(n - 1, n)];
            p = (h[idx(n - 1, n - 1)] - h[idx(n, n)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[idx(n, n)] += exshift;
            h[idx(n - 1, n - 1)] += exshift;
            x = h[idx(n, n)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                values[(n - 1) as usize] = Complex64::new(x + z, 0.0);
                values[n as usize] = if z != 0.0 {
                    Complex64::new(x - w / z, 0.0)
                } else {
                    values[(n - 1) as usize]
                };
            } else {
                values[(n - 1) as usize] = Complex64::new(x + p, z);
                values[n as usize] = Complex64::new(x + p, -z);
            }
            n -= 2;
            iter = 0;
        } else {
            // Wilkinson double shift, with an exceptional shift every 10 sweeps
            x = h[idx(n, n)];
            y = h[idx(n - 1, n - 1)];
            w = h[idx(n, n - 1)] * h[idx(n - 1, n)];
            if iter > 0 && iter % 10 == 0 {
                exshift += x;
                for i in l..=n {
                    h[idx(i, i)] -= x;
                }
                s = h[idx(n, n - 1)].abs() + h[idx(n - 1, n - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            iter += 1;
            if iter > max_iter {
                return Err(Error::EigFailed { dim: nn, index: n as usize });
            }

            // two consecutive small subdiagonals let the sweep start mid-block
            let mut m = n - 2;
            loop {
                z = h[idx(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[idx(m + 1, m)] + h[idx(m, m + 1)];
                q = h[idx(m + 1, m + 1)] - z - r - s;
                r = h[idx(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[idx(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (h[idx(m - 1, m - 1)].abs() + z.abs() + h[idx(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=n {
                h[idx(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[idx(i, i - 3)] = 0.0;
                }
            }

            // double QR sweep over rows m..n
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = h[idx(k, k - 1)];
                    q = h[idx(k + 1, k - 1)];
                    r = if notlast { h[idx(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[idx(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[idx(k, k - 1)] = -h[idx(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn as isize {
                        p = h[idx(k, j)] + q * h[idx(k + 1, j)];
                        if notlast {
                            p += r * h[idx(k + 2, j)];
                            h[idx(k + 2, j)] -= p * z;
                        }
                        h[idx(k, j)] -= p * x;
                        h[idx(k + 1, j)] -= p * y;
                    }
                    let upper = n.min(k + 3);
                    for i in 0..=upper {
                        p = x * h[idx(i, k)] + y * h[idx(i, k + 1)];
                        if notlast {
                            p += z * h[idx(i, k + 2)];
                            h[idx(i, k + 2)] -= p * r;
                        }
                        h[idx(i, k)] -= p;
                        h[idx(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }
    Ok(values)
}

/// One inverse-iteration eigenvector of the Hessenberg matrix `h0` for the
/// (converged) shift `theta`. Partial-pivoted Hessenberg LU; near-singular
/// pivots — expected, the shift is an eigenvalue — are floored.
fn hess_inverse_iteration(
    h0: &DenseMat,
    theta: Complex64,
    norm_h: f64,
    seed_index: usize,
) -> Vec<Complex64> {
    let n = h0.rows();
    let tiny = f64::EPSILON * (1.0 + norm_h);

    // factor B = h0 - theta I = P L U once
    let mut u = vec![Complex64::new(0.0, 0.0); n * n]; // row-major
    for i in 0..n {
        for j in 0..n {
            u[i * n + j] = Complex64::new(h0[(i, j)], 0.0);
        }
        u[i * n + i] -= theta;
    }
    let mut lower = vec![Complex64::new(0.0, 0.0); n]; // multiplier per column
    let mut swapped = vec![false; n];
    for j in 0..n.saturating_sub(1) {
        if u[(j + 1) * n + j].norm() > u[j * n + j].norm() {
            swapped[j] = true;
            for col in j..n {
                u.swap(j * n + col, (j + 1) * n + col);
            }
        }
        let mut pivot = u[j * n + j];
        if pivot.norm() < tiny {
            pivot = Complex64::new(tiny, 0.0);
            u[j * n + j] = pivot;
        }
        let mult = u[(j + 1) * n + j] / pivot;
        lower[j] = mult;
        for col in j + 1..n {
            let above = u[j * n + col];
            u[(j + 1) * n + col] -= mult * above;
        }
        u[(j + 1) * n + j] = Complex64::new(0.0, 0.0);
    }
    if n > 0 && u[(n - 1) * n + (n - 1)].norm() < tiny {
        u[(n - 1) * n + (n - 1)] = Complex64::new(tiny, 0.0);
    }

    let solve = |b: &[Complex64]| -> Vec<Complex64> {
        let mut x = b.to_vec();
        for j in 0..n.saturating_sub(1) {
            if swapped[j] {
                x.swap(j, j + 1);
            }
            let xj = x[j];
            x[j + 1] -= lower[j] * xj;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for col in i + 1..n {
                acc -= u[i * n + col] * x[col];
            }
            x[i] = acc / u[i * n + i];
        }
        x
    };

    // deterministic start, varied per eigenvalue index to split multiples
    let mut b: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(1.0 + 0.25 * (((seed_index + 1) * (j + 1)) as f64).sin(), 0.0))
        .collect();
    let bn = norm2_complex(&b);
    for v in b.iter_mut() {
        *v /= bn;
    }

    let residual = |v: &[Complex64]| -> f64 {
        let hv = h0.matvec_complex(v);
        hv.iter()
            .zip(v)
            .map(|(a, b)| (a - theta * b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };

    let mut best = b.clone();
    let mut best_res = f64::INFINITY;
    for _ in 0..MAX_INVERSE_ITERS {
        let mut x = solve(&b);
        let xn = norm2_complex(&x);
        if !xn.is_finite() || xn == 0.0 {
            break;
        }
        for v in x.iter_mut() {
            *v /= xn;
        }
        let res = residual(&x);
        if res < best_res {
            best_res = res;
            best = x.clone();
        }
        if res <= EIGVEC_RESIDUAL_REL * (1.0 + norm_h) {
            break;
        }
        b = x;
    }
    best
}

/// Makes the largest-modulus entry real and positive (fixes the free phase;
/// the vector is assumed unit).
fn fix_phase(v: &mut [Complex64]) {
    let mut imax = 0;
    let mut best = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best {
            best = m;
            imax = i;
        }
    }
    if best > 0.0 {
        let phase = v[imax].conj() / best;
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// All eigenpairs of a real square matrix. See the module docs for the
/// algorithm; per pair, `||H y - θ y|| <~ 1e-12 ||H||_F` on well-conditioned
/// inputs, and complex conjugate pairs are bitwise exact.
pub fn eig_real(a: &DenseMat) -> Result<EigenPairSet> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "eig_real: {}x{} matrix is not square",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(EigenPairSet { values: vec![], vectors: vec![] });
    }

    let (h0, qmat) = hessenberg_reduce(a);
    let mut work = h0.clone();
    let raw = francis_values(&mut work)?;
    let norm_h = h0.frobenius_norm();

    // eigenvectors: solve for members with Im >= 0, conjugate the partners
    let mut vectors: Vec<Vec<Complex64>> = vec![Vec::new(); n];
    let mut i = 0;
    while i < n {
        if raw[i].im > 0.0 {
            let yh = hess_inverse_iteration(&h0, raw[i], norm_h, i);
            let mut y = qmat.matvec_complex(&yh);
            let yn = norm2_complex(&y);
            for v in y.iter_mut() {
                *v /= yn;
            }
            fix_phase(&mut y);
            let conj: Vec<Complex64> = y.iter().map(|z| z.conj()).collect();
            vectors[i] = y;
            vectors[i + 1] = conj;
            i += 2;
        } else {
            let yh = hess_inverse_iteration(&h0, raw[i], norm_h, i);
            let mut y = qmat.matvec_complex(&yh);
            let yn = norm2_complex(&y);
            for v in y.iter_mut() {
                *v /= yn;
            }
            fix_phase(&mut y);
            vectors[i] = y;
            i += 1;
        }
    }

    // rightmost first; stable sort keeps deflation order as the final tie-break
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&ia, &ib| {
        raw[ib]
            .re
            .total_cmp(&raw[ia].re)
            .then(raw[ib].im.total_cmp(&raw[ia].im))
    });
    let values = order.iter().map(|&k| raw[k]).collect();
    let vectors = order.iter().map(|&k| std::mem::take(&mut vectors[k])).collect();
    Ok(EigenPairSet { values, vectors })
}

/// Cyclic Jacobi for a real symmetric matrix: `(eigenvalues-on-diagonal, V)`
/// with `A V = V diag`.
fn jacobi_symmetric(a: &DenseMat) -> (DenseMat, DenseMat) {
    let n = a.rows();
    let mut a = a.clone();
    let mut v = DenseMat::identity(n);
    let fro = a.frobenius_norm();
    if fro == 0.0 {
        return (a, v);
    }
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if (2.0 * off).sqrt() <= 1e-14 * fro {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let (aip, aiq) = (a[(i, p)], a[(i, q)]);
                        a[(i, p)] = c * aip - s * aiq;
                        a[(i, q)] = s * aip + c * aiq;
                        a[(p, i)] = a[(i, p)];
                        a[(q, i)] = a[(i, q)];
                    }
                }
                for i in 0..n {
                    let (vip, viq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    (a, v)
}

/// Smallest eigenpair of the Hermitian matrix `S + iK` (`S` symmetric, `K`
/// antisymmetric, both real). A real input takes the direct Jacobi path; a
/// genuinely complex one goes through the symmetric embedding
/// `[[S, -K], [K, S]]`, whose doubled spectrum does not disturb the minimum.
pub fn hermitian_smallest_eigvec(
    s_part: &DenseMat,
    k_part: &DenseMat,
) -> Result<(f64, Vec<Complex64>)> {
    let n = s_part.rows();
    if s_part.cols() != n || k_part.rows() != n || k_part.cols() != n {
        return Err(Error::DimensionMismatch(
            "hermitian_smallest_eigvec: parts must be square of equal size".into(),
        ));
    }
    if n == 0 {
        return Err(Error::DimensionMismatch("hermitian_smallest_eigvec: empty matrix".into()));
    }
    let k_zero = (0..n).all(|j| k_part.col(j).iter().all(|&x| x == 0.0));

    if k_zero {
        let (d, v) = jacobi_symmetric(s_part);
        let mut imin = 0;
        for i in 1..n {
            if d[(i, i)] < d[(imin, imin)] {
                imin = i;
            }
        }
        let mut vec: Vec<Complex64> =
            v.col(imin).iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let nrm = norm2_complex(&vec);
        for z in vec.iter_mut() {
            *z /= nrm;
        }
        fix_phase(&mut vec);
        Ok((d[(imin, imin)], vec))
    } else {
        let embed = DenseMat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => s_part[(i, j)],
            (true, false) => -k_part[(i, j - n)],
            (false, true) => k_part[(i - n, j)],
            (false, false) => s_part[(i - n, j - n)],
        });
        let (d, v) = jacobi_symmetric(&embed);
        let mut imin = 0;
        for i in 1..2 * n {
            if d[(i, i)] < d[(imin, imin)] {
                imin = i;
            }
        }
        let col = v.col(imin);
        let mut vec: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(col[i], col[n + i])).collect();
        let nrm = norm2_complex(&vec);
        for z in vec.iter_mut() {
            *z /= nrm;
        }
        fix_phase(&mut vec);
        Ok((d[(imin, imin)], vec))
    }
}

/// Refined combination vector: the unit `s` minimizing `||(A - θI) V s||`,
/// found as the smallest eigenvector of the Hermitian cross-product matrix
///
/// ```text
/// Ĥ = W^T W  -  conj(θ) (W^T V)  -  θ (V^T W)  +  |θ|² I,
/// ```
///
/// assembled from the tracked `W^T W` and `W^T V` (with `V^T W = (W^T V)^T`).
/// Returns `(Re(s) renormalized, σ_min)`.
pub fn refined_s(wtw: &DenseMat, wtv: &DenseMat, theta: Complex64) -> Result<(Vec<f64>, f64)> {
    let k = wtw.rows();
    if wtw.cols() != k || wtv.rows() != k || wtv.cols() != k {
        return Err(Error::DimensionMismatch(
            "refined_s: cross-products must be square of equal size".into(),
        ));
    }
    let abs2 = theta.norm_sqr();
    let s_part = DenseMat::from_fn(k, k, |i, j| {
        let sym = wtv[(i, j)] + wtv[(j, i)];
        wtw[(i, j)] - theta.re * sym + if i == j { abs2 } else { 0.0 }
    });
    let k_part = if theta.im == 0.0 {
        DenseMat::zeros(k, k)
    } else {
        DenseMat::from_fn(k, k, |i, j| theta.im * (wtv[(i, j)] - wtv[(j, i)]))
    };
    let (eig, vec) = hermitian_smallest_eigvec(&s_part, &k_part)?;
    let sigma_min = eig.max(0.0).sqrt();
    let mut s: Vec<f64> = vec.iter().map(|z| z.re).collect();
    let nrm = norm2(&s);
    if nrm == 0.0 {
        return Err(Error::DimensionMismatch(
            "refined_s: real part of the minimizer vanished".into(),
        ));
    }
    for x in s.iter_mut() {
        *x /= nrm;
    }
    Ok((s, sigma_min))
}
