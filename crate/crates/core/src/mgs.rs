//! Modified Gram–Schmidt orthonormalization of a new vector against an
//! orthonormal basis, with one conditional reorthogonalization sweep.

use crate::dense::{axpy, dot, norm2, DenseMat};
use crate::{Error, Result};

/// A second sweep runs when one sweep removed more than this fraction of the
/// vector (the classical 1/sqrt(2) norm-drop test).
const REORTH_TRIGGER: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Candidates whose post-projection norm falls below `BREAKDOWN_REL * ||z||`
/// are declared numerically contained in the subspace.
const BREAKDOWN_REL: f64 = 1e-14;

/// Projects `z` against the (orthonormal) columns of `basis` without
/// normalizing: returns `(h, remainder, remainder_norm, ||z||)` where
/// `z = basis·h + remainder` to working precision. The conditional second
/// sweep folds its corrections into `h`. Useful when the coefficients are
/// needed even for a vector that turns out to lie in the span.
pub fn mgs_project(basis: &DenseMat, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64, f64)> {
    if z.len() != basis.rows() {
        return Err(Error::DimensionMismatch(format!(
            "mgs: vector length {} vs basis rows {}",
            z.len(),
            basis.rows()
        )));
    }
    let norm0 = norm2(z);
    let mut v = z.to_vec();
    let mut h = vec![0.0; basis.cols()];

    let sweep = |v: &mut [f64], h: &mut [f64]| {
        for j in 0..basis.cols() {
            let bj = basis.col(j);
            let c = dot(bj, v);
            h[j] += c;
            axpy(-c, bj, v);
        }
    };

    sweep(&mut v, &mut h);
    if norm2(&v) < REORTH_TRIGGER * norm0 {
        sweep(&mut v, &mut h);
    }

    let norm_final = norm2(&v);
    Ok((h, v, norm_final, norm0))
}

/// Reports whether a post-projection remainder is numerically zero relative
/// to the original vector.
pub fn is_breakdown(remainder_norm: f64, norm0: f64) -> bool {
    remainder_norm <= BREAKDOWN_REL * norm0
}

/// Orthonormalizes `z` against the (orthonormal) columns of `basis`.
///
/// Returns the new unit vector and the projection coefficients
/// `h_i = v_i^T z` accumulated over both sweeps. The second sweep runs only
/// when the first one shrinks the vector below `1/sqrt(2)` of its original
/// norm; a candidate left below `1e-14 * ||z||` is reported as
/// [`Error::SubspaceExhausted`].
pub fn mgs_orthonormalize(basis: &DenseMat, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (h, mut v, norm_final, norm0) = mgs_project(basis, z)?;
    if is_breakdown(norm_final, norm0) {
        return Err(Error::SubspaceExhausted);
    }
    for x in v.iter_mut() {
        *x /= norm_final;
    }
    Ok((v, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonalizes_against_e1() {
        let basis = DenseMat::from_columns(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let (v, h) = mgs_orthonormalize(&basis, &[1.0, 1.0, 0.0]).unwrap();
        assert!((v[0]).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15 && v[2].abs() < 1e-15);
        assert!((h[0] - 1.0).abs() < 1e-15);
        assert!((norm2(&v) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn detects_exhaustion() {
        let basis = DenseMat::from_columns(&[vec![1.0, 0.0]]).unwrap();
        match mgs_orthonormalize(&basis, &[1.0, 0.0]) {
            Err(Error::SubspaceExhausted) => {}
            other => panic!("expected SubspaceExhausted, got {other:?}"),
        }
    }

    #[test]
    fn random_bases_stay_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for &(n, k) in &[(50usize, 10usize), (200, 40), (500, 60)] {
            let mut basis = DenseMat::with_rows(n);
            for _ in 0..k {
                let z: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                let (v, _) = mgs_orthonormalize(&basis, &z).unwrap();
                basis.push_col(v).unwrap();
            }
            assert!(basis.orthonormality_defect() <= 1e-12, "n={n} k={k}");
        }
    }

    #[test]
    fn projection_expands_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let n = 40;
        let mut basis = DenseMat::with_rows(n);
        for _ in 0..8 {
            let z: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let (v, _) = mgs_orthonormalize(&basis, &z).unwrap();
            basis.push_col(v).unwrap();
        }
        let z: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let (h, rem, rem_norm, norm0) = mgs_project(&basis, &z).unwrap();
        assert!(!is_breakdown(rem_norm, norm0));
        // z = basis·h + rem
        for i in 0..n {
            let mut acc = rem[i];
            for j in 0..basis.cols() {
                acc += basis.col(j)[i] * h[j];
            }
            assert!((acc - z[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn reorthogonalization_handles_near_dependence() {
        // e1 plus a tiny independent component: one sweep cancels almost all
        // of the vector, the second sweep restores orthogonality.
        let basis = DenseMat::from_columns(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let (v, _) = mgs_orthonormalize(&basis, &[1.0, 1.0, 1e-9]).unwrap();
        assert!((v[2] - 1.0).abs() < 1e-12);
        assert!(v[0].abs() < 1e-13 && v[1].abs() < 1e-13);
    }
}
