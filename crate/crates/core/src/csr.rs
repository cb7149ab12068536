//! Compressed sparse row storage for the (square, real, non-symmetric)
//! operators the solvers iterate with, plus the matvec counter that underpins
//! every MV statistic reported by the benchmarks.

use crate::dense::DenseMat;
use crate::{Error, Result};

/// Square sparse matrix in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Counts every sparse matrix–vector product. The solvers accept the counter
/// explicitly so that reported MV totals are exact by construction.
#[derive(Debug, Clone, Default)]
pub struct MatvecCounter {
    count: u64,
}

impl MatvecCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn bump(&mut self) {
        self.count += 1;
    }
}

impl CsrMatrix {
    /// Assembles from `(row, col, value)` triplets. Duplicate coordinates are
    /// summed; column indices end up sorted within each row.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= n || c >= n {
                return Err(Error::DimensionMismatch(format!(
                    "triplet ({r}, {c}) outside {n}x{n} matrix"
                )));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut next_row = 0usize;
        for (r, c, v) in sorted {
            if col_idx.last() == Some(&c) && next_row == r + 1 {
                *values.last_mut().unwrap() += v; // duplicate coordinate
                continue;
            }
            while next_row <= r {
                row_ptr[next_row] = col_idx.len();
                next_row += 1;
            }
            col_idx.push(c);
            values.push(v);
        }
        while next_row <= n {
            row_ptr[next_row] = col_idx.len();
            next_row += 1;
        }
        Ok(Self { n, row_ptr, col_idx, values })
    }

    pub fn from_dense(a: &DenseMat) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch(format!(
                "from_dense: {}x{} matrix is not square",
                a.rows(),
                a.cols()
            )));
        }
        let mut t = Vec::new();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.rows(), &t)
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, &t).expect("identity triplets are in range")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `i` as parallel `(columns, values)` slices.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`, counted.
    pub fn matvec(&self, x: &[f64], counter: &mut MatvecCounter) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "matvec shape");
        counter.bump();
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> DenseMat {
        let mut a = DenseMat::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                a[(i, j)] += v;
            }
        }
        a
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_matvec_counts() {
        let a = CsrMatrix::identity(3);
        let mut c = MatvecCounter::new();
        let y = a.matvec(&[1.0, -2.0, 0.5], &mut c);
        assert_eq!(y, vec![1.0, -2.0, 0.5]);
        assert_eq!(c.count(), 1);
    }

    #[test]
    fn duplicates_sum_and_columns_sort() {
        let a = CsrMatrix::from_triplets(
            2,
            &[(0, 1, 2.0), (0, 0, 1.0), (0, 1, 3.0), (1, 1, 4.0)],
        )
        .unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 1), 5.0);
        assert_eq!(a.get(0, 0), 1.0);
        assert_eq!(a.get(1, 0), 0.0);
        let (cols, _) = a.row(0);
        assert_eq!(cols, &[0, 1]);
    }

    #[test]
    fn empty_rows_are_fine() {
        let a = CsrMatrix::from_triplets(4, &[(2, 0, 7.0)]).unwrap();
        let mut c = MatvecCounter::new();
        let y = a.matvec(&[1.0, 1.0, 1.0, 1.0], &mut c);
        assert_eq!(y, vec![0.0, 0.0, 7.0, 0.0]);
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        assert!(CsrMatrix::from_triplets(2, &[(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn matvec_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 5, 40] {
            let mut t = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if rng.gen::<f64>() < 0.3 {
                        t.push((i, j, rng.gen::<f64>() * 2.0 - 1.0));
                    }
                }
            }
            let a = CsrMatrix::from_triplets(n, &t).unwrap();
            let d = a.to_dense();
            let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let mut c = MatvecCounter::new();
            let ys = a.matvec(&x, &mut c);
            let yd = d.matvec(&x);
            let scale = crate::dense::norm2(&yd).max(1.0);
            for i in 0..n {
                assert!((ys[i] - yd[i]).abs() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn dense_round_trip() {
        let a = CsrMatrix::from_triplets(3, &[(0, 0, 1.5), (1, 2, -2.0), (2, 1, 0.25)]).unwrap();
        let back = CsrMatrix::from_dense(&a.to_dense()).unwrap();
        assert_eq!(a, back);
    }
}
