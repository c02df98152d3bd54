use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix, used for coarse problems and oracles.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_cols);
        for r in 0..self.n_rows {
            let row = &self.data[r * self.n_cols..(r + 1) * self.n_cols];
            out[r] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn infinity_norm(&self) -> f64 {
        (0..self.n_rows)
            .map(|r| {
                self.data[r * self.n_cols..(r + 1) * self.n_cols]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.n_cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.n_cols + c]
    }
}

/// LU factorization with partial pivoting of a square dense matrix.
#[derive(Clone, Debug)]
pub struct DenseLu {
    n: usize,
    /// Packed L (unit diagonal, below) and U (on and above the diagonal).
    lu: Vec<f64>,
    /// Row permutation: factored row `r` came from input row `perm[r]`.
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn factor(a: &DenseMatrix) -> Result<DenseLu> {
        if a.n_rows != a.n_cols {
            return Err(Error::DimensionMismatch {
                context: "dense LU",
                expected: a.n_rows,
                got: a.n_cols,
            });
        }
        let n = a.n_rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = 1e-14 * a.infinity_norm();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for r in k + 1..n {
                let v = lu[r * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= threshold {
                return Err(Error::SingularMatrix { subdomain: None });
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for r in k + 1..n {
                let m = lu[r * n + k] / pivot;
                lu[r * n + k] = m;
                for c in k + 1..n {
                    lu[r * n + c] -= m * lu[k * n + c];
                }
            }
        }
        Ok(DenseLu { n, lu, perm })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64], out: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        for r in 0..n {
            out[r] = b[self.perm[r]];
        }
        for r in 1..n {
            let mut s = out[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * out[c];
            }
            out[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = out[r];
            for c in r + 1..n {
                s -= self.lu[r * n + c] * out[c];
            }
            out[r] = s / self.lu[r * n + r];
        }
    }

    pub fn solve_alloc(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.solve(b, &mut out);
        out
    }
}

/// One-shot dense solve.
pub fn dense_lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(DenseLu::factor(a)?.solve_alloc(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let mut a = DenseMatrix::zeros(3, 3);
        for i in 0..3 {
            a[(i, i)] = 1.0;
        }
        let x = dense_lu_solve(&a, &[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn diagonal_solve() {
        let mut a = DenseMatrix::zeros(2, 2);
        a[(0, 0)] = 2.0;
        a[(1, 1)] = 4.0;
        let x = dense_lu_solve(&a, &[2.0, 4.0]).unwrap();
        assert_eq!(x, vec![1.0, 1.0]);
    }

    #[test]
    fn singular_detected() {
        let mut a = DenseMatrix::zeros(2, 2);
        a[(0, 0)] = 1.0;
        a[(0, 1)] = 2.0;
        a[(1, 0)] = 2.0;
        a[(1, 1)] = 4.0;
        assert!(matches!(
            DenseLu::factor(&a),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn random_solve_matches_textbook_elimination() {
        // Oracle: Gaussian elimination with partial pivoting, written out
        // independently of DenseLu.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 24;
        let mut a = DenseMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                a[(r, c)] = rng.gen_range(-1.0..1.0);
            }
            a[(r, r)] += n as f64; // diagonally dominant
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let mut aug: Vec<Vec<f64>> = (0..n)
            .map(|r| {
                let mut row: Vec<f64> = (0..n).map(|c| a[(r, c)]).collect();
                row.push(b[r]);
                row
            })
            .collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| aug[i][k].abs().partial_cmp(&aug[j][k].abs()).unwrap())
                .unwrap();
            aug.swap(k, p);
            for r in k + 1..n {
                let m = aug[r][k] / aug[k][k];
                for c in k..=n {
                    aug[r][c] -= m * aug[k][c];
                }
            }
        }
        let mut expected = vec![0.0; n];
        for r in (0..n).rev() {
            let mut s = aug[r][n];
            for c in r + 1..n {
                s -= aug[r][c] * expected[c];
            }
            expected[r] = s / aug[r][r];
        }

        let x = dense_lu_solve(&a, &b).unwrap();
        for i in 0..n {
            assert!((x[i] - expected[i]).abs() <= 1e-10 * (1.0 + expected[i].abs()));
        }
    }
}
