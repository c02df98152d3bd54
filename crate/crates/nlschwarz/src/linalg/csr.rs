use std::io::Write;

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed.
    /// The sort is stable, so the accumulation order of duplicates follows
    /// the input order and results are reproducible.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut row = 0usize;
        for (r, c, v) in triplets {
            debug_assert!(r < n_rows && c < n_cols);
            while row < r {
                row_offsets.push(col_indices.len());
                row += 1;
            }
            if col_indices.len() > *row_offsets.last().unwrap() && *col_indices.last().unwrap() == c
            {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
            }
        }
        while row < n_rows {
            row_offsets.push(col_indices.len());
            row += 1;
        }
        CsrMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[r];
        let hi = self.row_offsets[r + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Entry (r, c), zero if not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// `out = A v`.
    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_cols);
        debug_assert_eq!(out.len(), self.n_rows);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let mut s = 0.0;
            for (&c, &a) in cols.iter().zip(vals) {
                s += a * v[c];
            }
            out[r] = s;
        }
    }

    pub fn matvec_alloc(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        self.matvec(v, &mut out);
        out
    }

    /// `out = A^T v`.
    pub fn matvec_transpose(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_rows);
        debug_assert_eq!(out.len(), self.n_cols);
        out.fill(0.0);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &a) in cols.iter().zip(vals) {
                out[c] += a * v[r];
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.n_cols, self.n_rows, triplets)
    }

    /// Max absolute row sum.
    pub fn infinity_norm(&self) -> f64 {
        (0..self.n_rows)
            .map(|r| self.row(r).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Dense copy, for tests and small coarse problems.
    pub fn to_dense(&self) -> super::DenseMatrix {
        let mut d = super::DenseMatrix::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d[(r, c)] = v;
            }
        }
        d
    }

    /// Coordinate text dump: one `row col value` line per stored entry.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# {} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:.17e}", r, c, v)?;
            }
        }
        Ok(())
    }
}

/// Abstract square operator for matrix-free GMRES.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `out = A v`; both slices have length `dim()`.
    fn apply(&self, v: &[f64], out: &mut [f64]) -> Result<()>;
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n_rows
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if self.n_rows != self.n_cols {
            return Err(Error::DimensionMismatch {
                context: "operator must be square",
                expected: self.n_rows,
                got: self.n_cols,
            });
        }
        self.matvec(v, out);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = CsrMatrix::from_triplets(
            2,
            3,
            vec![(1, 2, 1.0), (0, 1, 2.0), (1, 2, 3.0), (0, 0, -1.0)],
        );
        assert_eq!(a.get(0, 0), -1.0);
        assert_eq!(a.get(0, 1), 2.0);
        assert_eq!(a.get(1, 2), 4.0);
        assert_eq!(a.nnz(), 3);
        let (cols, _) = a.row(0);
        assert_eq!(cols, &[0, 1]);
    }

    #[test]
    fn matvec_and_transpose_agree_with_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut triplets = Vec::new();
        for r in 0..8 {
            for c in 0..6 {
                if rng.gen_bool(0.4) {
                    triplets.push((r, c, rng.gen_range(-2.0..2.0)));
                }
            }
        }
        let a = CsrMatrix::from_triplets(8, 6, triplets);
        let v: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let av = a.matvec_alloc(&v);
        let at = a.transpose();
        let atw = at.matvec_alloc(&w);
        let mut atw2 = vec![0.0; 6];
        a.matvec_transpose(&w, &mut atw2);
        for r in 0..8 {
            let mut s = 0.0;
            for c in 0..6 {
                s += a.get(r, c) * v[c];
            }
            assert!((av[r] - s).abs() < 1e-14);
        }
        for c in 0..6 {
            assert!((atw[c] - atw2[c]).abs() < 1e-15);
        }
    }

    #[test]
    fn operator_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut triplets = Vec::new();
        for r in 0..20 {
            triplets.push((r, r, rng.gen_range(1.0..2.0)));
            if r + 1 < 20 {
                triplets.push((r, r + 1, rng.gen_range(-1.0..1.0)));
            }
        }
        let a = CsrMatrix::from_triplets(20, 20, triplets);
        for _ in 0..20 {
            let u: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (alpha, beta) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let combo: Vec<f64> = u
                .iter()
                .zip(&v)
                .map(|(a_, b_)| alpha * a_ + beta * b_)
                .collect();
            let mut lhs = vec![0.0; 20];
            a.apply(&combo, &mut lhs).unwrap();
            let au = a.matvec_alloc(&u);
            let av = a.matvec_alloc(&v);
            for i in 0..20 {
                let rhs = alpha * au[i] + beta * av[i];
                assert!((lhs[i] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn coordinate_dump_lines() {
        let a = CsrMatrix::identity(3);
        let mut buf = Vec::new();
        a.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().starts_with("0 0 "));
    }
}
