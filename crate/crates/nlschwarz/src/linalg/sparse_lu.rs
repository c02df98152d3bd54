use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// Sparse LU factorization of a square CSR matrix.
///
/// Left-looking (Gilbert-Peierls) factorization with partial pivoting, after
/// a minimum-degree column preorder computed on the pattern of `A + A^T`.
/// The factorization is immutable and supports repeated solves.
#[derive(Clone, Debug)]
pub struct SparseLu {
    n: usize,
    /// Strictly lower triangular columns, stored as (pivot position, value)
    /// with an implied unit diagonal.
    l_cols: Vec<Vec<(usize, f64)>>,
    /// Strictly upper triangular columns, (pivot position, value).
    u_cols: Vec<Vec<(usize, f64)>>,
    u_diag: Vec<f64>,
    /// Column permutation: pivot step k eliminated original column `col_perm[k]`.
    col_perm: Vec<usize>,
    /// Row permutation: pivot position p holds original row `row_perm[p]`.
    row_perm: Vec<usize>,
}

impl SparseLu {
    pub fn factor(a: &CsrMatrix) -> Result<SparseLu> {
        if a.n_rows() != a.n_cols() {
            return Err(Error::DimensionMismatch {
                context: "sparse LU",
                expected: a.n_rows(),
                got: a.n_cols(),
            });
        }
        let n = a.n_rows();
        let threshold = 1e-14 * a.infinity_norm();
        let col_perm = min_degree_order(a);
        let at = a.transpose(); // rows of A^T are columns of A

        let mut l_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut u_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut u_diag = vec![0.0; n];
        // pivot position of each original row, usize::MAX while unpivoted
        let mut pinv = vec![usize::MAX; n];

        let mut x = vec![0.0; n];
        let mut visited = vec![0u32; n];
        let mut stamp = 0u32;
        let mut topo: Vec<usize> = Vec::new();
        let mut dfs: Vec<(usize, usize)> = Vec::new();

        for k in 0..n {
            let (b_rows, b_vals) = at.row(col_perm[k]);
            stamp += 1;
            topo.clear();

            // reachability of the column pattern through finished L columns
            for &start in b_rows {
                if visited[start] == stamp {
                    continue;
                }
                visited[start] = stamp;
                dfs.push((start, 0));
                while let Some(&mut (node, ref mut pos)) = dfs.last_mut() {
                    let p = pinv[node];
                    let children: &[(usize, f64)] = if p != usize::MAX {
                        &l_cols[p]
                    } else {
                        &[]
                    };
                    if *pos < children.len() {
                        let child = children[*pos].0;
                        *pos += 1;
                        if visited[child] != stamp {
                            visited[child] = stamp;
                            dfs.push((child, 0));
                        }
                    } else {
                        topo.push(node);
                        dfs.pop();
                    }
                }
            }

            for &i in &topo {
                x[i] = 0.0;
            }
            for (&i, &v) in b_rows.iter().zip(b_vals) {
                x[i] = v;
            }
            // numeric sparse triangular solve in topological order
            for &i in topo.iter().rev() {
                let p = pinv[i];
                if p != usize::MAX {
                    let xi = x[i];
                    if xi != 0.0 {
                        for &(r, lv) in &l_cols[p] {
                            x[r] -= lv * xi;
                        }
                    }
                }
            }

            // partial pivoting over the unpivoted pattern rows
            let mut piv_row = usize::MAX;
            let mut piv_abs = -1.0;
            for &i in &topo {
                if pinv[i] == usize::MAX {
                    let mag = x[i].abs();
                    if mag > piv_abs || (mag == piv_abs && i < piv_row) {
                        piv_abs = mag;
                        piv_row = i;
                    }
                }
            }
            if piv_row == usize::MAX || piv_abs <= threshold {
                return Err(Error::SingularMatrix { subdomain: None });
            }
            let pivot = x[piv_row];
            for &i in &topo {
                let p = pinv[i];
                if p != usize::MAX {
                    u_cols[k].push((p, x[i]));
                } else if i != piv_row && x[i] != 0.0 {
                    l_cols[k].push((i, x[i] / pivot));
                }
            }
            u_diag[k] = pivot;
            pinv[piv_row] = k;
        }

        // remap L row indices from original rows to pivot positions
        for col in &mut l_cols {
            for entry in col.iter_mut() {
                entry.0 = pinv[entry.0];
            }
        }
        let mut row_perm = vec![0usize; n];
        for (orig, &pos) in pinv.iter().enumerate() {
            row_perm[pos] = orig;
        }

        Ok(SparseLu {
            n,
            l_cols,
            u_cols,
            u_diag,
            col_perm,
            row_perm,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64], out: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        let mut c: Vec<f64> = self.row_perm.iter().map(|&r| b[r]).collect();
        for j in 0..self.n {
            let cj = c[j];
            if cj != 0.0 {
                for &(r, lv) in &self.l_cols[j] {
                    c[r] -= lv * cj;
                }
            }
        }
        for j in (0..self.n).rev() {
            c[j] /= self.u_diag[j];
            let cj = c[j];
            if cj != 0.0 {
                for &(r, uv) in &self.u_cols[j] {
                    c[r] -= uv * cj;
                }
            }
        }
        for (j, &cj) in c.iter().enumerate() {
            out[self.col_perm[j]] = cj;
        }
    }

    pub fn solve_alloc(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.solve(b, &mut out);
        out
    }
}

/// Minimum-degree elimination order on the pattern of `A + A^T`.
fn min_degree_order(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n_rows();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for r in 0..n {
        let (cols, _) = a.row(r);
        for &c in cols {
            if c != r {
                adj[r].insert(c);
                adj[c].insert(r);
            }
        }
    }
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !eliminated[v])
            .min_by_key(|&v| (adj[v].len(), v))
            .expect("nodes remain");
        order.push(v);
        eliminated[v] = true;
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for &u in &nbrs {
            adj[u].remove(&v);
        }
        for a_ in 0..nbrs.len() {
            for b_ in a_ + 1..nbrs.len() {
                adj[nbrs[a_]].insert(nbrs[b_]);
                adj[nbrs[b_]].insert(nbrs[a_]);
            }
        }
        adj[v].clear();
    }
    order
}
