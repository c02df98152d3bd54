use crate::error::{Error, Result};
use crate::linalg::LinearOperator;

/// Restarted GMRES settings.
#[derive(Clone, Debug)]
pub struct GmresConfig {
    /// Convergence on `||b - A x|| <= rel_tol * ||b||`.
    pub rel_tol: f64,
    /// Budget of operator applications over all restart cycles.
    pub max_iter: usize,
    /// Arnoldi cycle length.
    pub restart_len: usize,
    /// Maximum number of restarts (cycles beyond the first).
    pub max_restarts: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            rel_tol: 1e-6,
            max_iter: 1000,
            restart_len: 50,
            max_restarts: 20,
        }
    }
}

impl GmresConfig {
    /// Derive the restart length from the iteration and restart budgets.
    pub fn with_derived_restart_len(mut self) -> Self {
        self.restart_len = self.max_iter.div_ceil(self.max_restarts).max(1);
        self
    }
}

#[derive(Clone, Debug)]
pub struct GmresResult {
    pub x: Vec<f64>,
    /// Total operator applications.
    pub iterations: usize,
    pub converged: bool,
    /// Residual norm estimates, one per Arnoldi step.
    pub res_norms: Vec<f64>,
    /// Indices into `res_norms` where restart cycles begin.
    pub cycle_starts: Vec<usize>,
}

/// Restarted GMRES with classical Gram-Schmidt and one reorthogonalization
/// pass, starting from a zero initial guess.
///
/// Non-convergence within the budgets is reported through the `converged`
/// flag; an Arnoldi breakdown with a nonzero residual is an error.
pub fn gmres(op: &dyn LinearOperator, b: &[f64], cfg: &GmresConfig) -> Result<GmresResult> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            context: "gmres right-hand side",
            expected: n,
            got: b.len(),
        });
    }
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(GmresResult {
            x,
            iterations: 0,
            converged: true,
            res_norms: Vec::new(),
            cycle_starts: Vec::new(),
        });
    }

    let m = cfg.restart_len.max(1);
    let mut iterations = 0usize;
    let mut res_norms = Vec::new();
    let mut cycle_starts = Vec::new();
    let mut work = vec![0.0; n];

    for cycle in 0..=cfg.max_restarts {
        // residual at the cycle start; the first cycle starts from x = 0
        let mut r = if cycle == 0 {
            b.to_vec()
        } else {
            op.apply(&x, &mut work)?;
            iterations += 1;
            b.iter().zip(&work).map(|(bi, ai)| bi - ai).collect()
        };
        let beta = norm(&r);
        if beta <= cfg.rel_tol * b_norm {
            return Ok(GmresResult {
                x,
                iterations,
                converged: true,
                res_norms,
                cycle_starts,
            });
        }
        if iterations >= cfg.max_iter {
            break;
        }
        cycle_starts.push(res_norms.len());

        scale(&mut r, 1.0 / beta);
        let mut basis: Vec<Vec<f64>> = vec![r];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;

        let mut k_done = 0usize;
        let mut converged = false;
        for k in 0..m {
            op.apply(&basis[k], &mut work)?;
            iterations += 1;
            let mut w = work.clone();
            // classical Gram-Schmidt with one reorthogonalization pass
            for j in 0..=k {
                h[j][k] = dot(&w, &basis[j]);
            }
            for j in 0..=k {
                axpy(&mut w, -h[j][k], &basis[j]);
            }
            for j in 0..=k {
                let corr = dot(&w, &basis[j]);
                h[j][k] += corr;
                axpy(&mut w, -corr, &basis[j]);
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;

            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c * h[k][k] + s * h[k + 1][k];
            h[k + 1][k] = 0.0;
            let t = c * g[k] + s * g[k + 1];
            g[k + 1] = -s * g[k] + c * g[k + 1];
            g[k] = t;

            k_done = k + 1;
            let res = g[k_done].abs();
            res_norms.push(res);

            if wn < 1e-14 {
                if res <= cfg.rel_tol * b_norm {
                    converged = true;
                    break;
                }
                return Err(Error::GmresBreakdown {
                    arnoldi_norm: wn,
                    residual: res,
                });
            }
            if res <= cfg.rel_tol * b_norm || iterations >= cfg.max_iter {
                converged = res <= cfg.rel_tol * b_norm;
                break;
            }
            scale(&mut w, 1.0 / wn);
            basis.push(w);
        }

        // least-squares update x += V y
        let mut y = vec![0.0; k_done];
        for i in (0..k_done).rev() {
            let mut s = g[i];
            for j in i + 1..k_done {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, &yj) in y.iter().enumerate() {
            axpy(&mut x, yj, &basis[j]);
        }

        if converged {
            return Ok(GmresResult {
                x,
                iterations,
                converged: true,
                res_norms,
                cycle_starts,
            });
        }
        if iterations >= cfg.max_iter {
            break;
        }
    }

    Ok(GmresResult {
        x,
        iterations,
        converged: false,
        res_norms,
        cycle_starts,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale(y: &mut [f64], alpha: f64) {
    for yi in y {
        *yi *= alpha;
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if a.abs() > b.abs() {
        let t = b / a;
        let c = 1.0 / (1.0 + t * t).sqrt();
        (c, c * t)
    } else {
        let t = a / b;
        let s = 1.0 / (1.0 + t * t).sqrt();
        (s * t, s)
    }
}
