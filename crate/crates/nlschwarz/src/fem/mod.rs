//! Residual and tangent assembly for the model problems.
//!
//! Two nonlinear problems are provided: a scalar diffusion problem
//! `-div((u^2+1) grad u) = 1` with homogeneous Dirichlet data, and a 2D
//! compressible Neo-Hooke elasticity problem driven by a vertical volume
//! force. A linear Poisson variant exists for testing solver components
//! against closed-form behavior.
//!
//! Assembly uses P1 triangles with one-point (barycenter) quadrature. The
//! eliminated residual is defined as a smooth function of the full iterate:
//! the bulk terms are evaluated at the iterate with Dirichlet entries
//! projected onto their prescribed values, and Dirichlet residual entries
//! are `u_d - g_d`. Its exact derivative is then the row/column eliminated
//! tangent produced here, so finite differences of the residual match the
//! assembled tangent including at constrained DOFs.

mod neohooke;

pub use neohooke::{first_piola, piola_tangent, MaterialParams};

use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{BoundaryTag, Mesh};

/// Which model problem an assembly evaluates.
#[derive(Clone, Debug)]
pub enum ProblemKind {
    /// `-div((u^2+1) grad u) = 1`, scalar.
    Diffusion,
    /// `-div(grad u) = 1`, scalar; linear, used to validate solver pieces.
    LinearPoisson,
    /// Compressible Neo-Hooke with a constant volume force, 2 DOFs per node.
    NeoHooke {
        material: MaterialParams,
        /// Volume force density (SI), e.g. `(0, -f_x)`.
        volume_force: [f64; 2],
    },
}

/// A discretized nonlinear problem `F(u) = 0` on a mesh, with Dirichlet
/// elimination built into residual and tangent.
#[derive(Clone, Debug)]
pub struct FemProblem<'a> {
    pub mesh: &'a Mesh,
    pub kind: ProblemKind,
    /// Per-DOF Dirichlet flag; prescribed values are zero for both problems.
    dirichlet: Vec<bool>,
    dirichlet_dofs: Vec<usize>,
}

/// Local assembly output for one subdomain.
#[derive(Clone, Debug)]
pub struct LocalSystem {
    /// Rows of the eliminated residual at the subdomain's overlap DOFs.
    pub residual: Vec<f64>,
    /// `R_i DF P_i`: the overlap-block tangent (local indexing).
    pub block: Option<CsrMatrix>,
    /// `R_i DF`: complete tangent rows at overlap DOFs (global columns).
    pub rows: Option<CsrMatrix>,
}

const MAX_ELEMENT_DOFS: usize = 6;
const SOURCE: f64 = 1.0;

impl<'a> FemProblem<'a> {
    pub fn diffusion(mesh: &'a Mesh) -> Result<Self> {
        Self::new(mesh, ProblemKind::Diffusion, 1)
    }

    pub fn linear_poisson(mesh: &'a Mesh) -> Result<Self> {
        Self::new(mesh, ProblemKind::LinearPoisson, 1)
    }

    pub fn neo_hooke(mesh: &'a Mesh, material: MaterialParams, volume_force: [f64; 2]) -> Result<Self> {
        Self::new(
            mesh,
            ProblemKind::NeoHooke {
                material,
                volume_force,
            },
            2,
        )
    }

    fn new(mesh: &'a Mesh, kind: ProblemKind, expected_dpn: usize) -> Result<Self> {
        if mesh.dofs_per_node != expected_dpn {
            return Err(Error::InvalidArgument(format!(
                "problem needs {expected_dpn} DOFs per node, mesh has {}",
                mesh.dofs_per_node
            )));
        }
        let dpn = mesh.dofs_per_node;
        let mut dirichlet = vec![false; mesh.n_dofs()];
        let mut dirichlet_dofs = Vec::new();
        for (n, tag) in mesh.boundary_tag.iter().enumerate() {
            if *tag == BoundaryTag::Dirichlet {
                for d in 0..dpn {
                    dirichlet[n * dpn + d] = true;
                    dirichlet_dofs.push(n * dpn + d);
                }
            }
        }
        Ok(FemProblem {
            mesh,
            kind,
            dirichlet,
            dirichlet_dofs,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_dofs()
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet[dof]
    }

    pub fn dirichlet_dofs(&self) -> &[usize] {
        &self.dirichlet_dofs
    }

    /// Copy of `u` with Dirichlet entries replaced by their prescribed values.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        let mut p = u.to_vec();
        for &d in &self.dirichlet_dofs {
            p[d] = 0.0;
        }
        p
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n_dofs() {
            return Err(Error::DimensionMismatch {
                context: "state vector",
                expected: self.n_dofs(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// Element residual and (optionally) tangent at the barycenter quadrature
    /// point. Entries are ordered `node-major, component-minor`.
    fn element_kernel(
        &self,
        e: usize,
        u: &[f64],
        want_tangent: bool,
        res: &mut [f64; MAX_ELEMENT_DOFS],
        tan: &mut [[f64; MAX_ELEMENT_DOFS]; MAX_ELEMENT_DOFS],
    ) -> Result<usize> {
        let (g, area) = self.mesh.element_gradients(e);
        let nodes = self.mesh.elements[e];
        match &self.kind {
            ProblemKind::Diffusion | ProblemKind::LinearPoisson => {
                let ue = [u[nodes[0]], u[nodes[1]], u[nodes[2]]];
                let grad_u = [
                    ue[0] * g[0][0] + ue[1] * g[1][0] + ue[2] * g[2][0],
                    ue[0] * g[0][1] + ue[1] * g[1][1] + ue[2] * g[2][1],
                ];
                let (coef, dcoef) = match self.kind {
                    ProblemKind::Diffusion => {
                        let ubar = (ue[0] + ue[1] + ue[2]) / 3.0;
                        (ubar * ubar + 1.0, 2.0 * ubar / 3.0)
                    }
                    _ => (1.0, 0.0),
                };
                for a in 0..3 {
                    let flux = grad_u[0] * g[a][0] + grad_u[1] * g[a][1];
                    res[a] = area * (coef * flux - SOURCE / 3.0);
                    if want_tangent {
                        for b in 0..3 {
                            let stiff = g[b][0] * g[a][0] + g[b][1] * g[a][1];
                            tan[a][b] = area * (coef * stiff + dcoef * flux);
                        }
                    }
                }
                Ok(3)
            }
            ProblemKind::NeoHooke {
                material,
                volume_force,
            } => {
                let mut f = [[0.0; 2]; 2];
                f[0][0] = 1.0;
                f[1][1] = 1.0;
                for (k, &n) in nodes.iter().enumerate() {
                    for i in 0..2 {
                        for j in 0..2 {
                            f[i][j] += u[2 * n + i] * g[k][j];
                        }
                    }
                }
                let p = first_piola(f, material).map_err(|err| match err {
                    Error::NonPhysicalDeformation { .. } => {
                        Error::NonPhysicalDeformation { element: Some(e) }
                    }
                    other => other,
                })?;
                for a in 0..3 {
                    for i in 0..2 {
                        let stress_term = p[i][0] * g[a][0] + p[i][1] * g[a][1];
                        res[2 * a + i] = area * (stress_term - volume_force[i] / 3.0);
                    }
                }
                if want_tangent {
                    let aa = piola_tangent(f, material)?;
                    for a in 0..3 {
                        for i in 0..2 {
                            for b in 0..3 {
                                for k in 0..2 {
                                    let mut s = 0.0;
                                    for j in 0..2 {
                                        for l in 0..2 {
                                            s += aa[2 * i + j][2 * k + l] * g[b][l] * g[a][j];
                                        }
                                    }
                                    tan[2 * a + i][2 * b + k] = area * s;
                                }
                            }
                        }
                    }
                }
                Ok(6)
            }
        }
    }

    fn element_dofs(&self, e: usize, out: &mut [usize; MAX_ELEMENT_DOFS]) -> usize {
        let dpn = self.mesh.dofs_per_node;
        let nodes = self.mesh.elements[e];
        let mut k = 0;
        for &n in &nodes {
            for d in 0..dpn {
                out[k] = n * dpn + d;
                k += 1;
            }
        }
        k
    }

    /// Raw assembly over an element set: no Dirichlet handling, global sizes.
    /// Contributions from disjoint element sets are exactly additive.
    pub fn assemble_raw(
        &self,
        u: &[f64],
        elements: &[usize],
    ) -> Result<(Vec<f64>, CsrMatrix)> {
        self.check_len(u)?;
        let n = self.n_dofs();
        let mut residual = vec![0.0; n];
        let mut triplets = Vec::new();
        let mut res = [0.0; MAX_ELEMENT_DOFS];
        let mut tan = [[0.0; MAX_ELEMENT_DOFS]; MAX_ELEMENT_DOFS];
        let mut dofs = [0usize; MAX_ELEMENT_DOFS];
        for &e in elements {
            let nd = self.element_kernel(e, u, true, &mut res, &mut tan)?;
            self.element_dofs(e, &mut dofs);
            for a in 0..nd {
                residual[dofs[a]] += res[a];
                for b in 0..nd {
                    triplets.push((dofs[a], dofs[b], tan[a][b]));
                }
            }
        }
        Ok((residual, CsrMatrix::from_triplets(n, n, triplets)))
    }

    /// Raw residual only (no tangent), global size.
    pub fn assemble_raw_residual(&self, u: &[f64], elements: &[usize]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let mut residual = vec![0.0; self.n_dofs()];
        let mut res = [0.0; MAX_ELEMENT_DOFS];
        let mut tan = [[0.0; MAX_ELEMENT_DOFS]; MAX_ELEMENT_DOFS];
        let mut dofs = [0usize; MAX_ELEMENT_DOFS];
        for &e in elements {
            let nd = self.element_kernel(e, u, false, &mut res, &mut tan)?;
            self.element_dofs(e, &mut dofs);
            for a in 0..nd {
                residual[dofs[a]] += res[a];
            }
        }
        Ok(residual)
    }

    /// Assembly over an element set with Dirichlet elimination: identity rows
    /// and zeroed columns in the tangent, `u_d - g_d` residual entries.
    pub fn assemble(&self, u: &[f64], elements: &[usize]) -> Result<(Vec<f64>, CsrMatrix)> {
        self.check_len(u)?;
        let pu = self.project(u);
        let n = self.n_dofs();
        let mut residual = vec![0.0; n];
        let mut triplets = Vec::new();
        let mut res = [0.0; MAX_ELEMENT_DOFS];
        let mut tan = [[0.0; MAX_ELEMENT_DOFS]; MAX_ELEMENT_DOFS];
        let mut dofs = [0usize; MAX_ELEMENT_DOFS];
        for &e in elements {
            let nd = self.element_kernel(e, &pu, true, &mut res, &mut tan)?;
            self.element_dofs(e, &mut dofs);
            for a in 0..nd {
                if self.dirichlet[dofs[a]] {
                    continue;
                }
                residual[dofs[a]] += res[a];
                for b in 0..nd {
                    if !self.dirichlet[dofs[b]] {
                        triplets.push((dofs[a], dofs[b], tan[a][b]));
                    }
                }
            }
        }
        for &d in &self.dirichlet_dofs {
            residual[d] = u[d];
            triplets.push((d, d, 1.0));
        }
        Ok((residual, CsrMatrix::from_triplets(n, n, triplets)))
    }

    /// Eliminated residual over the whole mesh.
    pub fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let pu = self.project(u);
        let all: Vec<usize> = (0..self.mesh.n_elements()).collect();
        let mut r = self.assemble_raw_residual(&pu, &all)?;
        for &d in &self.dirichlet_dofs {
            r[d] = u[d];
        }
        Ok(r)
    }

    /// Eliminated tangent over the whole mesh.
    pub fn tangent(&self, u: &[f64]) -> Result<CsrMatrix> {
        let all: Vec<usize> = (0..self.mesh.n_elements()).collect();
        Ok(self.assemble(u, &all)?.1)
    }

    /// Subdomain-local assembly: the eliminated residual rows at the overlap
    /// DOFs of subdomain `i`, with the overlap-block tangent and/or the full
    /// tangent rows on request. Assembly runs over the halo element set so
    /// the overlap rows are complete.
    pub fn local_system(
        &self,
        u: &[f64],
        decomp: &Decomposition,
        i: usize,
        want_block: bool,
        want_rows: bool,
    ) -> Result<LocalSystem> {
        self.check_len(u)?;
        let dpn = self.mesh.dofs_per_node;
        let pu = self.project(u);
        let map = &decomp.local_to_global[i];
        let n_local = map.len();
        let mut residual = vec![0.0; n_local];
        let want_tangent = want_block || want_rows;
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();

        let mut res = [0.0; MAX_ELEMENT_DOFS];
        let mut tan = [[0.0; MAX_ELEMENT_DOFS]; MAX_ELEMENT_DOFS];
        let mut dofs = [0usize; MAX_ELEMENT_DOFS];
        let mut local = [usize::MAX; MAX_ELEMENT_DOFS];
        for &e in &decomp.halo_elements[i] {
            let nd = self.element_kernel(e, &pu, want_tangent, &mut res, &mut tan)?;
            self.element_dofs(e, &mut dofs);
            for a in 0..nd {
                local[a] = match decomp.local_node_index(i, dofs[a] / dpn) {
                    Some(ln) => ln * dpn + dofs[a] % dpn,
                    None => usize::MAX,
                };
            }
            for a in 0..nd {
                let la = local[a];
                if la == usize::MAX || self.dirichlet[dofs[a]] {
                    continue;
                }
                residual[la] += res[a];
                if want_tangent {
                    for b in 0..nd {
                        if !self.dirichlet[dofs[b]] {
                            triplets.push((la, dofs[b], tan[a][b]));
                        }
                    }
                }
            }
        }
        for (l, &g) in map.iter().enumerate() {
            if self.dirichlet[g] {
                residual[l] = u[g];
                if want_tangent {
                    triplets.push((l, g, 1.0));
                }
            }
        }

        let rows = want_rows
            .then(|| CsrMatrix::from_triplets(n_local, self.n_dofs(), triplets.clone()));
        let block = want_block.then(|| {
            let block_triplets: Vec<(usize, usize, f64)> = triplets
                .iter()
                .filter_map(|&(la, gb, v)| {
                    decomp
                        .local_node_index(i, gb / dpn)
                        .map(|ln| (la, ln * dpn + gb % dpn, v))
                })
                .collect();
            CsrMatrix::from_triplets(n_local, n_local, block_triplets)
        });

        Ok(LocalSystem {
            residual,
            block,
            rows,
        })
    }

    /// Residual rows at subdomain `i`'s overlap DOFs.
    pub fn local_residual(&self, u: &[f64], decomp: &Decomposition, i: usize) -> Result<Vec<f64>> {
        Ok(self.local_system(u, decomp, i, false, false)?.residual)
    }
}
