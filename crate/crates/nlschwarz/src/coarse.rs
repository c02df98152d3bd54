//! RGDSW coarse space construction.
//!
//! One coarse basis function per interface vertex node (per displacement
//! component for vector problems). Interface values follow the inverse
//! Euclidean distance rule between a node and the anchor set of its edge
//! component; edge components that end at the Dirichlet boundary get a
//! virtual anchor at the Dirichlet endpoint which contributes to the
//! distance weights but carries no basis function, so values decay toward
//! the boundary. Interior values are the energy-minimizing (discrete
//! harmonic) extension with respect to a linearized tangent, solved
//! subdomain by subdomain.

use rayon::prelude::*;

use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix, SparseLu};
use crate::mesh::{BoundaryTag, Mesh};

/// A connected run of interface nodes between vertices (or between a vertex
/// and the domain boundary).
#[derive(Clone, Debug)]
pub struct EdgeComponent {
    /// Sorted interface nodes of the component (vertices excluded).
    pub nodes: Vec<usize>,
    /// Vertex nodes adjacent to the component.
    pub vertices: Vec<usize>,
    /// Dirichlet boundary nodes of subdomain multiplicity >= 2 adjacent to
    /// the component; these act as virtual anchors.
    pub dirichlet_endpoints: Vec<usize>,
}

impl EdgeComponent {
    pub fn touches_dirichlet(&self) -> bool {
        !self.dirichlet_endpoints.is_empty()
    }
}

/// Interface nodes classified from the nonoverlapping partition.
#[derive(Clone, Debug)]
pub struct InterfaceClassification {
    /// Subdomain multiplicity of every node.
    pub multiplicity: Vec<usize>,
    /// Sorted non-Dirichlet nodes with multiplicity >= 2.
    pub interface_nodes: Vec<usize>,
    /// Sorted interface nodes with multiplicity >= 3.
    pub vertex_nodes: Vec<usize>,
    pub components: Vec<EdgeComponent>,
}

/// Classify interface nodes, vertices and edge components of a decomposition.
pub fn classify_interface(decomp: &Decomposition, mesh: &Mesh) -> InterfaceClassification {
    let n = mesh.n_nodes();
    let mut multiplicity = vec![0usize; n];
    for elems in &decomp.nonoverlap_elements {
        let mut seen = vec![false; n];
        for &e in elems {
            for &node in &mesh.elements[e] {
                if !seen[node] {
                    seen[node] = true;
                    multiplicity[node] += 1;
                }
            }
        }
    }

    let is_dirichlet = |node: usize| mesh.boundary_tag[node] == BoundaryTag::Dirichlet;
    let interface: Vec<bool> = (0..n)
        .map(|node| multiplicity[node] >= 2 && !is_dirichlet(node))
        .collect();
    let vertex: Vec<bool> = (0..n)
        .map(|node| interface[node] && multiplicity[node] >= 3)
        .collect();
    let interface_nodes: Vec<usize> = (0..n).filter(|&v| interface[v]).collect();
    let vertex_nodes: Vec<usize> = (0..n).filter(|&v| vertex[v]).collect();

    let adjacency = mesh.node_adjacency();
    let mut component_id = vec![usize::MAX; n];
    let mut components = Vec::new();
    for &start in &interface_nodes {
        if vertex[start] || component_id[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut nodes = Vec::new();
        let mut stack = vec![start];
        component_id[start] = id;
        while let Some(node) = stack.pop() {
            nodes.push(node);
            for &nb in &adjacency[node] {
                if interface[nb] && !vertex[nb] && component_id[nb] == usize::MAX {
                    component_id[nb] = id;
                    stack.push(nb);
                }
            }
        }
        nodes.sort_unstable();
        let mut vertices = Vec::new();
        let mut dirichlet_endpoints = Vec::new();
        for &node in &nodes {
            for &nb in &adjacency[node] {
                if vertex[nb] {
                    vertices.push(nb);
                } else if is_dirichlet(nb) && multiplicity[nb] >= 2 {
                    dirichlet_endpoints.push(nb);
                }
            }
        }
        vertices.sort_unstable();
        vertices.dedup();
        dirichlet_endpoints.sort_unstable();
        dirichlet_endpoints.dedup();
        components.push(EdgeComponent {
            nodes,
            vertices,
            dirichlet_endpoints,
        });
    }

    InterfaceClassification {
        multiplicity,
        interface_nodes,
        vertex_nodes,
        components,
    }
}

/// Node-level interface values: `(node, vertex_rank, weight)` triplets,
/// including the unit self-entries of the vertex nodes.
///
/// For a node `x` in an edge component with anchor set `A` (the adjacent
/// vertices plus any Dirichlet endpoints), the weight of vertex `v` is
/// `(1/d(x,v)) / sum_{a in A} 1/d(x,a)`; Dirichlet anchors enter the
/// denominator only.
pub fn interface_values_option22(
    class: &InterfaceClassification,
    mesh: &Mesh,
) -> Result<Vec<(usize, usize, f64)>> {
    let rank_of = |v: usize| class.vertex_nodes.binary_search(&v).unwrap();
    let mut values = Vec::new();
    for &v in &class.vertex_nodes {
        values.push((v, rank_of(v), 1.0));
    }
    let dist = |a: usize, b: usize| {
        let pa = mesh.node_coords[a];
        let pb = mesh.node_coords[b];
        ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt()
    };
    for (id, comp) in class.components.iter().enumerate() {
        if comp.vertices.is_empty() && comp.dirichlet_endpoints.is_empty() {
            return Err(Error::UnassignedComponent { component: id });
        }
        for &x in &comp.nodes {
            let mut denom = 0.0;
            for &v in &comp.vertices {
                denom += 1.0 / dist(x, v);
            }
            for &d in &comp.dirichlet_endpoints {
                denom += 1.0 / dist(x, d);
            }
            for &v in &comp.vertices {
                values.push((x, rank_of(v), (1.0 / dist(x, v)) / denom));
            }
        }
    }
    Ok(values)
}

/// Sparse coarse basis: `phi` is n x n0 with one column per vertex node and
/// displacement component.
#[derive(Clone, Debug)]
pub struct CoarseBasis {
    pub phi: CsrMatrix,
    pub n_coarse: usize,
    pub dofs_per_node: usize,
    pub vertex_nodes: Vec<usize>,
}

impl CoarseBasis {
    /// `R_0 v = Phi^T v`.
    pub fn restrict(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_coarse];
        self.phi.matvec_transpose(v, &mut out);
        out
    }

    /// `P_0 c = Phi c`.
    pub fn prolong(&self, c: &[f64]) -> Vec<f64> {
        self.phi.matvec_alloc(c)
    }

    /// Galerkin product `Phi^T K Phi` as a dense coarse matrix.
    pub fn galerkin(&self, k: &CsrMatrix) -> DenseMatrix {
        let mut g = DenseMatrix::zeros(self.n_coarse, self.n_coarse);
        for r in 0..k.n_rows() {
            let (cols, vals) = k.row(r);
            let (phi_r_cols, phi_r_vals) = self.phi.row(r);
            if phi_r_cols.is_empty() {
                continue;
            }
            for (&c, &v) in cols.iter().zip(vals) {
                let (phi_c_cols, phi_c_vals) = self.phi.row(c);
                for (&ca, &wa) in phi_r_cols.iter().zip(phi_r_vals) {
                    for (&cb, &wb) in phi_c_cols.iter().zip(phi_c_vals) {
                        g[(ca, cb)] += wa * v * wb;
                    }
                }
            }
        }
        g
    }
}

/// Extend interface values into subdomain interiors by the discrete harmonic
/// extension with respect to `k`: interior rows solve
/// `K_II Phi_I = -K_IG Phi_G`.
///
/// `k` must be an eliminated tangent assembled at the chosen linearization
/// point. The interior blocks decouple by subdomain, so the solves run
/// independently per subdomain.
pub fn extend_interior(
    class: &InterfaceClassification,
    interface_values: &[(usize, usize, f64)],
    k: &CsrMatrix,
    decomp: &Decomposition,
    mesh: &Mesh,
) -> Result<CoarseBasis> {
    if class.vertex_nodes.is_empty() {
        return Err(Error::EmptyCoarseSpace);
    }
    let dpn = mesh.dofs_per_node;
    let n = mesh.n_dofs();
    if k.n_rows() != n {
        return Err(Error::DimensionMismatch {
            context: "coarse extension tangent",
            expected: n,
            got: k.n_rows(),
        });
    }
    let n_vertices = class.vertex_nodes.len();
    let n_coarse = n_vertices * dpn;

    // dof-level interface data: node-level weight w at (node, rank) becomes
    // phi[node*dpn + c, rank*dpn + c] = w for each component c
    let mut interface_of_node: Vec<Vec<(usize, f64)>> = vec![Vec::new(); mesh.n_nodes()];
    for &(node, rank, w) in interface_values {
        interface_of_node[node].push((rank, w));
    }
    let is_interface: Vec<bool> = {
        let mut v = vec![false; mesh.n_nodes()];
        for &node in &class.interface_nodes {
            v[node] = true;
        }
        v
    };

    // interior nodes grouped by owning subdomain
    let mut interior_nodes: Vec<Vec<usize>> = vec![Vec::new(); decomp.n_sub];
    for node in 0..mesh.n_nodes() {
        if !is_interface[node] && mesh.boundary_tag[node] != BoundaryTag::Dirichlet {
            interior_nodes[decomp.owner[node]].push(node);
        }
    }

    let per_subdomain: Vec<Result<Vec<(usize, usize, f64)>>> = (0..decomp.n_sub)
        .into_par_iter()
        .map(|s| {
            let nodes = &interior_nodes[s];
            if nodes.is_empty() {
                return Ok(Vec::new());
            }
            let mut dof_of = vec![usize::MAX; n];
            let mut dofs = Vec::with_capacity(nodes.len() * dpn);
            for &node in nodes {
                for c in 0..dpn {
                    dof_of[node * dpn + c] = dofs.len();
                    dofs.push(node * dpn + c);
                }
            }
            let n_i = dofs.len();
            let mut block = Vec::new();
            // right-hand sides -K_IG Phi_G per coarse column with local support
            let mut rhs: Vec<Vec<f64>> = Vec::new();
            let mut rhs_col: Vec<usize> = Vec::new();
            let mut rhs_index = vec![usize::MAX; n_coarse];
            for (li, &gdof) in dofs.iter().enumerate() {
                let (cols, vals) = k.row(gdof);
                for (&c, &v) in cols.iter().zip(vals) {
                    let lc = dof_of[c];
                    if lc != usize::MAX {
                        block.push((li, lc, v));
                    } else if is_interface[c / dpn] {
                        let comp = c % dpn;
                        for &(rank, w) in &interface_of_node[c / dpn] {
                            let col = rank * dpn + comp;
                            let idx = if rhs_index[col] == usize::MAX {
                                rhs_index[col] = rhs.len();
                                rhs.push(vec![0.0; n_i]);
                                rhs_col.push(col);
                                rhs.len() - 1
                            } else {
                                rhs_index[col]
                            };
                            rhs[idx][li] -= v * w;
                        }
                    }
                }
            }
            let block = CsrMatrix::from_triplets(n_i, n_i, block);
            let lu = SparseLu::factor(&block).map_err(|err| match err {
                Error::SingularMatrix { .. } => Error::SingularMatrix { subdomain: Some(s) },
                other => other,
            })?;
            let mut triplets = Vec::new();
            // deterministic column order
            let mut order: Vec<usize> = (0..rhs.len()).collect();
            order.sort_unstable_by_key(|&idx| rhs_col[idx]);
            for idx in order {
                let x = lu.solve_alloc(&rhs[idx]);
                for (li, &gdof) in dofs.iter().enumerate() {
                    if x[li] != 0.0 {
                        triplets.push((gdof, rhs_col[idx], x[li]));
                    }
                }
            }
            Ok(triplets)
        })
        .collect();

    let mut triplets = Vec::new();
    for &(node, rank, w) in interface_values {
        for c in 0..dpn {
            triplets.push((node * dpn + c, rank * dpn + c, w));
        }
    }
    for result in per_subdomain {
        triplets.extend(result?);
    }

    Ok(CoarseBasis {
        phi: CsrMatrix::from_triplets(n, n_coarse, triplets),
        n_coarse,
        dofs_per_node: dpn,
        vertex_nodes: class.vertex_nodes.clone(),
    })
}

/// Classification plus interface weights, with the ability to rebuild the
/// basis at a new linearization tangent.
#[derive(Clone, Debug)]
pub struct CoarseSpace {
    pub classification: InterfaceClassification,
    interface_values: Vec<(usize, usize, f64)>,
    pub basis: CoarseBasis,
}

impl CoarseSpace {
    /// Build the coarse space from a decomposition and a tangent assembled at
    /// the initial iterate.
    pub fn build(mesh: &Mesh, decomp: &Decomposition, k: &CsrMatrix) -> Result<Self> {
        let classification = classify_interface(decomp, mesh);
        let interface_values = interface_values_option22(&classification, mesh)?;
        let basis = extend_interior(&classification, &interface_values, k, decomp, mesh)?;
        Ok(CoarseSpace {
            classification,
            interface_values,
            basis,
        })
    }

    /// Recompute the interior extension against a new tangent; interface
    /// values are geometric and stay fixed.
    pub fn basis_for(
        &self,
        k: &CsrMatrix,
        decomp: &Decomposition,
        mesh: &Mesh,
    ) -> Result<CoarseBasis> {
        extend_interior(&self.classification, &self.interface_values, k, decomp, mesh)
    }
}
