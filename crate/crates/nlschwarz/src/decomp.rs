//! Overlapping domain decompositions of a triangulated rectangle.
//!
//! Subdomains are element sets: a structured block partition provides the
//! nonoverlapping layout, and overlap is added in element layers through the
//! dual graph of the mesh (elements adjacent when they share a node). All
//! restriction and prolongation maps are derived from the node sets of the
//! overlapping element sets.

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::Mesh;

/// Dual graph of a mesh: elements adjacent when they share at least one node.
#[derive(Clone, Debug)]
pub struct DualGraph {
    /// Sorted neighbor lists, irreflexive.
    pub adjacency: Vec<Vec<usize>>,
}

/// Node-sharing dual graph of the mesh.
pub fn build_dual_graph(mesh: &Mesh) -> DualGraph {
    let node_elems = mesh.node_to_elements();
    let mut adjacency = vec![Vec::new(); mesh.n_elements()];
    for (e, tri) in mesh.elements.iter().enumerate() {
        let adj = &mut adjacency[e];
        for &n in tri {
            adj.extend(node_elems[n].iter().copied().filter(|&o| o != e));
        }
        adj.sort_unstable();
        adj.dedup();
    }
    DualGraph { adjacency }
}

/// Element-based overlapping decomposition with its index maps.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub n_sub: usize,
    /// Number of overlap layers added on top of the nonoverlapping partition.
    pub overlap_width: usize,
    pub dofs_per_node: usize,
    pub n_nodes: usize,
    /// Disjoint element sets covering the mesh, sorted.
    pub nonoverlap_elements: Vec<Vec<usize>>,
    /// Element sets after overlap expansion, sorted; equal to the
    /// nonoverlapping sets when `overlap_width == 0`.
    pub overlap_elements: Vec<Vec<usize>>,
    /// One further expansion layer beyond `overlap_elements`; assembly over
    /// these elements completes all matrix rows of the overlap nodes. Empty
    /// until [`add_overlap`] has run.
    pub halo_elements: Vec<Vec<usize>>,
    /// Sorted node sets of `overlap_elements`.
    pub overlap_nodes: Vec<Vec<usize>>,
    /// Per-subdomain DOF map: local DOF k corresponds to global DOF
    /// `local_to_global[i][k]`.
    pub local_to_global: Vec<Vec<usize>>,
    /// Owning subdomain of each node: the lowest subdomain index whose
    /// nonoverlapping element set contains the node.
    pub owner: Vec<usize>,
}

impl Decomposition {
    pub fn n_dofs(&self) -> usize {
        self.n_nodes * self.dofs_per_node
    }

    pub fn n_local_dofs(&self, i: usize) -> usize {
        self.local_to_global[i].len()
    }

    fn check_global_len(&self, len: usize) -> Result<()> {
        if len != self.n_dofs() {
            return Err(Error::DimensionMismatch {
                context: "global vector",
                expected: self.n_dofs(),
                got: len,
            });
        }
        Ok(())
    }

    fn check_local_len(&self, i: usize, len: usize) -> Result<()> {
        if len != self.n_local_dofs(i) {
            return Err(Error::DimensionMismatch {
                context: "local vector",
                expected: self.n_local_dofs(i),
                got: len,
            });
        }
        Ok(())
    }

    /// `R_i v`: pick the subdomain entries of a global vector.
    pub fn restrict(&self, i: usize, global: &[f64]) -> Result<Vec<f64>> {
        self.check_global_len(global.len())?;
        Ok(self.local_to_global[i]
            .iter()
            .map(|&g| global[g])
            .collect())
    }

    /// `P_i v`: scatter-add a local vector into a fresh global vector.
    pub fn prolong(&self, i: usize, local: &[f64]) -> Result<Vec<f64>> {
        self.check_local_len(i, local.len())?;
        let mut out = vec![0.0; self.n_dofs()];
        self.scatter_add(i, local, &mut out);
        Ok(out)
    }

    /// Restricted prolongation: scatter only DOFs whose node this subdomain
    /// owns, so that the partition-of-unity identity holds.
    pub fn prolong_restricted(&self, i: usize, local: &[f64]) -> Result<Vec<f64>> {
        self.check_local_len(i, local.len())?;
        let mut out = vec![0.0; self.n_dofs()];
        self.scatter_add_restricted(i, local, &mut out);
        Ok(out)
    }

    /// In-place `out += P_i local`.
    pub fn scatter_add(&self, i: usize, local: &[f64], out: &mut [f64]) {
        for (k, &g) in self.local_to_global[i].iter().enumerate() {
            out[g] += local[k];
        }
    }

    /// In-place `out += P~_i local` (owned DOFs only).
    pub fn scatter_add_restricted(&self, i: usize, local: &[f64], out: &mut [f64]) {
        for (k, &g) in self.local_to_global[i].iter().enumerate() {
            if self.owner[g / self.dofs_per_node] == i {
                out[g] += local[k];
            }
        }
    }

    /// Local index of a global node within subdomain `i`, if present.
    pub fn local_node_index(&self, i: usize, node: usize) -> Option<usize> {
        self.overlap_nodes[i].binary_search(&node).ok()
    }

    /// Principal submatrix `R_i K P_i` of a global square matrix on the
    /// subdomain's overlap DOFs.
    pub fn extract_block(&self, k: &CsrMatrix, i: usize) -> Result<CsrMatrix> {
        self.check_global_len(k.n_rows())?;
        let map = &self.local_to_global[i];
        let mut global_to_local = vec![usize::MAX; self.n_dofs()];
        for (l, &g) in map.iter().enumerate() {
            global_to_local[g] = l;
        }
        let mut triplets = Vec::new();
        for (l, &g) in map.iter().enumerate() {
            let (cols, vals) = k.row(g);
            for (&c, &v) in cols.iter().zip(vals) {
                let lc = global_to_local[c];
                if lc != usize::MAX {
                    triplets.push((l, lc, v));
                }
            }
        }
        Ok(CsrMatrix::from_triplets(map.len(), map.len(), triplets))
    }
}

/// Structured block partition of a structured mesh into `mx` x `my`
/// subdomains (no overlap).
pub fn partition_structured(mesh: &Mesh, mx: usize, my: usize) -> Result<Decomposition> {
    let [nx, ny] = mesh.cells.ok_or_else(|| {
        Error::InvalidArgument("structured partitioning requires a structured mesh".into())
    })?;
    if mx == 0 || my == 0 {
        return Err(Error::InvalidArgument(format!(
            "subdomain counts must be positive, got {mx}x{my}"
        )));
    }
    if nx % mx != 0 || ny % my != 0 {
        return Err(Error::InvalidArgument(format!(
            "subdomain grid {mx}x{my} does not divide the cell grid {nx}x{ny}"
        )));
    }
    let bx = nx / mx;
    let by = ny / my;
    let n_sub = mx * my;

    let mut nonoverlap_elements = vec![Vec::with_capacity(2 * bx * by); n_sub];
    for cj in 0..ny {
        for ci in 0..nx {
            let s = (cj / by) * mx + ci / bx;
            let e = 2 * (cj * nx + ci);
            nonoverlap_elements[s].push(e);
            nonoverlap_elements[s].push(e + 1);
        }
    }
    for list in &mut nonoverlap_elements {
        list.sort_unstable();
    }

    let mut owner = vec![usize::MAX; mesh.n_nodes()];
    for (s, elems) in nonoverlap_elements.iter().enumerate() {
        for &e in elems {
            for &n in &mesh.elements[e] {
                if owner[n] == usize::MAX {
                    owner[n] = s;
                }
            }
        }
    }

    let overlap_elements = nonoverlap_elements.clone();
    let overlap_nodes: Vec<Vec<usize>> = overlap_elements
        .iter()
        .map(|elems| nodes_of(mesh, elems))
        .collect();
    let local_to_global = dof_maps(&overlap_nodes, mesh.dofs_per_node);

    Ok(Decomposition {
        n_sub,
        overlap_width: 0,
        dofs_per_node: mesh.dofs_per_node,
        n_nodes: mesh.n_nodes(),
        nonoverlap_elements,
        overlap_elements,
        halo_elements: vec![Vec::new(); n_sub],
        overlap_nodes,
        local_to_global,
        owner,
    })
}

/// Expand each subdomain by `delta` dual-graph layers and rebuild the node
/// and DOF maps. The halo element sets (one further layer) are built as well.
pub fn add_overlap(
    decomp: &Decomposition,
    graph: &DualGraph,
    mesh: &Mesh,
    delta: usize,
) -> Result<Decomposition> {
    if graph.adjacency.len() != mesh.n_elements() {
        return Err(Error::DimensionMismatch {
            context: "dual graph",
            expected: mesh.n_elements(),
            got: graph.adjacency.len(),
        });
    }
    let n_sub = decomp.n_sub;
    let mut overlap_elements = Vec::with_capacity(n_sub);
    let mut halo_elements = Vec::with_capacity(n_sub);
    for i in 0..n_sub {
        let overlap = expand(&decomp.nonoverlap_elements[i], graph, delta);
        let halo = expand(&overlap, graph, 1);
        overlap_elements.push(overlap);
        halo_elements.push(halo);
    }
    let overlap_nodes: Vec<Vec<usize>> = overlap_elements
        .iter()
        .map(|elems| nodes_of(mesh, elems))
        .collect();
    let local_to_global = dof_maps(&overlap_nodes, decomp.dofs_per_node);

    Ok(Decomposition {
        n_sub,
        overlap_width: delta,
        dofs_per_node: decomp.dofs_per_node,
        n_nodes: decomp.n_nodes,
        nonoverlap_elements: decomp.nonoverlap_elements.clone(),
        overlap_elements,
        halo_elements,
        overlap_nodes,
        local_to_global,
        owner: decomp.owner.clone(),
    })
}

fn expand(elements: &[usize], graph: &DualGraph, layers: usize) -> Vec<usize> {
    let n = graph.adjacency.len();
    let mut inside = vec![false; n];
    for &e in elements {
        inside[e] = true;
    }
    let mut frontier: Vec<usize> = elements.to_vec();
    for _ in 0..layers {
        let mut next = Vec::new();
        for &e in &frontier {
            for &nb in &graph.adjacency[e] {
                if !inside[nb] {
                    inside[nb] = true;
                    next.push(nb);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    (0..n).filter(|&e| inside[e]).collect()
}

fn nodes_of(mesh: &Mesh, elements: &[usize]) -> Vec<usize> {
    let mut nodes: Vec<usize> = elements
        .iter()
        .flat_map(|&e| mesh.elements[e].iter().copied())
        .collect();
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

fn dof_maps(overlap_nodes: &[Vec<usize>], dofs_per_node: usize) -> Vec<Vec<usize>> {
    overlap_nodes
        .iter()
        .map(|nodes| {
            let mut map = Vec::with_capacity(nodes.len() * dofs_per_node);
            for &n in nodes {
                for d in 0..dofs_per_node {
                    map.push(n * dofs_per_node + d);
                }
            }
            map
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured_mesh, BcSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_square(n: usize) -> Mesh {
        generate_structured_mesh(n, n, 1.0, 1.0, BcSpec::AllDirichlet, 1).unwrap()
    }

    #[test]
    fn dual_graph_smallest() {
        let mesh = unit_square(1);
        let g = build_dual_graph(&mesh);
        assert_eq!(g.adjacency[0], vec![1]);
        assert_eq!(g.adjacency[1], vec![0]);
    }

    #[test]
    fn dual_graph_matches_brute_force() {
        // Oracle: pairwise node-set intersection over all element pairs.
        let mesh = unit_square(2);
        let g = build_dual_graph(&mesh);
        for a in 0..mesh.n_elements() {
            for b in 0..mesh.n_elements() {
                let shares = a != b
                    && mesh.elements[a]
                        .iter()
                        .any(|n| mesh.elements[b].contains(n));
                assert_eq!(g.adjacency[a].contains(&b), shares, "pair ({a}, {b})");
            }
        }
    }

    #[test]
    fn dual_graph_symmetric_irreflexive() {
        let mesh = generate_structured_mesh(5, 3, 2.0, 1.0, BcSpec::Beam, 2).unwrap();
        let g = build_dual_graph(&mesh);
        for (e, adj) in g.adjacency.iter().enumerate() {
            assert!(!adj.contains(&e));
            for &nb in adj {
                assert!(g.adjacency[nb].contains(&e));
            }
        }
    }

    #[test]
    fn partition_counts() {
        let mesh = unit_square(4);
        let d = partition_structured(&mesh, 2, 2).unwrap();
        assert_eq!(d.n_sub, 4);
        for elems in &d.nonoverlap_elements {
            assert_eq!(elems.len(), 8);
        }
    }

    #[test]
    fn partition_disjoint_covering() {
        let mesh = generate_structured_mesh(6, 4, 1.0, 1.0, BcSpec::AllDirichlet, 1).unwrap();
        let d = partition_structured(&mesh, 3, 2).unwrap();
        let mut seen = vec![0usize; mesh.n_elements()];
        for elems in &d.nonoverlap_elements {
            for &e in elems {
                seen[e] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn partition_blocks_match_centroid_oracle() {
        // Oracle: element centroid inside the subdomain's rectangle.
        let mesh = unit_square(6);
        let d = partition_structured(&mesh, 3, 2).unwrap();
        for (s, elems) in d.nonoverlap_elements.iter().enumerate() {
            assert_eq!(elems.len(), 12);
            let (si, sj) = (s % 3, s / 3);
            let x_range = (si as f64 / 3.0, (si + 1) as f64 / 3.0);
            let y_range = (sj as f64 / 2.0, (sj + 1) as f64 / 2.0);
            for &e in elems {
                let c = mesh.element_centroid(e);
                assert!(c[0] > x_range.0 && c[0] < x_range.1);
                assert!(c[1] > y_range.0 && c[1] < y_range.1);
            }
        }
    }

    #[test]
    fn partition_rejects_non_divisible() {
        let mesh = unit_square(4);
        assert!(partition_structured(&mesh, 3, 2).is_err());
    }

    #[test]
    fn overlap_zero_is_identity() {
        let mesh = unit_square(4);
        let g = build_dual_graph(&mesh);
        let d0 = partition_structured(&mesh, 2, 2).unwrap();
        let d = add_overlap(&d0, &g, &mesh, 0).unwrap();
        assert_eq!(d.overlap_elements, d.nonoverlap_elements);
        for i in 0..d.n_sub {
            assert!(!d.halo_elements[i].is_empty());
        }
    }

    #[test]
    fn overlap_one_matches_node_sharing_oracle() {
        // Oracle: brute-force set of elements sharing a node with the block.
        let mesh = unit_square(4);
        let g = build_dual_graph(&mesh);
        let d0 = partition_structured(&mesh, 2, 2).unwrap();
        let d = add_overlap(&d0, &g, &mesh, 1).unwrap();
        for i in 0..d.n_sub {
            let block_nodes: Vec<usize> = {
                let mut v: Vec<usize> = d0.nonoverlap_elements[i]
                    .iter()
                    .flat_map(|&e| mesh.elements[e].iter().copied())
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            };
            let expected: Vec<usize> = (0..mesh.n_elements())
                .filter(|&e| mesh.elements[e].iter().any(|n| block_nodes.contains(n)))
                .collect();
            assert_eq!(d.overlap_elements[i], expected, "subdomain {i}");
        }
    }

    #[test]
    fn overlap_saturates() {
        let mesh = unit_square(4);
        let g = build_dual_graph(&mesh);
        let d0 = partition_structured(&mesh, 2, 2).unwrap();
        let d = add_overlap(&d0, &g, &mesh, 50).unwrap();
        for i in 0..d.n_sub {
            assert_eq!(d.overlap_elements[i].len(), mesh.n_elements());
        }
    }

    #[test]
    fn overlap_monotone_in_delta() {
        let mesh = unit_square(8);
        let g = build_dual_graph(&mesh);
        let d0 = partition_structured(&mesh, 2, 2).unwrap();
        let mut prev = add_overlap(&d0, &g, &mesh, 0).unwrap();
        for delta in 1..4 {
            let next = add_overlap(&d0, &g, &mesh, delta).unwrap();
            for i in 0..d0.n_sub {
                for e in &prev.overlap_elements[i] {
                    assert!(next.overlap_elements[i].contains(e));
                }
            }
            prev = next;
        }
    }

    #[test]
    fn partition_of_unity_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for (n, mx, my, delta, dpn) in [(4, 2, 2, 1, 1), (6, 3, 2, 2, 1), (4, 2, 2, 1, 2)] {
            let mesh =
                generate_structured_mesh(n, n, 1.0, 1.0, BcSpec::AllDirichlet, dpn).unwrap();
            let g = build_dual_graph(&mesh);
            let d0 = partition_structured(&mesh, mx, my).unwrap();
            let d = add_overlap(&d0, &g, &mesh, delta).unwrap();
            for _ in 0..100 {
                let v: Vec<f64> = (0..d.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut acc = vec![0.0; d.n_dofs()];
                for i in 0..d.n_sub {
                    let local = d.restrict(i, &v).unwrap();
                    let back = d.prolong_restricted(i, &local).unwrap();
                    for (a, b) in acc.iter_mut().zip(&back) {
                        *a += b;
                    }
                }
                for (a, b) in acc.iter().zip(&v) {
                    assert_eq!(a, b, "restricted prolongation must be exact");
                }
            }
        }
    }

    #[test]
    fn owner_is_a_function() {
        let mesh = unit_square(6);
        let g = build_dual_graph(&mesh);
        let d0 = partition_structured(&mesh, 3, 3).unwrap();
        let d = add_overlap(&d0, &g, &mesh, 1).unwrap();
        for n in 0..mesh.n_nodes() {
            let i = d.owner[n];
            assert!(i < d.n_sub);
            assert!(d.overlap_nodes[i].contains(&n));
        }
        // every node covered by the union of overlap node sets
        let mut covered = vec![false; mesh.n_nodes()];
        for nodes in &d.overlap_nodes {
            for &n in nodes {
                covered[n] = true;
            }
        }
        assert!(covered.iter().all(|&c| c));
    }

    #[test]
    fn prolong_of_ones_gives_multiplicity() {
        let mesh = unit_square(4);
        let g = build_dual_graph(&mesh);
        let d0 = partition_structured(&mesh, 2, 2).unwrap();
        let d = add_overlap(&d0, &g, &mesh, 1).unwrap();
        let mut acc = vec![0.0; d.n_dofs()];
        for i in 0..d.n_sub {
            let ones = vec![1.0; d.n_local_dofs(i)];
            d.scatter_add(i, &ones, &mut acc);
        }
        for n in 0..mesh.n_nodes() {
            let mult = (0..d.n_sub)
                .filter(|&i| d.overlap_nodes[i].binary_search(&n).is_ok())
                .count();
            assert_eq!(acc[n], mult as f64);
        }
    }

    #[test]
    fn restriction_matches_coordinate_oracle() {
        // Oracle: the δ=1 overlap node set of a block, built geometrically.
        // Block (si, sj) of a 2x2 partition of the 4x4 unit-square grid owns
        // cells within [si*0.5, si*0.5+0.5] x [sj*0.5, ...]; one element layer
        // of overlap reaches exactly one extra cell row/column, so the node
        // set is the block rectangle fattened by one grid spacing.
        let mesh = unit_square(4);
        let g = build_dual_graph(&mesh);
        let d0 = partition_structured(&mesh, 2, 2).unwrap();
        let d = add_overlap(&d0, &g, &mesh, 1).unwrap();
        let h = 0.25;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v: Vec<f64> = (0..d.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for i in 0..d.n_sub {
            let (si, sj) = (i % 2, i / 2);
            let x_lo = (si as f64 * 0.5 - h - 1e-12).max(-1e-12);
            let x_hi = (si as f64 * 0.5 + 0.5 + h + 1e-12).min(1.0 + 1e-12);
            let y_lo = (sj as f64 * 0.5 - h - 1e-12).max(-1e-12);
            let y_hi = (sj as f64 * 0.5 + 0.5 + h + 1e-12).min(1.0 + 1e-12);
            let expected_nodes: Vec<usize> = (0..mesh.n_nodes())
                .filter(|&n| {
                    let p = mesh.node_coords[n];
                    p[0] >= x_lo && p[0] <= x_hi && p[1] >= y_lo && p[1] <= y_hi
                })
                .collect();
            assert_eq!(d.overlap_nodes[i], expected_nodes, "subdomain {i}");
            let back = d.prolong(i, &d.restrict(i, &v).unwrap()).unwrap();
            for (n, val) in back.iter().enumerate() {
                if expected_nodes.contains(&n) {
                    assert_eq!(*val, v[n]);
                } else {
                    assert_eq!(*val, 0.0);
                }
            }
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let mesh = unit_square(2);
        let d = partition_structured(&mesh, 2, 2).unwrap();
        assert!(d.restrict(0, &[1.0, 2.0]).is_err());
        assert!(d.prolong(0, &[1.0]).is_err());
    }
}
