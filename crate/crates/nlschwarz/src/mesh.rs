//! Structured 2D triangular meshes with boundary tags.
//!
//! A rectangle is meshed by a uniform grid of cells, each split into two
//! triangles along the lower-left to upper-right diagonal. Nodes carry a
//! boundary tag used for Dirichlet elimination and for the RGDSW coarse
//! space classification.

use std::io::Write;

use crate::error::{Error, Result};

/// Classification of a mesh node with respect to the domain boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Neumann,
}

/// Which edges of the rectangle carry Dirichlet data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcSpec {
    /// Whole boundary Dirichlet (the diffusion problem on the unit square).
    AllDirichlet,
    /// Left and right edges Dirichlet, top and bottom Neumann (the clamped beam).
    Beam,
}

/// P1 triangulation of a rectangle.
#[derive(Clone, Debug)]
pub struct Mesh {
    /// Node coordinates in meters.
    pub node_coords: Vec<[f64; 2]>,
    /// Node index triples, counterclockwise.
    pub elements: Vec<[usize; 3]>,
    /// One tag per node.
    pub boundary_tag: Vec<BoundaryTag>,
    /// 1 for scalar problems, 2 for planar displacement fields.
    pub dofs_per_node: usize,
    /// Cell counts of the generating grid; available on structured meshes.
    pub cells: Option<[usize; 2]>,
    /// Rectangle extent (width, height) in meters.
    pub extent: [f64; 2],
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes() * self.dofs_per_node
    }

    /// Signed area of element `e` (positive for counterclockwise node order).
    pub fn element_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.elements[e];
        let pa = self.node_coords[a];
        let pb = self.node_coords[b];
        let pc = self.node_coords[c];
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    /// Constant P1 shape function gradients on element `e`, with its area.
    ///
    /// Returns `([grad φ_0, grad φ_1, grad φ_2], area)`.
    pub fn element_gradients(&self, e: usize) -> ([[f64; 2]; 3], f64) {
        let [a, b, c] = self.elements[e];
        let pa = self.node_coords[a];
        let pb = self.node_coords[b];
        let pc = self.node_coords[c];
        let two_a = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        let g = [
            [(pb[1] - pc[1]) / two_a, (pc[0] - pb[0]) / two_a],
            [(pc[1] - pa[1]) / two_a, (pa[0] - pc[0]) / two_a],
            [(pa[1] - pb[1]) / two_a, (pb[0] - pa[0]) / two_a],
        ];
        (g, 0.5 * two_a)
    }

    /// Element centroid.
    pub fn element_centroid(&self, e: usize) -> [f64; 2] {
        let [a, b, c] = self.elements[e];
        let pa = self.node_coords[a];
        let pb = self.node_coords[b];
        let pc = self.node_coords[c];
        [
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
        ]
    }

    /// For each node, the sorted list of elements containing it.
    pub fn node_to_elements(&self) -> Vec<Vec<usize>> {
        let mut map = vec![Vec::new(); self.n_nodes()];
        for (e, tri) in self.elements.iter().enumerate() {
            for &n in tri {
                map[n].push(e);
            }
        }
        map
    }

    /// Node adjacency through shared elements. For triangles this coincides
    /// with adjacency through shared element edges.
    pub fn node_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes()];
        for tri in &self.elements {
            for &a in tri {
                for &b in tri {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Plain-text dump: one `node <id> <x> <y> <tag>` line per node followed
    /// by one `element <id> <n0> <n1> <n2>` line per element.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# nodes {}", self.n_nodes())?;
        for (i, (p, tag)) in self.node_coords.iter().zip(&self.boundary_tag).enumerate() {
            let tag = match tag {
                BoundaryTag::Interior => "interior",
                BoundaryTag::Dirichlet => "dirichlet",
                BoundaryTag::Neumann => "neumann",
            };
            writeln!(w, "node {} {} {} {}", i, p[0], p[1], tag)?;
        }
        writeln!(w, "# elements {}", self.n_elements())?;
        for (e, tri) in self.elements.iter().enumerate() {
            writeln!(w, "element {} {} {} {}", e, tri[0], tri[1], tri[2])?;
        }
        Ok(())
    }
}

/// Uniform triangulation of a `width` x `height` rectangle with `nx` x `ny`
/// cells, two triangles per cell.
///
/// Node `j*(nx+1)+i` sits at `(i*width/nx, j*height/ny)`; cell `(i, j)` yields
/// elements `2*(j*nx+i)` (below the diagonal) and `2*(j*nx+i)+1` (above).
pub fn generate_structured_mesh(
    nx: usize,
    ny: usize,
    width: f64,
    height: f64,
    bc: BcSpec,
    dofs_per_node: usize,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "cell counts must be positive, got {nx}x{ny}"
        )));
    }
    if !(width > 0.0) || !(height > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if dofs_per_node != 1 && dofs_per_node != 2 {
        return Err(Error::InvalidArgument(format!(
            "dofs_per_node must be 1 or 2, got {dofs_per_node}"
        )));
    }

    let hx = width / nx as f64;
    let hy = height / ny as f64;
    let mut node_coords = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary_tag = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            node_coords.push([i as f64 * hx, j as f64 * hy]);
            let on_lr = i == 0 || i == nx;
            let on_tb = j == 0 || j == ny;
            let tag = match bc {
                BcSpec::AllDirichlet if on_lr || on_tb => BoundaryTag::Dirichlet,
                BcSpec::Beam if on_lr => BoundaryTag::Dirichlet,
                BcSpec::Beam if on_tb => BoundaryTag::Neumann,
                _ => BoundaryTag::Interior,
            };
            boundary_tag.push(tag);
        }
    }

    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let ll = j * (nx + 1) + i;
            let lr = ll + 1;
            let ul = ll + (nx + 1);
            let ur = ul + 1;
            elements.push([ll, lr, ur]);
            elements.push([ll, ur, ul]);
        }
    }

    Ok(Mesh {
        node_coords,
        elements,
        boundary_tag,
        dofs_per_node,
        cells: Some([nx, ny]),
        extent: [width, height],
    })
}
