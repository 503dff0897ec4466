//! Triangle meshes, their combinatorics, OBJ I/O and test-mesh generators.

mod generate;
mod hull;
mod obj;
mod topology;

pub use generate::{
    disk, flip_edge, icosahedron, octahedron, random_flipped_triangulation, random_inscribed,
    tetrahedron, torus, TorusGrid,
};
pub use hull::convex_hull;
pub use obj::{load_obj, read_obj, save_obj, write_obj};
pub use topology::{
    build_topology, dual_graph, incidence_and_weights, DualArc, DualGraph, EdgeRecord, GraphData,
    MeshTopology,
};

use crate::error::{Error, Result};
use crate::Vec3;

/// Indexed triangle mesh with consistently oriented faces.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub positions: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh, checking face indices and repeated vertices.
    ///
    /// Manifoldness and orientation are checked by [`build_topology`].
    pub fn new(positions: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Self { positions, faces };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn empty() -> Self {
        Self {
            positions: Vec::new(),
            faces: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        for (f, face) in self.faces.iter().enumerate() {
            for &index in face {
                if index >= n {
                    return Err(Error::IndexOutOfRange {
                        face: f,
                        index,
                        vertex_count: n,
                    });
                }
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(Error::RepeatedVertex { face: f });
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Diagonal of the axis-aligned bounding box; zero for an empty mesh.
    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(&self.positions)
    }

    /// Returns a copy with the given positions and the same connectivity.
    pub fn with_positions(&self, positions: Vec<Vec3>) -> Self {
        assert_eq!(positions.len(), self.positions.len());
        Self {
            positions,
            faces: self.faces.clone(),
        }
    }
}

pub fn bbox_diagonal(points: &[Vec3]) -> f64 {
    let Some(first) = points.first() else {
        return 0.0;
    };
    let (mut lo, mut hi) = (*first, *first);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).norm()
}

/// Scale-invariant degeneracy test: area below `1e-12 * longest_edge^2`.
pub fn is_degenerate_triangle(p: &Vec3, q: &Vec3, r: &Vec3) -> bool {
    triangle_quality(p, q, r) < crate::DEGENERACY_THRESHOLD
}

/// Area divided by the squared longest edge. Zero for collapsed triangles.
pub fn triangle_quality(p: &Vec3, q: &Vec3, r: &Vec3) -> f64 {
    let area = 0.5 * (q - p).cross(&(r - p)).norm();
    let longest = (q - p)
        .norm_squared()
        .max((r - q).norm_squared())
        .max((p - r).norm_squared());
    if longest == 0.0 || !area.is_finite() {
        0.0
    } else {
        area / longest
    }
}
