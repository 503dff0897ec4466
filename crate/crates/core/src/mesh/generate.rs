//! Test meshes: regular solids, tori of revolution, random inscribed hulls, disks.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{build_topology, convex_hull, TriangleMesh};
use crate::error::{Error, Result};
use crate::Vec3;

/// Regular tetrahedron inscribed in the unit sphere.
pub fn tetrahedron() -> TriangleMesh {
    let s = (8.0f64 / 9.0).sqrt();
    let t = (2.0f64 / 3.0).sqrt();
    let pts = [
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(s, 0.0, -1.0 / 3.0),
        Vec3::new(-s / 2.0, t, -1.0 / 3.0),
        Vec3::new(-s / 2.0, -t, -1.0 / 3.0),
    ];
    convex_hull(&pts).expect("regular tetrahedron")
}

/// Regular octahedron with vertices at the unit axis points.
pub fn octahedron() -> TriangleMesh {
    let pts = [
        Vec3::x(),
        -Vec3::x(),
        Vec3::y(),
        -Vec3::y(),
        Vec3::z(),
        -Vec3::z(),
    ];
    convex_hull(&pts).expect("regular octahedron")
}

/// Regular icosahedron inscribed in the unit sphere.
pub fn icosahedron() -> TriangleMesh {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut pts = Vec::with_capacity(12);
    for s1 in [-1.0, 1.0] {
        for s2 in [-1.0, 1.0] {
            pts.push(Vec3::new(0.0, s1, s2 * phi));
            pts.push(Vec3::new(s1, s2 * phi, 0.0));
            pts.push(Vec3::new(s2 * phi, 0.0, s1));
        }
    }
    let pts: Vec<Vec3> = pts.into_iter().map(|p| p.normalize()).collect();
    convex_hull(&pts).expect("regular icosahedron")
}

/// Grid dimensions of a mesh produced by [`torus`].
///
/// Vertex `(a, b)` has index `a * minor + b`, where `a` runs around the
/// rotation axis and `b` around the tube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    pub major: usize,
    pub minor: usize,
}

impl TorusGrid {
    pub fn index(&self, a: usize, b: usize) -> usize {
        (a % self.major) * self.minor + (b % self.minor)
    }
}

/// Triangulated torus of revolution around the z axis.
///
/// Grid quads are split in a checkerboard pattern: along the
/// `(a, b+1)-(a+1, b)` diagonal when `a + b` is even, along `(a, b)-(a+1, b+1)`
/// otherwise. With `m` and `n` even the pattern closes up and the
/// triangulation has the symmetry of the square grid. A single diagonal
/// direction would shear the lattice, and the optimizer cannot undo that
/// since it only moves vertices.
pub fn torus(major_radius: f64, minor_radius: f64, m: usize, n: usize) -> Result<TriangleMesh> {
    if !(minor_radius > 0.0 && major_radius > minor_radius) {
        return Err(Error::InvalidParameter(format!(
            "torus radii must satisfy R > r > 0, got R = {major_radius}, r = {minor_radius}"
        )));
    }
    if m < 3 || n < 3 {
        return Err(Error::InvalidParameter(format!(
            "torus grid needs m, n >= 3, got {m} x {n}"
        )));
    }
    let grid = TorusGrid { major: m, minor: n };
    let mut positions = Vec::with_capacity(m * n);
    for a in 0..m {
        let u = TAU * a as f64 / m as f64;
        for b in 0..n {
            let v = TAU * b as f64 / n as f64;
            let rho = major_radius + minor_radius * v.cos();
            positions.push(Vec3::new(
                rho * u.cos(),
                rho * u.sin(),
                minor_radius * v.sin(),
            ));
        }
    }
    let mut faces = Vec::with_capacity(2 * m * n);
    for a in 0..m {
        for b in 0..n {
            let p00 = grid.index(a, b);
            let p10 = grid.index(a + 1, b);
            let p11 = grid.index(a + 1, b + 1);
            let p01 = grid.index(a, b + 1);
            if (a + b) % 2 == 0 {
                faces.push([p00, p10, p01]);
                faces.push([p10, p11, p01]);
            } else {
                faces.push([p00, p10, p11]);
                faces.push([p00, p11, p01]);
            }
        }
    }
    TriangleMesh::new(positions, faces)
}

/// Convex hull of `count` points drawn uniformly on the unit sphere and
/// scaled by `semiaxes`. Deterministic in `seed`.
pub fn random_inscribed(count: usize, semiaxes: Vec3, seed: u64) -> Result<TriangleMesh> {
    if count < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 points, got {count}"
        )));
    }
    if semiaxes.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "semiaxes must be positive, got {semiaxes:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let len = v.norm();
        if len > 1e-12 {
            points.push((v / len).component_mul(&semiaxes));
        }
    }
    convex_hull(&points)
}

/// Flips an interior edge: faces `(i, j, k)`, `(j, i, l)` become
/// `(i, l, k)`, `(l, j, k)`.
pub fn flip_edge(mesh: &TriangleMesh, i: usize, j: usize) -> Result<TriangleMesh> {
    let topo = build_topology(mesh)?;
    let key = (i.min(j), i.max(j));
    let edge = topo
        .edges
        .iter()
        .find(|e| (e.i.min(e.j), e.i.max(e.j)) == key)
        .ok_or_else(|| Error::InvalidParameter(format!("no edge ({i}, {j})")))?;
    let (i, j, k, l) = edge.interior().ok_or(Error::BoundaryEdge(edge.i, edge.j))?;
    if topo.valence[i] <= 3 || topo.valence[j] <= 3 {
        return Err(Error::InvalidParameter(format!(
            "flipping ({i}, {j}) would leave a vertex of valence 2"
        )));
    }
    if topo.neighbors()[k].binary_search(&l).is_ok() {
        return Err(Error::InvalidParameter(format!(
            "flipping ({i}, {j}) would duplicate edge ({k}, {l})"
        )));
    }
    let mut faces = mesh.faces.clone();
    faces[edge.f1] = [i, l, k];
    faces[edge.f2.expect("interior")] = [l, j, k];
    TriangleMesh::new(mesh.positions.clone(), faces)
}

/// A random simplicial sphere: the hull of `count` random sphere points
/// followed by up to `flips` random edge flips. Positions are kept, so the
/// realization is generally non-convex.
pub fn random_flipped_triangulation(count: usize, flips: usize, seed: u64) -> Result<TriangleMesh> {
    let mut mesh = random_inscribed(count, Vec3::new(1.0, 1.0, 1.0), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    for _ in 0..flips {
        let topo = build_topology(&mesh)?;
        let e = topo.edges[rng.random_range(0..topo.edges.len())];
        if let Ok(next) = flip_edge(&mesh, e.i, e.j) {
            let degenerate = next.faces.iter().any(|f| {
                super::is_degenerate_triangle(
                    &next.positions[f[0]],
                    &next.positions[f[1]],
                    &next.positions[f[2]],
                )
            });
            if !degenerate {
                mesh = next;
            }
        }
    }
    Ok(mesh)
}

/// Polar-grid disk of unit radius lifted to `z = bump * (1 - rho^2)`.
///
/// Vertex 0 is the center; ring `r` (1-based) holds `sectors` vertices.
pub fn disk(rings: usize, sectors: usize, bump: f64) -> Result<TriangleMesh> {
    if rings < 1 || sectors < 3 {
        return Err(Error::InvalidParameter(format!(
            "disk needs rings >= 1 and sectors >= 3, got {rings} and {sectors}"
        )));
    }
    let idx = |r: usize, s: usize| 1 + (r - 1) * sectors + s % sectors;
    let mut positions = vec![Vec3::new(0.0, 0.0, bump)];
    for r in 1..=rings {
        let rho = r as f64 / rings as f64;
        for s in 0..sectors {
            let t = TAU * s as f64 / sectors as f64 + PI * (r % 2) as f64 / sectors as f64;
            positions.push(Vec3::new(
                rho * t.cos(),
                rho * t.sin(),
                bump * (1.0 - rho * rho),
            ));
        }
    }
    let mut faces = Vec::new();
    for s in 0..sectors {
        faces.push([0, idx(1, s), idx(1, s + 1)]);
    }
    for r in 1..rings {
        for s in 0..sectors {
            faces.push([idx(r, s), idx(r + 1, s), idx(r + 1, s + 1)]);
            faces.push([idx(r, s), idx(r + 1, s + 1), idx(r, s + 1)]);
        }
    }
    TriangleMesh::new(positions, faces)
}
