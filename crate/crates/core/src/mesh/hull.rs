//! Incremental 3D convex hull with exact orientation predicates.

use std::collections::HashSet;

use robust::Coord3D;

use super::{bbox_diagonal, TriangleMesh};
use crate::error::{Error, Result};
use crate::Vec3;

fn coord(p: &Vec3) -> Coord3D<f64> {
    Coord3D {
        x: p.x,
        y: p.y,
        z: p.z,
    }
}

/// Positive when `p` lies on the side the normal `(b - a) x (c - a)` points to.
fn side(a: &Vec3, b: &Vec3, c: &Vec3, p: &Vec3) -> f64 {
    -robust::orient3d(coord(a), coord(b), coord(c), coord(p))
}

/// Triangulated boundary of the convex hull, oriented outward.
///
/// Only points that end up as hull vertices are kept; they retain their
/// relative input order.
pub fn convex_hull(points: &[Vec3]) -> Result<TriangleMesh> {
    if points.len() < 4 {
        return Err(Error::DegenerateInput(format!(
            "convex hull needs at least 4 points, got {}",
            points.len()
        )));
    }
    let scale = bbox_diagonal(points);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }

    let [a, b, c, d] = initial_simplex(points, scale)?;
    let mut faces: Vec<Option<[usize; 3]>> = vec![
        Some([a, b, c]),
        Some([b, a, d]),
        Some([c, b, d]),
        Some([a, c, d]),
    ];

    let mut visible_edges = HashSet::new();
    for p in 0..points.len() {
        if p == a || p == b || p == c || p == d {
            continue;
        }
        let pt = &points[p];
        visible_edges.clear();
        let mut any = false;
        for slot in faces.iter_mut() {
            let Some(f) = *slot else { continue };
            if side(&points[f[0]], &points[f[1]], &points[f[2]], pt) > 0.0 {
                any = true;
                visible_edges.insert((f[0], f[1]));
                visible_edges.insert((f[1], f[2]));
                visible_edges.insert((f[2], f[0]));
                *slot = None;
            }
        }
        if !any {
            continue;
        }
        let mut horizon: Vec<(usize, usize)> = visible_edges
            .iter()
            .copied()
            .filter(|&(u, v)| !visible_edges.contains(&(v, u)))
            .collect();
        horizon.sort_unstable();
        faces.extend(horizon.into_iter().map(|(u, v)| Some([u, v, p])));
        if faces.len() > 4 * points.len() {
            faces.retain(Option::is_some);
        }
    }

    let faces: Vec<[usize; 3]> = faces.into_iter().flatten().collect();
    let mut remap = vec![usize::MAX; points.len()];
    for f in &faces {
        for &v in f {
            remap[v] = 0;
        }
    }
    let mut positions = Vec::new();
    for (v, slot) in remap.iter_mut().enumerate() {
        if *slot == 0 {
            *slot = positions.len();
            positions.push(points[v]);
        }
    }
    let faces = faces
        .into_iter()
        .map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]])
        .collect();
    TriangleMesh::new(positions, faces)
}

/// Four affinely independent points with the first three facing away from the fourth.
fn initial_simplex(points: &[Vec3], scale: f64) -> Result<[usize; 4]> {
    let tol = 1e-12 * scale;
    let a = 0;
    let b = farthest(points, |p| (p - points[a]).norm());
    let ab = points[b] - points[a];
    if ab.norm() <= tol {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let dir = ab.normalize();
    let c = farthest(points, |p| (p - points[a]).cross(&dir).norm());
    let normal = ab.cross(&(points[c] - points[a]));
    if normal.norm() <= tol * ab.norm() {
        return Err(Error::DegenerateInput("all points are collinear".into()));
    }
    let n = normal.normalize();
    let d = farthest(points, |p| (p - points[a]).dot(&n).abs());
    if (points[d] - points[a]).dot(&n).abs() <= tol {
        return Err(Error::DegenerateInput("all points are coplanar".into()));
    }
    if side(&points[a], &points[b], &points[c], &points[d]) > 0.0 {
        Ok([a, c, b, d])
    } else {
        Ok([a, b, c, d])
    }
}

fn farthest(points: &[Vec3], dist: impl Fn(&Vec3) -> f64) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (idx, p) in points.iter().enumerate() {
        let v = dist(p);
        if v > best.1 {
            best = (idx, v);
        }
    }
    best.0
}
