//! Edge extraction, valences, incidence data and the dual graph.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::TriangleMesh;
use crate::error::{Error, Result};

/// An undirected mesh edge with its incident faces.
///
/// For an interior edge the faces are `(i, j, k)` and `(j, i, l)` up to
/// cyclic rotation. For a boundary edge, `(i, j, k)` is the single
/// incident face and `l`, `f2` are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRecord {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: Option<usize>,
    pub f1: usize,
    pub f2: Option<usize>,
}

impl EdgeRecord {
    pub fn is_boundary(&self) -> bool {
        self.l.is_none()
    }

    /// Opposite vertex in the second face, for interior edges.
    pub fn interior(&self) -> Option<(usize, usize, usize, usize)> {
        self.l.map(|l| (self.i, self.j, self.k, l))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshTopology {
    pub vertex_count: usize,
    pub face_count: usize,
    /// Sorted by `(min(i, j), max(i, j))`.
    pub edges: Vec<EdgeRecord>,
    pub valence: Vec<usize>,
    pub euler_characteristic: i64,
    pub is_boundary_vertex: Vec<bool>,
}

impl MeshTopology {
    pub fn is_closed(&self) -> bool {
        self.edges.iter().all(|e| !e.is_boundary())
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = (usize, &EdgeRecord)> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_boundary())
    }

    pub fn interior_edge_count(&self) -> usize {
        self.edges.len() - self.boundary_edge_count()
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count)
            .filter(|&v| self.is_boundary_vertex[v])
            .collect()
    }

    pub fn interior_vertex_count(&self) -> usize {
        self.is_boundary_vertex.iter().filter(|b| !**b).count()
    }

    /// Vertex adjacency lists, sorted.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Indices of the edges incident with each vertex.
    pub fn vertex_edges(&self) -> Vec<Vec<usize>> {
        let mut star = vec![Vec::new(); self.vertex_count];
        for (idx, e) in self.edges.iter().enumerate() {
            star[e.i].push(idx);
            star[e.j].push(idx);
        }
        star
    }

    fn require_closed(&self) -> Result<()> {
        match self.boundary_edge_count() {
            0 => Ok(()),
            count => Err(Error::BoundaryPresent { count }),
        }
    }
}

/// Extracts edges, valences and the Euler characteristic.
///
/// Meshes with boundary are accepted.
pub fn build_topology(mesh: &TriangleMesh) -> Result<MeshTopology> {
    mesh.validate()?;

    // directed half-edge (a, b) -> (face, opposite vertex)
    let mut half: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    let mut undirected: BTreeMap<(usize, usize), u8> = BTreeMap::new();

    for (f, &[a, b, c]) in mesh.faces.iter().enumerate() {
        for (u, v, w) in [(a, b, c), (b, c, a), (c, a, b)] {
            let key = (u.min(v), u.max(v));
            let count = undirected.entry(key).or_insert(0);
            *count += 1;
            if *count > 2 {
                return Err(Error::NonManifoldEdge(key.0, key.1));
            }
            if half.insert((u, v), (f, w)).is_some() {
                return Err(Error::InconsistentOrientation(key.0, key.1));
            }
        }
    }

    let mut valence = vec![0usize; mesh.vertex_count()];
    let mut is_boundary_vertex = vec![false; mesh.vertex_count()];
    let mut edges = Vec::with_capacity(undirected.len());

    for &(lo, hi) in undirected.keys() {
        valence[lo] += 1;
        valence[hi] += 1;
        let fwd = half.get(&(lo, hi)).copied();
        let bwd = half.get(&(hi, lo)).copied();
        let record = match (fwd, bwd) {
            (Some((f1, k)), Some((f2, l))) => EdgeRecord {
                i: lo,
                j: hi,
                k,
                l: Some(l),
                f1,
                f2: Some(f2),
            },
            (Some((f1, k)), None) => EdgeRecord {
                i: lo,
                j: hi,
                k,
                l: None,
                f1,
                f2: None,
            },
            (None, Some((f1, k))) => EdgeRecord {
                i: hi,
                j: lo,
                k,
                l: None,
                f1,
                f2: None,
            },
            (None, None) => unreachable!("every undirected edge has a half-edge"),
        };
        if record.is_boundary() {
            is_boundary_vertex[lo] = true;
            is_boundary_vertex[hi] = true;
        }
        edges.push(record);
    }

    let euler_characteristic =
        mesh.vertex_count() as i64 - edges.len() as i64 + mesh.face_count() as i64;

    Ok(MeshTopology {
        vertex_count: mesh.vertex_count(),
        face_count: mesh.face_count(),
        edges,
        valence,
        euler_characteristic,
        is_boundary_vertex,
    })
}

/// Combinatorial data of the edge graph: endpoints and valence weights.
///
/// The incidence matrix `M` (vertices x edges) and the diagonal weight
/// matrix `N` with entries `n_i + n_j` are materialized on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphData {
    pub vertex_count: usize,
    pub edges: Vec<[usize; 2]>,
    pub valence: Vec<usize>,
    /// `n_i + n_j` per edge.
    pub edge_weight: Vec<f64>,
}

impl GraphData {
    /// Builds graph data directly from an edge list.
    pub fn from_edges(vertex_count: usize, edges: Vec<[usize; 2]>) -> Self {
        let mut valence = vec![0usize; vertex_count];
        for &[a, b] in &edges {
            valence[a] += 1;
            valence[b] += 1;
        }
        let edge_weight = edges
            .iter()
            .map(|&[a, b]| (valence[a] + valence[b]) as f64)
            .collect();
        Self {
            vertex_count,
            edges,
            valence,
            edge_weight,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn incidence_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.vertex_count, self.edges.len());
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            m[(a, e)] = 1.0;
            m[(b, e)] = 1.0;
        }
        m
    }

    pub fn weight_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.edge_weight))
    }

    /// `M x`: per-vertex sums of edge values.
    pub fn vertex_sums(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.vertex_count];
        for (&[a, b], &v) in self.edges.iter().zip(x) {
            out[a] += v;
            out[b] += v;
        }
        out
    }

    /// `M^t y`: per-edge sums of endpoint values.
    pub fn edge_sums(&self, y: &[f64]) -> Vec<f64> {
        self.edges.iter().map(|&[a, b]| y[a] + y[b]).collect()
    }
}

/// Incidence data for a closed mesh.
pub fn incidence_and_weights(topology: &MeshTopology) -> Result<GraphData> {
    topology.require_closed()?;
    let edges = topology.edges.iter().map(|e| [e.i, e.j]).collect();
    Ok(GraphData::from_edges(topology.vertex_count, edges))
}

/// One dual arc: the two faces adjacent across a primal edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualArc {
    pub faces: [usize; 2],
    /// Index into `MeshTopology::edges`.
    pub edge: usize,
}

/// Dual graph of a closed mesh: nodes are faces, arcs are edges.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGraph {
    pub node_count: usize,
    pub arcs: Vec<DualArc>,
    /// Per node, the indices of incident arcs.
    pub incident: Vec<Vec<usize>>,
    /// Per primal vertex, the sorted arc indices of its star; these are the
    /// facial cycles of the dual.
    pub facial_cycles: Vec<Vec<usize>>,
}

impl DualGraph {
    pub fn is_cubic(&self) -> bool {
        self.incident.iter().all(|a| a.len() == 3)
    }

    pub fn other_end(&self, arc: usize, node: usize) -> usize {
        let [a, b] = self.arcs[arc].faces;
        if a == node {
            b
        } else {
            a
        }
    }
}

pub fn dual_graph(topology: &MeshTopology) -> Result<DualGraph> {
    topology.require_closed()?;
    let mut incident = vec![Vec::new(); topology.face_count];
    let mut arcs = Vec::with_capacity(topology.edges.len());
    for (idx, e) in topology.edges.iter().enumerate() {
        let f2 = e.f2.expect("closed mesh");
        incident[e.f1].push(idx);
        incident[f2].push(idx);
        arcs.push(DualArc {
            faces: [e.f1, f2],
            edge: idx,
        });
    }
    let mut facial_cycles = topology.vertex_edges();
    for c in &mut facial_cycles {
        c.sort_unstable();
    }
    Ok(DualGraph {
        node_count: topology.face_count,
        arcs,
        incident,
        facial_cycles,
    })
}
