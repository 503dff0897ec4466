//! Circle-angle energies: the conformal Willmore energy `W`, its quadratic
//! variant `W2` and the valence-weighted `W2w`.
//!
//! For closed meshes
//!
//! ```text
//! W   = sum_e beta(e) - pi |V|
//! W2  = sum_e beta(e)^2 - c,              c   = 4 pi^2 1^t (M M^t)^{-1} 1
//! W2w = sum_e (n_i + n_j) beta(e)^2 - cw, cw  = 4 pi^2 1^t (M N^{-1} M^t)^{-1} 1
//! ```
//!
//! On meshes with boundary the sums run over interior edges, `W` subtracts
//! `pi` per interior vertex, and the quadratic energies carry no constant.

pub mod circle;
pub(crate) mod gradient;
mod mobius;

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use circle::{beta, beta_from_points, circumcircle, cos_beta_with_gradient, Circumcircle};
pub use gradient::{finite_difference_gradient, gradient, GradientField, GradientMode};
pub use mobius::sphere_inversion;

use crate::error::{Error, Result};
use crate::linalg::solve_vertex_system;
use crate::mesh::{incidence_and_weights, GraphData, MeshTopology, TriangleMesh};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnergyKind {
    W,
    W2,
    W2w,
}

impl EnergyKind {
    pub const ALL: [EnergyKind; 3] = [EnergyKind::W, EnergyKind::W2, EnergyKind::W2w];
}

impl fmt::Display for EnergyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnergyKind::W => "W",
            EnergyKind::W2 => "W2",
            EnergyKind::W2w => "W2w",
        })
    }
}

impl FromStr for EnergyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "w" => Ok(EnergyKind::W),
            "w2" => Ok(EnergyKind::W2),
            "w2w" | "w2,w" => Ok(EnergyKind::W2w),
            _ => Err(Error::InvalidParameter(format!(
                "unknown energy kind {s:?}"
            ))),
        }
    }
}

/// Intersection angles of all interior edges, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleVector {
    /// Index into `MeshTopology::edges` for each value.
    pub edges: Vec<usize>,
    pub values: Vec<f64>,
}

impl AngleVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::min)
    }

    pub fn max(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    /// Per-vertex sums of incident angles.
    pub fn vertex_sums(&self, topology: &MeshTopology) -> Vec<f64> {
        let mut sums = vec![0.0; topology.vertex_count];
        for (&e, &b) in self.edges.iter().zip(&self.values) {
            let rec = &topology.edges[e];
            sums[rec.i] += b;
            sums[rec.j] += b;
        }
        sums
    }

    /// Values divided by pi, ascending.
    pub fn sorted_over_pi(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.iter().map(|b| b / PI).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// CSV with columns `i,j,k,l,beta_over_pi`.
    pub fn write_csv(&self, topology: &MeshTopology, mut w: impl Write) -> Result<()> {
        writeln!(w, "i,j,k,l,beta_over_pi")?;
        for (&e, &b) in self.edges.iter().zip(&self.values) {
            let rec = &topology.edges[e];
            let l = rec.l.expect("interior edge");
            writeln!(w, "{},{},{},{},{:.17e}", rec.i, rec.j, rec.k, l, b / PI)?;
        }
        Ok(())
    }
}

pub fn angle_vector(mesh: &TriangleMesh, topology: &MeshTopology) -> Result<AngleVector> {
    let mut edges = Vec::with_capacity(topology.interior_edge_count());
    let mut values = Vec::with_capacity(topology.interior_edge_count());
    for (idx, rec) in topology.interior_edges() {
        let b = beta(rec, &mesh.positions).map_err(|source| Error::Edge {
            i: rec.i,
            j: rec.j,
            source: Box::new(source),
        })?;
        edges.push(idx);
        values.push(b);
    }
    Ok(AngleVector { edges, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub kind: EnergyKind,
    pub value: f64,
    /// Normalization constant subtracted, for `W2`/`W2w` on closed meshes.
    pub constant: Option<f64>,
}

/// `4 pi^2 1^t (M M^t)^{-1} 1`.
pub fn normalization_c(graph: &GraphData) -> Result<f64> {
    normalization(graph, false)
}

/// `4 pi^2 1^t (M N^{-1} M^t)^{-1} 1`.
pub fn normalization_cw(graph: &GraphData) -> Result<f64> {
    normalization(graph, true)
}

fn normalization(graph: &GraphData, weighted: bool) -> Result<f64> {
    let y = solve_vertex_system(graph, weighted, &vec![1.0; graph.vertex_count])?;
    Ok(4.0 * PI * PI * y.iter().sum::<f64>())
}

/// `sum_e w_e x_e^2` with `w_e = n_i + n_j`.
pub fn quadratic_edge_form(graph: &GraphData, x: &[f64]) -> f64 {
    graph
        .edge_weight
        .iter()
        .zip(x)
        .map(|(w, v)| w * v * v)
        .sum()
}

/// Per-vertex form: squared angle sums plus half the squared pairwise
/// differences of angles at each vertex. Equals [`quadratic_edge_form`].
pub fn quadratic_vertex_form(graph: &GraphData, x: &[f64]) -> f64 {
    let mut star: Vec<Vec<f64>> = vec![Vec::new(); graph.vertex_count];
    for (&[a, b], &v) in graph.edges.iter().zip(x) {
        star[a].push(v);
        star[b].push(v);
    }
    star.iter()
        .map(|vals| {
            let sum: f64 = vals.iter().sum();
            let mut spread = 0.0;
            for p in vals {
                for q in vals {
                    spread += (p - q) * (p - q);
                }
            }
            sum * sum + 0.5 * spread
        })
        .sum()
}

/// How `W2w` is evaluated; the two forms agree algebraically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum W2wForm {
    #[default]
    Edge,
    Vertex,
}

/// Energy of a given kind as a function of vertex positions, with the
/// combinatorial data precomputed.
#[derive(Debug, Clone)]
pub struct Functional {
    pub kind: EnergyKind,
    /// Per topology edge: 1 for `W`/`W2`, `n_i + n_j` for `W2w`.
    edge_weight: Vec<f64>,
    /// Subtracted constant (`pi * interior vertices` for `W`).
    pub constant: f64,
    pub closed: bool,
    /// Angles below this contribute no gradient for `W`.
    pub w_threshold: f64,
}

/// Value, gradient and angle range at one configuration.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Vec<Vec3>,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Functional {
    pub fn new(topology: &MeshTopology, kind: EnergyKind, w_threshold: f64) -> Result<Self> {
        let graph = if topology.is_closed() && kind != EnergyKind::W {
            Some(incidence_and_weights(topology)?)
        } else {
            None
        };
        Self::with_graph(topology, kind, graph.as_ref(), w_threshold)
    }

    /// As [`Functional::new`], reusing precomputed graph data for closed meshes.
    pub fn with_graph(
        topology: &MeshTopology,
        kind: EnergyKind,
        graph: Option<&GraphData>,
        w_threshold: f64,
    ) -> Result<Self> {
        let closed = topology.is_closed();
        let edge_weight = match kind {
            EnergyKind::W2w => topology
                .edges
                .iter()
                .map(|e| (topology.valence[e.i] + topology.valence[e.j]) as f64)
                .collect(),
            _ => vec![1.0; topology.edges.len()],
        };
        let owned;
        let graph = match (closed, graph) {
            (true, Some(g)) => Some(g),
            (true, None) if kind != EnergyKind::W => {
                owned = incidence_and_weights(topology)?;
                Some(&owned)
            }
            _ => None,
        };
        let constant = match (kind, graph) {
            (EnergyKind::W, _) => PI * topology.interior_vertex_count() as f64,
            (EnergyKind::W2, Some(g)) => normalization_c(g)?,
            (EnergyKind::W2w, Some(g)) => normalization_cw(g)?,
            _ => 0.0,
        };
        Ok(Self {
            kind,
            edge_weight,
            constant,
            closed,
            w_threshold,
        })
    }

    fn edge_term(&self, edge: usize, b: f64) -> f64 {
        match self.kind {
            EnergyKind::W => b,
            _ => self.edge_weight[edge] * b * b,
        }
    }

    pub fn value(&self, positions: &[Vec3], topology: &MeshTopology) -> Result<f64> {
        let mut sum = 0.0;
        for (idx, rec) in topology.interior_edges() {
            sum += self.edge_term(idx, edge_beta(rec, positions)?);
        }
        Ok(sum - self.constant)
    }

    pub fn evaluate(&self, positions: &[Vec3], topology: &MeshTopology) -> Result<Evaluation> {
        let mut grad = vec![Vec3::zeros(); positions.len()];
        let mut sum = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (idx, rec) in topology.interior_edges() {
            let b = edge_beta(rec, positions)?;
            lo = lo.min(b);
            hi = hi.max(b);
            sum += self.edge_term(idx, b);

            // d(term)/d(cos beta)
            let coeff = match self.kind {
                EnergyKind::W if b < self.w_threshold || b.sin() == 0.0 => continue,
                EnergyKind::W => -1.0 / b.sin(),
                _ => -2.0 * self.edge_weight[idx] * beta_over_sin(b),
            };
            let (i, j, k, l) = rec.interior().expect("interior edge");
            let (_, g) =
                cos_beta_with_gradient(&positions[i], &positions[j], &positions[k], &positions[l]);
            for (v, gv) in [i, j, k, l].into_iter().zip(g) {
                grad[v] += gv * coeff;
            }
        }
        Ok(Evaluation {
            value: sum - self.constant,
            gradient: grad,
            beta_min: lo,
            beta_max: hi,
        })
    }
}

fn edge_beta(rec: &crate::mesh::EdgeRecord, positions: &[Vec3]) -> Result<f64> {
    beta(rec, positions).map_err(|source| Error::Edge {
        i: rec.i,
        j: rec.j,
        source: Box::new(source),
    })
}

fn beta_over_sin(b: f64) -> f64 {
    if b < 1e-4 {
        1.0 + b * b / 6.0
    } else {
        b / b.sin()
    }
}

pub fn energy_w(mesh: &TriangleMesh, topology: &MeshTopology) -> Result<EnergyValue> {
    let f = Functional::with_graph(topology, EnergyKind::W, None, 0.0)?;
    Ok(EnergyValue {
        kind: EnergyKind::W,
        value: f.value(&mesh.positions, topology)?,
        constant: None,
    })
}

pub fn energy_w2(
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    graph: Option<&GraphData>,
) -> Result<EnergyValue> {
    quadratic_energy(mesh, topology, graph, EnergyKind::W2)
}

pub fn energy_w2w(
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    graph: Option<&GraphData>,
) -> Result<EnergyValue> {
    quadratic_energy(mesh, topology, graph, EnergyKind::W2w)
}

/// `W2w` evaluated in the requested form. The vertex form needs a closed mesh.
pub fn energy_w2w_with_form(
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    graph: &GraphData,
    form: W2wForm,
) -> Result<EnergyValue> {
    let angles = angle_vector(mesh, topology)?;
    if angles.len() != graph.edge_count() {
        return Err(Error::BoundaryPresent {
            count: topology.boundary_edge_count(),
        });
    }
    let raw = match form {
        W2wForm::Edge => quadratic_edge_form(graph, &angles.values),
        W2wForm::Vertex => quadratic_vertex_form(graph, &angles.values),
    };
    let constant = normalization_cw(graph)?;
    Ok(EnergyValue {
        kind: EnergyKind::W2w,
        value: raw - constant,
        constant: Some(constant),
    })
}

fn quadratic_energy(
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    graph: Option<&GraphData>,
    kind: EnergyKind,
) -> Result<EnergyValue> {
    let f = Functional::with_graph(topology, kind, graph, 0.0)?;
    Ok(EnergyValue {
        kind,
        value: f.value(&mesh.positions, topology)?,
        constant: f.closed.then_some(f.constant),
    })
}

pub fn energy(
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    kind: EnergyKind,
) -> Result<EnergyValue> {
    match kind {
        EnergyKind::W => energy_w(mesh, topology),
        EnergyKind::W2 => energy_w2(mesh, topology, None),
        EnergyKind::W2w => energy_w2w(mesh, topology, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_topology, disk, icosahedron, octahedron, tetrahedron, torus};
    use approx::assert_relative_eq;

    fn regular() -> [(TriangleMesh, f64, f64, f64); 3] {
        [
            (
                tetrahedron(),
                2.0 * PI / 3.0,
                8.0 * PI * PI / 3.0,
                16.0 * PI * PI,
            ),
            (octahedron(), PI / 2.0, 3.0 * PI * PI, 24.0 * PI * PI),
            (
                icosahedron(),
                2.0 * PI / 5.0,
                24.0 * PI * PI / 5.0,
                48.0 * PI * PI,
            ),
        ]
    }

    #[test]
    fn regular_solids_have_uniform_angles_and_zero_energy() {
        for (mesh, b, c, cw) in regular() {
            let topo = build_topology(&mesh).unwrap();
            let graph = incidence_and_weights(&topo).unwrap();
            let angles = angle_vector(&mesh, &topo).unwrap();
            for v in &angles.values {
                assert_relative_eq!(*v, b, epsilon = 1e-12);
            }
            assert_relative_eq!(normalization_c(&graph).unwrap(), c, max_relative = 1e-12);
            assert_relative_eq!(normalization_cw(&graph).unwrap(), cw, max_relative = 1e-12);
            for kind in EnergyKind::ALL {
                let e = energy(&mesh, &topo, kind).unwrap();
                assert!(e.value.abs() < 1e-10, "{kind}: {}", e.value);
            }
        }
    }

    #[test]
    fn torus_energies_are_positive() {
        let mesh = torus(2.0, 1.0, 16, 16).unwrap();
        let topo = build_topology(&mesh).unwrap();
        let w2 = energy(&mesh, &topo, EnergyKind::W2).unwrap();
        assert!(w2.value > 0.0);
        assert!(w2.constant.is_some());
        assert!(energy(&mesh, &topo, EnergyKind::W).unwrap().value > 0.0);
    }

    #[test]
    fn vertex_angle_sums_are_at_least_two_pi() {
        let mesh = torus(3.0, 1.2, 10, 8).unwrap();
        let topo = build_topology(&mesh).unwrap();
        let angles = angle_vector(&mesh, &topo).unwrap();
        for s in angles.vertex_sums(&topo) {
            assert!(s >= 2.0 * PI - 1e-9, "{s}");
        }
    }

    #[test]
    fn boundary_mesh_energies_have_no_constant() {
        let mesh = disk(3, 8, 0.4).unwrap();
        let topo = build_topology(&mesh).unwrap();
        let w2 = energy(&mesh, &topo, EnergyKind::W2).unwrap();
        assert_eq!(w2.constant, None);
        let angles = angle_vector(&mesh, &topo).unwrap();
        let raw: f64 = angles.values.iter().map(|b| b * b).sum();
        assert_relative_eq!(w2.value, raw, max_relative = 1e-14);

        let w = energy(&mesh, &topo, EnergyKind::W).unwrap();
        let interior = topo.interior_vertex_count() as f64;
        assert_relative_eq!(
            w.value,
            angles.values.iter().sum::<f64>() - PI * interior,
            max_relative = 1e-14
        );
    }

    #[test]
    fn flat_fan_angles_are_in_range() {
        let mesh = disk(1, 6, 0.0).unwrap();
        let topo = build_topology(&mesh).unwrap();
        let angles = angle_vector(&mesh, &topo).unwrap();
        assert_eq!(angles.len(), 6);
        assert!(angles.values.iter().all(|&b| (0.0..=PI).contains(&b)));
    }

    #[test]
    fn vertex_and_edge_forms_agree() {
        let mesh = icosahedron();
        let topo = build_topology(&mesh).unwrap();
        let graph = incidence_and_weights(&topo).unwrap();
        let x: Vec<f64> = (0..graph.edge_count())
            .map(|e| 0.1 + (e as f64 * 0.37).sin().abs())
            .collect();
        assert_relative_eq!(
            quadratic_edge_form(&graph, &x),
            quadratic_vertex_form(&graph, &x),
            max_relative = 1e-12
        );
        let e = energy_w2w_with_form(&mesh, &topo, &graph, W2wForm::Edge).unwrap();
        let v = energy_w2w_with_form(&mesh, &topo, &graph, W2wForm::Vertex).unwrap();
        assert!((e.value - v.value).abs() < 1e-9);
    }

    #[test]
    fn csv_dump_has_one_row_per_interior_edge() {
        let mesh = tetrahedron();
        let topo = build_topology(&mesh).unwrap();
        let angles = angle_vector(&mesh, &topo).unwrap();
        let mut buf = Vec::new();
        angles.write_csv(&topo, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("i,j,k,l,beta_over_pi"));
        for line in lines {
            let ratio: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert_relative_eq!(ratio, 2.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("W2w".parse::<EnergyKind>().unwrap(), EnergyKind::W2w);
        assert_eq!("w".parse::<EnergyKind>().unwrap(), EnergyKind::W);
        assert!("W3".parse::<EnergyKind>().is_err());
    }

    #[test]
    fn degenerate_face_is_reported_with_edge() {
        let mut mesh = tetrahedron();
        let p = mesh.positions[1];
        mesh.positions[0] = p;
        let topo = build_topology(&mesh).unwrap();
        let err = angle_vector(&mesh, &topo).unwrap_err();
        assert!(matches!(err, Error::Edge { .. }));
    }
}
