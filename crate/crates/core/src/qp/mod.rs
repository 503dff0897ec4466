//! Abstract angles of the quadratic programs behind W2 and W2w, the sign
//! test on their multipliers and Rivin's cycle condition.
//!
//! For an edge graph with incidence matrix `M` the equality program
//! `min x^t x` s.t. `M x = 2 pi 1` is solved by `x = M^t lambda` with
//! `M M^t lambda = 2 pi 1`. The inequality program (`M x >= 2 pi 1`) has the
//! same solution exactly when `lambda >= 0`. The weighted variants replace
//! `x^t x` by `x^t N x`.

mod active_set;
mod cycles;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use active_set::InequalitySolution;
pub use cycles::{
    min_nonfacial_cycle_exhaustive, min_nonfacial_cycle_paths, CycleCertificate, CycleSearch,
};

use crate::error::{Error, Result};
use crate::linalg::{solve_vertex_system, vertex_operator};
use crate::mesh::{dual_graph, incidence_and_weights, DualGraph, GraphData, MeshTopology};

/// Entries of lambda in `(-LAMBDA_BAND, 0]` are treated as zero and reported as borderline.
pub const LAMBDA_BAND: f64 = 1e-10;
/// Dual graphs up to this many nodes get exhaustive cycle enumeration.
pub const EXHAUSTIVE_NODE_LIMIT: usize = 24;
/// Cap on closing paths examined per dual arc.
pub const PATHS_PER_ARC: usize = 16;

/// `M M^t`: valences on the diagonal plus the adjacency matrix.
pub fn signless_laplacian(graph: &GraphData) -> DMatrix<f64> {
    vertex_operator(graph, false)
}

/// Solves `M M^t lambda = 2 pi 1`, or `M N^-1 M^t lambda = 2 pi 1` when weighted.
pub fn solve_lambda(graph: &GraphData, weighted: bool) -> Result<Vec<f64>> {
    solve_vertex_system(graph, weighted, &vec![TAU; graph.vertex_count])
}

fn angles_from_lambda(graph: &GraphData, weighted: bool, lambda: &[f64]) -> Vec<f64> {
    let mut x = graph.edge_sums(lambda);
    if weighted {
        for (v, w) in x.iter_mut().zip(&graph.edge_weight) {
            *v /= w;
        }
    }
    x
}

/// Minimizer of the equality program: `lambda_i + lambda_j` per edge,
/// divided by `n_i + n_j` in the weighted case.
pub fn abstract_angles(graph: &GraphData, weighted: bool) -> Result<Vec<f64>> {
    let lambda = solve_lambda(graph, weighted)?;
    Ok(angles_from_lambda(graph, weighted, &lambda))
}

/// Minimizer of `x^t x` (or `x^t N x`) over `M x >= 2 pi 1`.
pub fn solve_inequality_qp(graph: &GraphData, weighted: bool) -> Result<InequalitySolution> {
    let start = abstract_angles(graph, weighted)?;
    let limit = 50 * (graph.vertex_count + graph.edge_count()).max(10);
    let sol = active_set::solve(graph, weighted, &start, limit)?;
    if !(sol.kkt_residual < 1e-8) {
        return Err(Error::Singular(format!(
            "active-set solution has KKT residual {:e}",
            sol.kkt_residual
        )));
    }
    Ok(sol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RivinCheck {
    /// Every non-facial dual cycle has weight above `2 pi`.
    pub ok: bool,
    /// The lightest non-facial cycle.
    pub certificate: Option<CycleCertificate>,
    pub search: CycleSearch,
}

/// Checks that every simple non-facial cycle of `dual` carries angle sum
/// greater than `2 pi`. `angles` is indexed like the dual arcs.
pub fn rivin_cycle_check(dual: &DualGraph, angles: &[f64]) -> Result<RivinCheck> {
    assert_eq!(angles.len(), dual.arcs.len());
    if let Some((edge, &weight)) = angles.iter().enumerate().find(|(_, &w)| !(w > 0.0)) {
        return Err(Error::NonPositiveWeight { edge, weight });
    }
    let (certificate, search) = if dual.node_count <= EXHAUSTIVE_NODE_LIMIT {
        (
            min_nonfacial_cycle_exhaustive(dual, angles),
            CycleSearch::Exhaustive,
        )
    } else {
        (
            min_nonfacial_cycle_paths(dual, angles, PATHS_PER_ARC),
            CycleSearch::ShortestPaths,
        )
    };
    let ok = certificate
        .as_ref()
        .is_none_or(|c| c.weight > TAU + LAMBDA_BAND);
    Ok(RivinCheck {
        ok,
        certificate,
        search,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictedType {
    /// Minimizer is the convex inscribed realization with the abstract angles.
    ConvexInscribedUnique,
    /// The abstract angles are not realizable; edges are expected to collapse.
    CollapseExpected,
    Indeterminate,
}

impl fmt::Display for PredictedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ConvexInscribedUnique => "convex-inscribed-unique",
            Self::CollapseExpected => "collapse-expected",
            Self::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QPReport {
    pub weighted: bool,
    pub edges: Vec<[usize; 2]>,
    pub lambda: Vec<f64>,
    pub angles: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_nonneg: bool,
    /// Vertices whose lambda lies in the borderline band around zero.
    pub lambda_borderline: Vec<usize>,
    pub angles_in_open_range: bool,
    /// With strictly positive lambda every abstract angle must be below pi.
    pub angles_below_pi_check: Option<bool>,
    /// False also when the check could not run on non-positive angles.
    pub rivin_cycle_ok: bool,
    pub min_nonfacial_cycle_sum: Option<f64>,
    pub cycle: Option<CycleCertificate>,
    pub cycle_search: Option<CycleSearch>,
    /// Solution of the inequality program.
    pub inequality_angles: Vec<f64>,
    pub inequality_matches: bool,
    pub predicted: PredictedType,
}

/// Runs the full analysis on the edge graph and dual of a closed mesh.
pub fn check_realizability(topology: &MeshTopology, weighted: bool) -> Result<QPReport> {
    if topology.euler_characteristic != 2 {
        return Err(Error::InvalidParameter(format!(
            "realizability analysis needs a sphere-like mesh, Euler characteristic is {}",
            topology.euler_characteristic
        )));
    }
    let graph = incidence_and_weights(topology)?;
    let dual = dual_graph(topology)?;
    let lambda = solve_lambda(&graph, weighted)?;
    let angles = angles_from_lambda(&graph, weighted, &lambda);

    let lambda_min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_nonneg = lambda_min > -LAMBDA_BAND;
    let lambda_borderline: Vec<usize> = lambda
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > -LAMBDA_BAND && l <= LAMBDA_BAND)
        .map(|(v, _)| v)
        .collect();
    let angles_in_open_range = angles.iter().all(|&b| b > 0.0 && b < PI);
    let angles_below_pi_check = (lambda_min > LAMBDA_BAND).then(|| angles.iter().all(|&b| b < PI));

    let rivin = if angles.iter().all(|&b| b > 0.0) {
        Some(rivin_cycle_check(&dual, &angles)?)
    } else {
        None
    };
    let rivin_cycle_ok = rivin.as_ref().is_some_and(|r| r.ok);
    let cycle = rivin.as_ref().and_then(|r| r.certificate.clone());

    let inequality = solve_inequality_qp(&graph, weighted)?;
    let scale = angles.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let inequality_matches = inequality
        .x
        .iter()
        .zip(&angles)
        .all(|(y, x)| (y - x).abs() <= 1e-8 * scale);

    let predicted = if lambda_nonneg && angles_in_open_range && rivin_cycle_ok {
        PredictedType::ConvexInscribedUnique
    } else if angles.iter().any(|&b| b <= 0.0) || rivin.as_ref().is_some_and(|r| !r.ok) {
        PredictedType::CollapseExpected
    } else {
        PredictedType::Indeterminate
    };

    Ok(QPReport {
        weighted,
        edges: graph.edges.clone(),
        lambda,
        angles,
        lambda_min,
        lambda_nonneg,
        lambda_borderline,
        angles_in_open_range,
        angles_below_pi_check,
        rivin_cycle_ok,
        min_nonfacial_cycle_sum: cycle.as_ref().map(|c| c.weight),
        cycle,
        cycle_search: rivin.map(|r| r.search),
        inequality_angles: inequality.x,
        inequality_matches,
        predicted,
    })
}

impl QPReport {
    /// One `key: value` finding per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
        line("weighted", self.weighted.to_string());
        line("vertices", self.lambda.len().to_string());
        line("edges", self.angles.len().to_string());
        line("lambda_min", format!("{:.12e}", self.lambda_min));
        line("lambda_nonneg", self.lambda_nonneg.to_string());
        line("lambda_borderline", format!("{:?}", self.lambda_borderline));
        let (lo, hi) = self
            .angles
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        line("angle_min_over_pi", format!("{:.10}", lo / PI));
        line("angle_max_over_pi", format!("{:.10}", hi / PI));
        line(
            "angles_in_open_range",
            self.angles_in_open_range.to_string(),
        );
        if let Some(b) = self.angles_below_pi_check {
            line("angles_below_pi_check", b.to_string());
        }
        line("rivin_cycle_ok", self.rivin_cycle_ok.to_string());
        match &self.cycle {
            Some(c) => {
                line(
                    "min_nonfacial_cycle_sum_over_pi",
                    format!("{:.10}", c.weight / PI),
                );
                line("min_nonfacial_cycle_length", c.arcs.len().to_string());
            }
            None => line("min_nonfacial_cycle_sum_over_pi", "n/a".into()),
        }
        if let Some(s) = self.cycle_search {
            let s = match s {
                CycleSearch::Exhaustive => "exhaustive",
                CycleSearch::ShortestPaths => "shortest-paths",
            };
            line("cycle_search", s.into());
        }
        line("inequality_matches", self.inequality_matches.to_string());
        line("predicted", self.predicted.to_string());
        out
    }

    /// Angles divided by pi and sorted ascending, one row per rank. With
    /// `geometric` given, its sorted values form a second column.
    pub fn write_table_csv<W: Write>(
        &self,
        mut out: W,
        geometric: Option<&[f64]>,
    ) -> std::io::Result<()> {
        let sorted = |v: &[f64]| {
            let mut s: Vec<f64> = v.iter().map(|x| x / PI).collect();
            s.sort_by(f64::total_cmp);
            s
        };
        let abstract_col = sorted(&self.angles);
        match geometric {
            Some(g) => {
                let geo = sorted(g);
                writeln!(out, "rank,minimizer_over_pi,abstract_over_pi")?;
                for (k, (a, b)) in geo.iter().zip(&abstract_col).enumerate() {
                    writeln!(out, "{k},{a:.10},{b:.10}")?;
                }
            }
            None => {
                writeln!(out, "rank,abstract_over_pi,inequality_over_pi")?;
                let ineq = sorted(&self.inequality_angles);
                for (k, (a, b)) in abstract_col.iter().zip(&ineq).enumerate() {
                    writeln!(out, "{k},{a:.10},{b:.10}")?;
                }
            }
        }
        Ok(())
    }
}
