//! Limited-memory quasi-Newton minimization of the circle-angle energies
//! over vertex positions.
//!
//! Search directions come from the two-loop recursion over the last
//! `history` curvature pairs; steps are accepted by backtracking on the
//! sufficient-decrease condition. Fixed vertices have their gradient
//! components zeroed and are never written to.

use std::collections::VecDeque;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyKind, Evaluation, Functional, GradientField, GradientMode};
use crate::error::{Error, Result};
use crate::mesh::{bbox_diagonal, triangle_quality, GraphData, MeshTopology, TriangleMesh};
use crate::{Vec3, DEGENERACY_THRESHOLD};

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationConfig {
    pub kind: EnergyKind,
    pub max_steps: usize,
    /// Stop once the projected gradient norm is at or below this.
    pub gradient_tolerance: f64,
    /// Number of stored curvature pairs.
    pub history: usize,
    /// Angles below this (radians) are treated as flat in the `W` gradient.
    pub w_threshold: f64,
    pub fixed: Vec<usize>,
    /// Record a trace line every this many steps (first and last always).
    pub trace_interval: usize,
    pub gradient_mode: GradientMode,
    /// A run halts as degenerated once an edge is shorter than this
    /// fraction of the bounding-box diagonal.
    pub collapse_ratio: f64,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            kind: EnergyKind::W2,
            max_steps: 4000,
            gradient_tolerance: 1e-10,
            history: 8,
            w_threshold: 1e-3,
            fixed: Vec::new(),
            trace_interval: 10,
            gradient_mode: GradientMode::Analytic,
            collapse_ratio: 1e-4,
        }
    }
}

impl OptimizationConfig {
    pub fn new(kind: EnergyKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self, vertex_count: usize) -> Result<()> {
        if self.max_steps < 1 {
            return Err(Error::InvalidParameter(
                "max steps must be at least 1".into(),
            ));
        }
        if self.history < 1 {
            return Err(Error::InvalidParameter(
                "history size must be at least 1".into(),
            ));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "gradient tolerance must be positive".into(),
            ));
        }
        if let Some(&v) = self.fixed.iter().find(|&&v| v >= vertex_count) {
            return Err(Error::InvalidParameter(format!(
                "fixed vertex {v} out of range for {vertex_count} vertices"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    StepLimit,
    Stalled,
    Degenerated,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::StepLimit => "step-limit",
            Status::Stalled => "stalled",
            Status::Degenerated => "degenerated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub bbox_diag: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub mesh: TriangleMesh,
    pub trace: Vec<TraceRecord>,
    pub status: Status,
    /// Accepted steps.
    pub steps: usize,
    pub energy: f64,
    pub grad_norm: f64,
    /// Edges found collapsing when the run degenerated.
    pub collapsed_edges: Vec<[usize; 2]>,
}

/// Boundary vertices plus their one-ring neighbors.
///
/// Holding this collar fixed approximates fixing both the boundary curve
/// and the tangent planes along it.
pub fn fix_boundary_collar(topology: &MeshTopology) -> Result<Vec<usize>> {
    if topology.is_closed() {
        return Err(Error::ClosedMesh);
    }
    let mut fixed = topology.is_boundary_vertex.clone();
    for e in &topology.edges {
        if topology.is_boundary_vertex[e.i] || topology.is_boundary_vertex[e.j] {
            fixed[e.i] = true;
            fixed[e.j] = true;
        }
    }
    Ok((0..topology.vertex_count).filter(|&v| fixed[v]).collect())
}

/// Zeroes the components of fixed vertices.
pub fn project_gradient(gradient: &GradientField, fixed: &[usize]) -> GradientField {
    let mut out = gradient.clone();
    for &v in fixed {
        if let Some(g) = out.0.get_mut(v) {
            *g = Vec3::zeros();
        }
    }
    out
}

pub fn write_trace_csv(trace: &[TraceRecord], mut w: impl Write) -> Result<()> {
    writeln!(
        w,
        "step,energy,grad_norm,beta_min,beta_max,bbox_diag,seconds"
    )?;
    for r in trace {
        writeln!(
            w,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.6}",
            r.step, r.energy, r.grad_norm, r.beta_min, r.beta_max, r.bbox_diag, r.seconds
        )?;
    }
    Ok(())
}

struct Objective<'a> {
    functional: Functional,
    topology: &'a MeshTopology,
    mode: GradientMode,
    is_fixed: Vec<bool>,
}

impl Objective<'_> {
    fn evaluate(&self, x: &[Vec3]) -> Result<Evaluation> {
        let mut eval = self.functional.evaluate(x, self.topology)?;
        if let GradientMode::FiniteDifference { relative_step } = self.mode {
            let h = relative_step * bbox_diagonal(x);
            eval.gradient =
                crate::energy::gradient::fd_with(&self.functional, x, self.topology, h)?.0;
        }
        for (g, &fixed) in eval.gradient.iter_mut().zip(&self.is_fixed) {
            if fixed {
                *g = Vec3::zeros();
            }
        }
        Ok(eval)
    }
}

fn dot(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u.dot(v)).sum()
}

fn norm(a: &[Vec3]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[Vec3], b: &[Vec3]) -> Vec<Vec3> {
    a.iter().zip(b).map(|(u, v)| u - v).collect()
}

struct Pair {
    s: Vec<Vec3>,
    y: Vec<Vec3>,
    rho: f64,
}

/// `-H g` by the two-loop recursion.
fn two_loop(g: &[Vec3], pairs: &VecDeque<Pair>) -> Vec<Vec3> {
    let mut q = g.to_vec();
    let mut alpha = vec![0.0; pairs.len()];
    for (idx, p) in pairs.iter().enumerate().rev() {
        alpha[idx] = p.rho * dot(&p.s, &q);
        for (qv, yv) in q.iter_mut().zip(&p.y) {
            *qv -= yv * alpha[idx];
        }
    }
    if let Some(last) = pairs.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qv in q.iter_mut() {
            *qv *= gamma;
        }
    }
    for (idx, p) in pairs.iter().enumerate() {
        let b = p.rho * dot(&p.y, &q);
        for (qv, sv) in q.iter_mut().zip(&p.s) {
            *qv += sv * (alpha[idx] - b);
        }
    }
    q.iter().map(|v| -v).collect()
}

fn collapsed(
    x: &[Vec3],
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    ratio: f64,
) -> Vec<[usize; 2]> {
    let diag = bbox_diagonal(x);
    let mut out: Vec<[usize; 2]> = topology
        .edges
        .iter()
        .filter(|e| (x[e.i] - x[e.j]).norm() < ratio * diag)
        .map(|e| [e.i, e.j])
        .collect();
    for f in &mesh.faces {
        if triangle_quality(&x[f[0]], &x[f[1]], &x[f[2]]) < DEGENERACY_THRESHOLD {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                let key = [a.min(b), a.max(b)];
                if !out.contains(&key) {
                    out.push(key);
                }
            }
        }
    }
    out
}

/// Minimizes the configured energy. Connectivity is unchanged and fixed
/// vertices keep their exact positions.
pub fn minimize(
    mesh: &TriangleMesh,
    topology: &MeshTopology,
    graph: Option<&GraphData>,
    config: &OptimizationConfig,
) -> Result<OptimizationResult> {
    config.validate(mesh.vertex_count())?;
    let start = Instant::now();
    let mut is_fixed = vec![false; mesh.vertex_count()];
    for &v in &config.fixed {
        is_fixed[v] = true;
    }
    let objective = Objective {
        functional: Functional::with_graph(topology, config.kind, graph, config.w_threshold)?,
        topology,
        mode: config.gradient_mode,
        is_fixed,
    };

    let mut x = mesh.positions.clone();
    let mut eval = objective.evaluate(&x)?;
    let mut gnorm = norm(&eval.gradient);
    let mut pairs: VecDeque<Pair> = VecDeque::with_capacity(config.history);
    let mut trace = Vec::new();
    let record = |step: usize, e: &Evaluation, gnorm: f64, x: &[Vec3]| TraceRecord {
        step,
        energy: e.value,
        grad_norm: gnorm,
        beta_min: e.beta_min,
        beta_max: e.beta_max,
        bbox_diag: bbox_diagonal(x),
        seconds: start.elapsed().as_secs_f64(),
    };
    trace.push(record(0, &eval, gnorm, &x));

    let mut status = Status::StepLimit;
    let mut steps = 0;
    let mut collapsed_edges = Vec::new();

    for step in 1..=config.max_steps {
        if gnorm <= config.gradient_tolerance {
            status = Status::Converged;
            break;
        }
        let mut d = two_loop(&eval.gradient, &pairs);
        let mut slope = dot(&eval.gradient, &d);
        if !(slope < 0.0) {
            pairs.clear();
            d = eval.gradient.iter().map(|g| -g).collect();
            slope = -gnorm * gnorm;
        }

        let diag = bbox_diagonal(&x);
        let max_move = d.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut alpha: f64 = if pairs.is_empty() {
            (1e-2 * diag / max_move).min(1.0)
        } else {
            1.0
        };
        alpha = alpha.min(0.1 * diag / max_move);

        // energies are sums of O(|E|) terms; below this their differences are rounding noise
        let noise = 1e-13 * (eval.value.abs() + objective.functional.constant.abs()).max(1.0);
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<Vec3> = x
                .iter()
                .zip(&d)
                .zip(&objective.is_fixed)
                .map(|((p, dv), &fixed)| if fixed { *p } else { p + dv * alpha })
                .collect();
            match objective.evaluate(&trial) {
                Ok(next) if next.value.is_finite() => {
                    let decrease = next.value - eval.value;
                    let sufficient = decrease <= ARMIJO * alpha * slope;
                    let flat = decrease <= noise && norm(&next.gradient) < gnorm;
                    if sufficient || flat {
                        accepted = Some((trial, next));
                        break;
                    }
                }
                Ok(_) | Err(Error::Edge { .. }) => {}
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
        }

        let Some((x_next, next)) = accepted else {
            status = Status::Stalled;
            break;
        };

        let s = sub(&x_next, &x);
        let y = sub(&next.gradient, &eval.gradient);
        let sy = dot(&s, &y);
        if sy > 1e-10 * norm(&s) * norm(&y) {
            if pairs.len() == config.history {
                pairs.pop_front();
            }
            pairs.push_back(Pair {
                s,
                y,
                rho: 1.0 / sy,
            });
        }

        x = x_next;
        eval = next;
        gnorm = norm(&eval.gradient);
        steps = step;

        let bad = collapsed(&x, mesh, topology, config.collapse_ratio);
        if !bad.is_empty() {
            collapsed_edges = bad;
            status = Status::Degenerated;
            break;
        }
        if step % config.trace_interval.max(1) == 0 {
            trace.push(record(step, &eval, gnorm, &x));
        }
    }
    if status == Status::StepLimit && gnorm <= config.gradient_tolerance {
        status = Status::Converged;
    }
    if trace.last().map(|r| r.step) != Some(steps) {
        trace.push(record(steps, &eval, gnorm, &x));
    }

    Ok(OptimizationResult {
        mesh: mesh.with_positions(x),
        trace,
        status,
        steps,
        energy: eval.value,
        grad_norm: gnorm,
        collapsed_edges,
    })
}
