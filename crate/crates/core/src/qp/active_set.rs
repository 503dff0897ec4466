//! Primal active-set solver for `min x^t W x` subject to `M x >= 2 pi 1`,
//! with `W` the identity or the diagonal valence weights `N`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::vertex_operator;
use crate::mesh::GraphData;

/// Multipliers above `-MULTIPLIER_TOLERANCE` count as non-negative.
const MULTIPLIER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct InequalitySolution {
    pub x: Vec<f64>,
    /// Lagrange multipliers of the vertex constraints (zero off the active set).
    pub multipliers: Vec<f64>,
    pub active: Vec<usize>,
    pub iterations: usize,
    pub kkt_residual: f64,
}

/// Solves the equality program restricted to the constraints in `set`:
/// returns `(x, mu)` with `x = D M_S^t mu`, `M_S D M_S^t mu = 2 pi 1`.
fn equality_point(
    graph: &GraphData,
    operator: &DMatrix<f64>,
    factors: &[f64],
    set: &[usize],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = set.len();
    let mut mu = vec![0.0; graph.vertex_count];
    if k > 0 {
        let sub = DMatrix::from_fn(k, k, |r, c| operator[(set[r], set[c])]);
        let chol = sub
            .cholesky()
            .ok_or_else(|| Error::Singular("active constraints are linearly dependent".into()))?;
        let sol = chol.solve(&DVector::from_element(k, TAU));
        for (r, &v) in set.iter().enumerate() {
            mu[v] = sol[r];
        }
    }
    let x = graph
        .edge_sums(&mu)
        .iter()
        .zip(factors)
        .map(|(s, d)| s * d)
        .collect();
    Ok((x, mu))
}

fn kkt_residual(graph: &GraphData, weights: &[f64], x: &[f64], nu: &[f64]) -> f64 {
    // stationarity 2 W x = M^t nu, feasibility, dual sign, complementarity
    let mnu = graph.edge_sums(nu);
    let stat = x
        .iter()
        .zip(weights)
        .zip(&mnu)
        .map(|((xi, w), m)| (2.0 * w * xi - m).abs())
        .fold(0.0, f64::max);
    let sums = graph.vertex_sums(x);
    let infeas = sums.iter().map(|s| (TAU - s).max(0.0)).fold(0.0, f64::max);
    let dual = nu.iter().map(|n| (-n).max(0.0)).fold(0.0, f64::max);
    let comp = sums
        .iter()
        .zip(nu)
        .map(|(s, n)| ((s - TAU) * n).abs())
        .fold(0.0, f64::max);
    stat.max(infeas).max(dual).max(comp)
}

/// Feasible start: the componentwise maximum of `start` and the uniform
/// value `2 pi / min valence`.
fn initial_point(graph: &GraphData, start: &[f64]) -> Vec<f64> {
    let nmin = graph.valence.iter().copied().min().unwrap_or(1).max(1);
    let floor = TAU / nmin as f64;
    start.iter().map(|&b| b.max(floor)).collect()
}

pub(crate) fn solve(
    graph: &GraphData,
    weighted: bool,
    start: &[f64],
    max_iterations: usize,
) -> Result<InequalitySolution> {
    let n = graph.vertex_count;
    let weights: Vec<f64> = if weighted {
        graph.edge_weight.clone()
    } else {
        vec![1.0; graph.edge_count()]
    };
    let factors: Vec<f64> = weights.iter().map(|w| 1.0 / w).collect();
    let operator = vertex_operator(graph, weighted);
    let scale = TAU;
    let tight = |sum: f64| (sum - TAU).abs() <= 1e-12 * scale;

    let mut x = initial_point(graph, start);
    let mut active: Vec<usize> = graph
        .vertex_sums(&x)
        .iter()
        .enumerate()
        .filter(|(_, &s)| tight(s))
        .map(|(v, _)| v)
        .collect();
    let mut in_set = vec![false; n];
    for &v in &active {
        in_set[v] = true;
    }

    for iteration in 1..=max_iterations {
        let (target, mu) = equality_point(graph, &operator, &factors, &active)?;
        let p: Vec<f64> = target.iter().zip(&x).map(|(t, xi)| t - xi).collect();
        let pnorm = p.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let xnorm = x.iter().map(|v| v.abs()).fold(1.0, f64::max);

        if pnorm <= 1e-13 * xnorm {
            // stationary on the working set: check multiplier signs
            let nu: Vec<f64> = mu.iter().map(|m| 2.0 * m).collect();
            let worst = active
                .iter()
                .copied()
                .min_by(|&a, &b| nu[a].total_cmp(&nu[b]));
            match worst {
                Some(v) if nu[v] < -MULTIPLIER_TOLERANCE => {
                    active.retain(|&u| u != v);
                    in_set[v] = false;
                }
                _ => {
                    let x = target;
                    let res = kkt_residual(graph, &weights, &x, &nu);
                    let mut act = active.clone();
                    act.sort_unstable();
                    return Ok(InequalitySolution {
                        x,
                        multipliers: nu,
                        active: act,
                        iterations: iteration,
                        kkt_residual: res,
                    });
                }
            }
            continue;
        }

        // ratio test against the constraints outside the working set
        let sums = graph.vertex_sums(&x);
        let dir = graph.vertex_sums(&p);
        let mut alpha = 1.0;
        let mut blocking = None;
        for v in 0..n {
            if in_set[v] || dir[v] >= 0.0 {
                continue;
            }
            let step = ((TAU - sums[v]) / dir[v]).max(0.0);
            if step < alpha {
                alpha = step;
                blocking = Some(v);
            }
        }
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * pi;
        }
        if let Some(v) = blocking {
            active.push(v);
            in_set[v] = true;
        }
    }
    Err(Error::IterationLimit {
        iterations: max_iterations,
        best: x,
    })
}
