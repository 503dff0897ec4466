//! Symmetric positive-definite solves with `M D M^t`, where `D` is the
//! identity or `N^{-1}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::GraphData;

/// Vertex count above which the conjugate-gradient path replaces the dense factorization.
pub const DENSE_LIMIT: usize = 500;

fn edge_factors(graph: &GraphData, weighted: bool) -> Vec<f64> {
    if weighted {
        graph.edge_weight.iter().map(|w| 1.0 / w).collect()
    } else {
        vec![1.0; graph.edge_count()]
    }
}

/// Dense `M D M^t`.
pub fn vertex_operator(graph: &GraphData, weighted: bool) -> DMatrix<f64> {
    let n = graph.vertex_count;
    let mut a = DMatrix::zeros(n, n);
    for (&[u, v], d) in graph.edges.iter().zip(edge_factors(graph, weighted)) {
        a[(u, u)] += d;
        a[(v, v)] += d;
        a[(u, v)] += d;
        a[(v, u)] += d;
    }
    a
}

fn apply(graph: &GraphData, factors: &[f64], x: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(x.len());
    for (&[u, v], &d) in graph.edges.iter().zip(factors) {
        let s = d * (x[u] + x[v]);
        out[u] += s;
        out[v] += s;
    }
    out
}

/// Solves `M D M^t y = rhs`.
pub fn solve_vertex_system(graph: &GraphData, weighted: bool, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = graph.vertex_count;
    assert_eq!(rhs.len(), n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let b = DVector::from_column_slice(rhs);
    let y = if n <= DENSE_LIMIT {
        let a = vertex_operator(graph, weighted);
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::Singular("M D M^t is not positive definite".into()))?;
        let l = chol.l_dirty();
        let min_pivot = (0..n)
            .map(|i| l[(i, i)] * l[(i, i)])
            .fold(f64::INFINITY, f64::min);
        let max_diag = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(0.0, f64::max);
        if min_pivot <= 1e-13 * max_diag {
            return Err(Error::Singular("M D M^t is numerically singular".into()));
        }
        chol.solve(&b)
    } else {
        conjugate_gradient(graph, &edge_factors(graph, weighted), &b)?
    };

    let factors = edge_factors(graph, weighted);
    let residual = (apply(graph, &factors, &y) - &b).norm();
    if !residual.is_finite() || residual > 1e-10 * b.norm().max(1.0) {
        return Err(Error::Singular(format!(
            "residual {residual:e} after solving M D M^t y = b"
        )));
    }
    Ok(y.iter().copied().collect())
}

fn conjugate_gradient(
    graph: &GraphData,
    factors: &[f64],
    b: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = b.len();
    let mut diag = DVector::zeros(n);
    for (&[u, v], &d) in graph.edges.iter().zip(factors) {
        diag[u] += d;
        diag[v] += d;
    }
    if diag.iter().any(|&d| d <= 0.0) {
        return Err(Error::Singular("isolated vertex in edge graph".into()));
    }
    let precond = |r: &DVector<f64>| r.component_div(&diag);

    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let target = 1e-15 * b.norm();
    for _ in 0..(20 * n).max(100) {
        let ap = apply(graph, factors, &p);
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            return Err(Error::Singular("M D M^t is not positive definite".into()));
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        if r.norm() <= target {
            return Ok(x);
        }
        z = precond(&r);
        let rz_next = r.dot(&z);
        p = &z + &p * (rz_next / rz);
        rz = rz_next;
    }
    Ok(x)
}
