//! Minimum-weight non-facial cycles of a dual graph.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::mesh::DualGraph;

/// A simple cycle of the dual graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleCertificate {
    /// Dual nodes (primal faces) in walk order; the walk closes back to the first.
    pub nodes: Vec<usize>,
    /// Dual arcs (primal edge indices); arc `k` joins `nodes[k]` and `nodes[k + 1]`.
    pub arcs: Vec<usize>,
    /// Sum of the edge weights along the cycle.
    pub weight: f64,
    /// Whether the cycle bounds a dual face, i.e. encircles one primal vertex.
    pub facial: bool,
}

/// How the minimum non-facial cycle was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CycleSearch {
    /// Branch-and-bound enumeration of all simple cycles.
    Exhaustive,
    /// Per-arc k-shortest closing paths. Exact as well, since only two facial
    /// cycles run through any arc, but without enumerating every cycle.
    ShortestPaths,
}

fn facial_set(dual: &DualGraph) -> HashSet<Vec<usize>> {
    dual.facial_cycles.iter().cloned().collect()
}

fn is_facial(facial: &HashSet<Vec<usize>>, arcs: &[usize]) -> bool {
    let mut key = arcs.to_vec();
    key.sort_unstable();
    facial.contains(&key)
}

struct Search<'a> {
    dual: &'a DualGraph,
    weights: &'a [f64],
    facial: HashSet<Vec<usize>>,
    start: usize,
    on_path: Vec<bool>,
    nodes: Vec<usize>,
    arcs: Vec<usize>,
    best: Option<CycleCertificate>,
}

impl Search<'_> {
    fn bound(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |c| c.weight)
    }

    fn dfs(&mut self, node: usize, sum: f64) {
        for idx in 0..self.dual.incident[node].len() {
            let arc = self.dual.incident[node][idx];
            if self.arcs.last() == Some(&arc) {
                continue;
            }
            let total = sum + self.weights[arc];
            if total >= self.bound() {
                continue;
            }
            let next = self.dual.other_end(arc, node);
            if next == self.start {
                self.arcs.push(arc);
                if self.arcs.len() >= 2 && !is_facial(&self.facial, &self.arcs) {
                    self.best = Some(CycleCertificate {
                        nodes: self.nodes.clone(),
                        arcs: self.arcs.clone(),
                        weight: total,
                        facial: false,
                    });
                }
                self.arcs.pop();
            } else if next > self.start && !self.on_path[next] {
                self.on_path[next] = true;
                self.nodes.push(next);
                self.arcs.push(arc);
                self.dfs(next, total);
                self.arcs.pop();
                self.nodes.pop();
                self.on_path[next] = false;
            }
        }
    }
}

/// Minimum non-facial cycle by enumerating simple cycles, each rooted at
/// its smallest node, pruned by the best weight found so far. Weights must
/// be positive.
pub fn min_nonfacial_cycle_exhaustive(
    dual: &DualGraph,
    weights: &[f64],
) -> Option<CycleCertificate> {
    let mut search = Search {
        dual,
        weights,
        facial: facial_set(dual),
        start: 0,
        on_path: vec![false; dual.node_count],
        nodes: Vec::new(),
        arcs: Vec::new(),
        best: None,
    };
    for s in 0..dual.node_count {
        search.start = s;
        search.on_path[s] = true;
        search.nodes = vec![s];
        search.dfs(s, 0.0);
        search.on_path[s] = false;
    }
    search.best
}

#[derive(Debug, Clone, PartialEq)]
struct Path {
    nodes: Vec<usize>,
    arcs: Vec<usize>,
    weight: f64,
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed for a min-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

fn dijkstra(
    dual: &DualGraph,
    weights: &[f64],
    from: usize,
    to: usize,
    banned_arcs: &HashSet<usize>,
    banned_nodes: &[bool],
) -> Option<Path> {
    let n = dual.node_count;
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[from] = 0.0;
    heap.push(Entry(0.0, from));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == to {
            break;
        }
        for &arc in &dual.incident[u] {
            if banned_arcs.contains(&arc) {
                continue;
            }
            let v = dual.other_end(arc, u);
            if banned_nodes[v] {
                continue;
            }
            let nd = d + weights[arc];
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = Some((u, arc));
                heap.push(Entry(nd, v));
            }
        }
    }
    if !dist[to].is_finite() {
        return None;
    }
    let mut nodes = vec![to];
    let mut arcs = Vec::new();
    let mut cur = to;
    while let Some((p, arc)) = prev[cur] {
        nodes.push(p);
        arcs.push(arc);
        cur = p;
    }
    nodes.reverse();
    arcs.reverse();
    Some(Path {
        nodes,
        arcs,
        weight: dist[to],
    })
}

/// Yen's k-shortest simple paths, yielding paths lazily to `accept` until
/// it returns true or `k` paths have been produced.
fn yen(
    dual: &DualGraph,
    weights: &[f64],
    from: usize,
    to: usize,
    excluded_arc: usize,
    k: usize,
    mut accept: impl FnMut(&Path) -> bool,
) -> Option<Path> {
    let base: HashSet<usize> = [excluded_arc].into_iter().collect();
    let no_nodes = vec![false; dual.node_count];
    let first = dijkstra(dual, weights, from, to, &base, &no_nodes)?;
    let mut found = vec![first];
    let mut candidates: Vec<Path> = Vec::new();
    loop {
        let last = found.last().expect("non-empty").clone();
        if accept(&last) {
            return Some(last);
        }
        if found.len() >= k {
            return None;
        }
        for spur_idx in 0..last.arcs.len() {
            let spur = last.nodes[spur_idx];
            let root_nodes = &last.nodes[..=spur_idx];
            let root_arcs = &last.arcs[..spur_idx];
            let mut banned_arcs = base.clone();
            for p in &found {
                if p.arcs.len() > spur_idx && p.nodes[..=spur_idx] == *root_nodes {
                    banned_arcs.insert(p.arcs[spur_idx]);
                }
            }
            let mut banned_nodes = vec![false; dual.node_count];
            for &v in &root_nodes[..spur_idx] {
                banned_nodes[v] = true;
            }
            if let Some(tail) = dijkstra(dual, weights, spur, to, &banned_arcs, &banned_nodes) {
                let root_weight: f64 = root_arcs.iter().map(|&a| weights[a]).sum();
                let mut nodes = root_nodes[..spur_idx].to_vec();
                nodes.extend(&tail.nodes);
                let mut arcs = root_arcs.to_vec();
                arcs.extend(&tail.arcs);
                let cand = Path {
                    nodes,
                    arcs,
                    weight: root_weight + tail.weight,
                };
                if !candidates.iter().any(|c| c.arcs == cand.arcs)
                    && !found.iter().any(|c| c.arcs == cand.arcs)
                {
                    candidates.push(cand);
                }
            }
        }
        let best = candidates
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.weight.total_cmp(&b.1.weight))
            .map(|(i, _)| i)?;
        found.push(candidates.swap_remove(best));
    }
}

/// Minimum non-facial cycle as the best, over all arcs, of the cheapest
/// non-facial closing path. At most three closing paths per arc are needed.
pub fn min_nonfacial_cycle_paths(
    dual: &DualGraph,
    weights: &[f64],
    k: usize,
) -> Option<CycleCertificate> {
    let facial = facial_set(dual);
    let mut best: Option<CycleCertificate> = None;
    for (arc, record) in dual.arcs.iter().enumerate() {
        let [u, v] = record.faces;
        let bound = best.as_ref().map_or(f64::INFINITY, |c| c.weight);
        let path = yen(dual, weights, v, u, arc, k, |p| {
            if p.weight + weights[arc] >= bound {
                return true;
            }
            let mut arcs = p.arcs.clone();
            arcs.push(arc);
            !is_facial(&facial, &arcs)
        });
        if let Some(p) = path {
            let weight = p.weight + weights[arc];
            if weight < bound {
                let mut arcs = p.arcs;
                arcs.push(arc);
                best = Some(CycleCertificate {
                    nodes: p.nodes,
                    arcs,
                    weight,
                    facial: false,
                });
            }
        }
    }
    best
}
