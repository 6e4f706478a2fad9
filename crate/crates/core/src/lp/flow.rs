//! Uncapacitated min-cost flow on a complete digraph by successive shortest
//! paths, in exact integers.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub amount: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowSolution {
    pub cost: BigInt,
    /// Positive net flows, sorted by `(from, to)`.
    pub arcs: Vec<FlowArc>,
}

struct Edge {
    to: usize,
    cap: Option<BigInt>,
    cost: BigInt,
    flow: BigInt,
}

impl Edge {
    fn residual(&self) -> Option<BigInt> {
        self.cap.as_ref().map(|c| c - &self.flow)
    }

    fn usable(&self) -> bool {
        self.residual().is_none_or(|r| r.is_positive())
    }
}

struct Graph {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    fn add(&mut self, from: usize, to: usize, cap: Option<BigInt>, cost: BigInt) {
        let id = self.edges.len();
        // reverse edge starts with zero capacity; it gains capacity as flow is pushed
        self.edges.push(Edge { to, cap, cost: cost.clone(), flow: BigInt::zero() });
        self.edges.push(Edge { to: from, cap: Some(BigInt::zero()), cost: -cost, flow: BigInt::zero() });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
    }
}

/// Routes `supply[v]` units out of every node with positive supply into the
/// nodes with negative supply, paying `cost[u][v]` per unit on arc `u -> v`.
/// Supplies must sum to zero and costs must be non-negative.
pub fn min_cost_flow(supply: &[BigInt], cost: &[Vec<BigInt>]) -> FlowSolution {
    let n = supply.len();
    assert!(cost.len() == n && cost.iter().all(|r| r.len() == n), "cost matrix shape");
    assert!(supply.iter().sum::<BigInt>().is_zero(), "supplies must balance");
    let (source, sink) = (n, n + 1);
    let mut g = Graph { edges: Vec::new(), adj: vec![Vec::new(); n + 2] };
    for u in 0..n {
        for v in 0..n {
            if u != v {
                g.add(u, v, None, cost[u][v].clone());
            }
        }
    }
    for (v, s) in supply.iter().enumerate() {
        if s.is_positive() {
            g.add(source, v, Some(s.clone()), BigInt::zero());
        } else if s.is_negative() {
            g.add(v, sink, Some(-s), BigInt::zero());
        }
    }
    while let Some(path) = shortest_path(&g, source, sink) {
        let amount = path
            .iter()
            .filter_map(|&e| g.edges[e].residual())
            .min()
            .expect("every source-sink path crosses a capacitated edge");
        for &e in &path {
            g.edges[e].flow += &amount;
            g.edges[e ^ 1].flow -= &amount;
        }
    }
    let mut arcs = Vec::new();
    let mut total = BigInt::zero();
    for u in 0..n {
        for &e in &g.adj[u] {
            let edge = &g.edges[e];
            if e % 2 == 0 && edge.to < n && edge.flow.is_positive() {
                total += &edge.flow * &edge.cost;
                arcs.push(FlowArc { from: u, to: edge.to, amount: edge.flow.clone() });
            }
        }
    }
    arcs.sort_by_key(|a| (a.from, a.to));
    FlowSolution { cost: total, arcs }
}

/// Bellman-Ford over the residual graph; returns the edge ids of a
/// cheapest augmenting path.
fn shortest_path(g: &Graph, source: usize, sink: usize) -> Option<Vec<usize>> {
    let nodes = g.adj.len();
    let mut dist: Vec<Option<BigInt>> = vec![None; nodes];
    let mut via: Vec<Option<usize>> = vec![None; nodes];
    dist[source] = Some(BigInt::zero());
    for _ in 0..nodes {
        let mut changed = false;
        for u in 0..nodes {
            let Some(du) = dist[u].clone() else { continue };
            for &e in &g.adj[u] {
                let edge = &g.edges[e];
                if !edge.usable() {
                    continue;
                }
                let cand = &du + &edge.cost;
                if dist[edge.to].as_ref().is_none_or(|d| cand < *d) {
                    dist[edge.to] = Some(cand);
                    via[edge.to] = Some(e);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist[sink].as_ref()?;
    let mut path = Vec::new();
    let mut at = sink;
    while at != source {
        let e = via[at].expect("reached nodes have a predecessor");
        path.push(e);
        at = g.edges[e ^ 1].to;
    }
    path.reverse();
    Some(path)
}
