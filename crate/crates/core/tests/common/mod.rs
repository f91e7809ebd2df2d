//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use cyclone::graph::{build_graph, EdgeAttrs, LabeledEdge, TransactionGraph};
use cyclone::{Amount, Partition, WeightMode};
use rand::Rng;

pub fn label(i: usize) -> String {
    format!("n{i}")
}

pub fn attrs(amount_minor: i64, tx_count: u32, year_first: u16, year_last: u16) -> EdgeAttrs {
    EdgeAttrs::new(
        tx_count,
        Amount::from_minor(amount_minor),
        year_first,
        year_last,
    )
}

/// Graph over `n` nodes from `(src, dst, attrs)` triples.
pub fn graph_from(n: usize, edges: &[(usize, usize, EdgeAttrs)]) -> TransactionGraph {
    build_graph(
        (0..n).map(label).collect(),
        edges
            .iter()
            .map(|&(a, b, at)| LabeledEdge::new(label(a), label(b), at)),
    )
    .expect("valid test graph")
}

/// Unit-weight digraph.
pub fn digraph(n: usize, arcs: &[(usize, usize)]) -> TransactionGraph {
    let e: Vec<_> = arcs
        .iter()
        .map(|&(a, b)| (a, b, attrs(100, 1, 2015, 2015)))
        .collect();
    graph_from(n, &e)
}

/// Directed Erdős–Rényi graph with random integer amounts; no self-loops.
pub fn random_weighted<R: Rng>(rng: &mut R, n: usize, p: f64) -> TransactionGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(p) {
                let at = attrs(
                    rng.random_range(1..5_000_000),
                    rng.random_range(1..20),
                    2015,
                    2015,
                );
                edges.push((a, b, at));
            }
        }
    }
    graph_from(n, &edges)
}

pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, p: f64) -> TransactionGraph {
    let mut arcs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(p) {
                arcs.push((a, b));
            }
        }
    }
    digraph(n, &arcs)
}

fn weight_of(e: &cyclone::graph::TransactionEdge, mode: WeightMode) -> f64 {
    match mode {
        WeightMode::Amount => e.amount.minor() as f64,
        WeightMode::TxCount => e.tx_count as f64,
        WeightMode::Unweighted => 1.0,
    }
}

/// Q = (1/2m) * sum over u, v of [A_uv - gamma * k_u * k_v / 2m] * delta(c_u, c_v),
/// with A_uv = w(u->v) + w(v->u), evaluated as a plain double loop.
pub fn naive_modularity(
    graph: &TransactionGraph,
    labels: &[u32],
    mode: WeightMode,
    gamma: f64,
) -> f64 {
    let n = graph.node_count();
    let mut a = vec![vec![0f64; n]; n];
    for e in graph.edges() {
        let w = weight_of(e, mode);
        a[e.src.index()][e.dst.index()] += w;
        a[e.dst.index()][e.src.index()] += w;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for u in 0..n {
        for v in 0..n {
            if labels[u] == labels[v] {
                q += a[u][v] - gamma * k[u] * k[v] / two_m;
            }
        }
    }
    q / two_m
}

/// Calls `visit` with every set partition of `n` items as a restricted
/// growth string.
pub fn for_each_partition(n: usize, visit: &mut dyn FnMut(&[u32])) {
    fn go(labels: &mut Vec<u32>, n: usize, max: u32, visit: &mut dyn FnMut(&[u32])) {
        if labels.len() == n {
            visit(labels);
            return;
        }
        for c in 0..=max + 1 {
            labels.push(c);
            go(labels, n, max.max(c), visit);
            labels.pop();
        }
    }
    if n == 0 {
        visit(&[]);
        return;
    }
    let mut labels = vec![0];
    go(&mut labels, n, 0, visit);
}

/// Best modularity over all set partitions.
pub fn exhaustive_best_modularity(graph: &TransactionGraph, mode: WeightMode) -> (f64, Vec<u32>) {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for_each_partition(graph.node_count(), &mut |labels| {
        let q = naive_modularity(graph, labels, mode, 1.0);
        if q > best.0 {
            best = (q, labels.to_vec());
        }
    });
    best
}

/// All simple cycles as node sequences starting at their smallest node,
/// found by extending every path from each start through larger nodes only.
pub fn brute_force_cycles(
    graph: &TransactionGraph,
    min_len: usize,
    max_len: usize,
) -> BTreeSet<Vec<usize>> {
    let n = graph.node_count();
    let mut succ = vec![BTreeSet::new(); n];
    for e in graph.edges() {
        succ[e.src.index()].insert(e.dst.index());
    }
    let mut out = BTreeSet::new();
    for start in 0..n {
        let mut path = vec![start];
        extend(&succ, start, &mut path, min_len, max_len, &mut out);
    }
    out
}

fn extend(
    succ: &[BTreeSet<usize>],
    start: usize,
    path: &mut Vec<usize>,
    min_len: usize,
    max_len: usize,
    out: &mut BTreeSet<Vec<usize>>,
) {
    let last = *path.last().unwrap();
    for &next in &succ[last] {
        if next == start {
            if path.len() >= min_len && path.len() <= max_len {
                out.insert(path.clone());
            }
        } else if next > start && !path.contains(&next) && path.len() < max_len {
            path.push(next);
            extend(succ, start, path, min_len, max_len, out);
            path.pop();
        }
    }
}

pub fn partition_labels(p: &Partition) -> Vec<u32> {
    p.assignment().to_vec()
}
