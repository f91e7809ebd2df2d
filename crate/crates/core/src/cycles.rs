//! Length-bounded enumeration of node-simple directed cycles.
//!
//! The search is Johnson-style with the bounded-length blocking scheme of
//! Gupta and Suzumura: each node carries a lock (the shallowest path
//! position from which it is still worth visiting), and locks are relaxed
//! through the blocked-predecessor lists when a backtrack finds a closing
//! path shorter than the bound. Cycles are rooted at their smallest node,
//! searches run inside strongly connected components only, and parallel
//! edges are condensed into one arc so they never multiply cycle counts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AccountId, TransactionEdge, TransactionGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid cycle config: {0}")]
pub struct CycleConfigError(&'static str);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleConfig {
    pub min_len: usize,
    pub max_len: usize,
    pub max_cycles_per_community: usize,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            min_len: 3,
            max_len: 10,
            max_cycles_per_community: 1_000_000,
        }
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<(), CycleConfigError> {
        if self.min_len < 2 {
            return Err(CycleConfigError("min_len must be at least 2"));
        }
        if self.max_len < self.min_len {
            return Err(CycleConfigError("max_len must be at least min_len"));
        }
        if self.max_len > u32::MAX as usize / 2 {
            return Err(CycleConfigError("max_len is too large"));
        }
        Ok(())
    }
}

/// One directed cycle, expressed in root-graph node ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleRecord {
    pub cycle_id: u64,
    pub community_id: u32,
    /// Distinct nodes in cycle order, starting at the smallest id.
    pub nodes: Vec<AccountId>,
    /// Edges along the cycle in order; an arc backed by parallel edges
    /// contributes all of them, consecutively.
    pub edges: Vec<TransactionEdge>,
}

impl CycleRecord {
    pub fn length(&self) -> usize {
        self.nodes.len()
    }

    /// Consecutive node pairs, closing back to the first node.
    pub fn arcs(&self) -> impl Iterator<Item = (AccountId, AccountId)> + '_ {
        let n = self.nodes.len();
        (0..n).map(move |i| (self.nodes[i], self.nodes[(i + 1) % n]))
    }
}

/// Rotates `nodes` so the smallest element comes first.
pub fn canonical_rotation<T: Ord + Clone>(nodes: &[T]) -> Vec<T> {
    let Some(start) = nodes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .map(|(i, _)| i)
    else {
        return Vec::new();
    };
    nodes[start..]
        .iter()
        .chain(&nodes[..start])
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CycleSearch {
    pub cycles: Vec<CycleRecord>,
    /// The safety cap stopped the enumeration early.
    pub truncated: bool,
}

/// Enumerates every simple cycle of `graph` within the configured length
/// range, tagged with community 0. See [`simple_cycles_in_community`].
pub fn simple_cycles(graph: &TransactionGraph, config: &CycleConfig) -> CycleSearch {
    simple_cycles_in_community(graph, config, 0)
}

/// Enumerates every simple cycle with `min_len <= length <= max_len`, each
/// once, ordered by start node then lexicographically. Cycle ids number the
/// output from 0.
pub fn simple_cycles_in_community(
    graph: &TransactionGraph,
    config: &CycleConfig,
    community_id: u32,
) -> CycleSearch {
    let arcs = Arcs::condense(graph);
    let (mut paths, truncated) = enumerate(&arcs, config);
    paths.sort_unstable();
    let cycles = paths
        .into_iter()
        .enumerate()
        .map(|(i, path)| to_record(graph, &path, i as u64, community_id))
        .collect();
    CycleSearch { cycles, truncated }
}

fn to_record(
    graph: &TransactionGraph,
    path: &[u32],
    cycle_id: u64,
    community_id: u32,
) -> CycleRecord {
    let n = path.len();
    let mut edges = Vec::with_capacity(n);
    for i in 0..n {
        let (u, v) = (AccountId(path[i]), AccountId(path[(i + 1) % n]));
        for &id in graph.out_edges(u) {
            let e = graph.edge(id);
            if e.dst == v {
                edges.push(TransactionEdge {
                    src: graph.origin(u),
                    dst: graph.origin(v),
                    ..*e
                });
            }
        }
    }
    CycleRecord {
        cycle_id,
        community_id,
        nodes: path.iter().map(|&p| graph.origin(AccountId(p))).collect(),
        edges,
    }
}

/// Distinct successors per node, ascending.
struct Arcs {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Arcs {
    fn condense(graph: &TransactionGraph) -> Self {
        let n = graph.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(graph.edge_count());
        offsets.push(0);
        for u in graph.nodes() {
            let start = targets.len();
            targets.extend(graph.out_edges(u).iter().map(|&id| graph.edge(id).dst.0));
            targets[start..].sort_unstable();
            let mut write = start;
            for read in start..targets.len() {
                if write == start || targets[write - 1] != targets[read] {
                    targets[write] = targets[read];
                    write += 1;
                }
            }
            targets.truncate(write);
            offsets.push(targets.len());
        }
        Arcs { offsets, targets }
    }

    fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    fn succ(&self, u: u32) -> &[u32] {
        &self.targets[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }
}

/// Iterative Tarjan; returns a component id per node.
fn strongly_connected(arcs: &Arcs) -> Vec<u32> {
    const UNSEEN: u32 = u32::MAX;
    let n = arcs.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut component = vec![UNSEEN; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut next_component = 0u32;
    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let vi = v as usize;
            if *pos == 0 && index[vi] == UNSEEN {
                index[vi] = next_index;
                low[vi] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[vi] = true;
            }
            let succ = arcs.succ(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                let wi = w as usize;
                if index[wi] == UNSEEN {
                    call.push((w, 0));
                } else if on_stack[wi] {
                    low[vi] = low[vi].min(index[wi]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[vi]);
            }
            if low[vi] == index[vi] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w as usize] = false;
                    component[w as usize] = next_component;
                    if w == v {
                        break;
                    }
                }
                next_component += 1;
            }
        }
    }
    component
}

/// Returns cycles as local node paths rooted at their minimum node, plus
/// whether the cap was hit.
fn enumerate(arcs: &Arcs, config: &CycleConfig) -> (Vec<Vec<u32>>, bool) {
    let n = arcs.len();
    let bound = config.max_len as u32;
    let component = strongly_connected(arcs);
    let mut component_size = vec![0u32; n];
    for &c in &component {
        component_size[c as usize] += 1;
    }

    let mut out: Vec<Vec<u32>> = Vec::new();
    let mut lock = vec![bound; n];
    let mut blocked_by: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut on_path = vec![false; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut path: Vec<u32> = Vec::new();
    let mut frames: Vec<(u32, usize)> = Vec::new();
    let mut closing: Vec<u32> = Vec::new();
    let mut relax: Vec<(u32, u32)> = Vec::new();

    for start in 0..n as u32 {
        let comp = component[start as usize];
        if component_size[comp as usize] < 2 {
            continue;
        }
        let allowed = |w: u32| w >= start && component[w as usize] == comp;

        path.clear();
        path.push(start);
        on_path[start as usize] = true;
        lock[start as usize] = 0;
        touched.push(start);
        frames.push((start, 0));
        closing.push(bound);

        while let Some(&(v, pos)) = frames.last() {
            let succ = arcs.succ(v);
            let mut next = pos;
            let mut pushed = false;
            while next < succ.len() {
                let w = succ[next];
                next += 1;
                if !allowed(w) {
                    continue;
                }
                if w == start {
                    if path.len() >= config.min_len {
                        if out.len() >= config.max_cycles_per_community {
                            reset(
                                &mut touched,
                                &mut lock,
                                &mut blocked_by,
                                &mut on_path,
                                bound,
                                &path,
                            );
                            return (out, true);
                        }
                        out.push(path.clone());
                    }
                    *closing.last_mut().expect("frame") = 1;
                } else if (path.len() as u32) < lock[w as usize] {
                    frames.last_mut().expect("frame").1 = next;
                    lock[w as usize] = path.len() as u32;
                    touched.push(w);
                    path.push(w);
                    on_path[w as usize] = true;
                    closing.push(bound);
                    frames.push((w, 0));
                    pushed = true;
                    break;
                }
            }
            if pushed {
                continue;
            }
            frames.pop();
            let v = path.pop().expect("path");
            on_path[v as usize] = false;
            let found = closing.pop().expect("closing");
            if let Some(parent) = closing.last_mut() {
                *parent = (*parent).min(found);
            }
            if found < bound {
                relax.push((found, v));
                while let Some((dist, u)) = relax.pop() {
                    let relaxed = bound - dist + 1;
                    if lock[u as usize] < relaxed {
                        lock[u as usize] = relaxed;
                        touched.push(u);
                        for &p in &blocked_by[u as usize] {
                            if !on_path[p as usize] {
                                relax.push((dist + 1, p));
                            }
                        }
                    }
                }
            } else {
                for &w in arcs.succ(v) {
                    if allowed(w) && !blocked_by[w as usize].contains(&v) {
                        blocked_by[w as usize].push(v);
                        touched.push(w);
                    }
                }
            }
        }
        reset(
            &mut touched,
            &mut lock,
            &mut blocked_by,
            &mut on_path,
            bound,
            &path,
        );
    }
    (out, false)
}

fn reset(
    touched: &mut Vec<u32>,
    lock: &mut [u32],
    blocked_by: &mut [Vec<u32>],
    on_path: &mut [bool],
    bound: u32,
    path: &[u32],
) {
    for &u in touched.iter() {
        lock[u as usize] = bound;
        blocked_by[u as usize].clear();
    }
    for &u in path {
        on_path[u as usize] = false;
    }
    touched.clear();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amount::Amount;
    use crate::graph::{build_graph, EdgeAttrs, LabeledEdge};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn graph(n: usize, arcs: &[(usize, usize)]) -> TransactionGraph {
        let labels: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        build_graph(
            labels,
            arcs.iter().map(|&(u, v)| {
                LabeledEdge::new(
                    format!("n{u}"),
                    format!("n{v}"),
                    EdgeAttrs::new(1, Amount::from_major(1), 2015, 2015),
                )
            }),
        )
        .unwrap()
    }

    fn node_lists(search: &CycleSearch) -> Vec<Vec<u32>> {
        search
            .cycles
            .iter()
            .map(|c| c.nodes.iter().map(|n| n.0).collect())
            .collect()
    }

    fn config(min_len: usize, max_len: usize) -> CycleConfig {
        CycleConfig {
            min_len,
            max_len,
            ..Default::default()
        }
    }

    /// Extends simple paths from each start through larger nodes only.
    fn brute_force(
        n: usize,
        arcs: &[(usize, usize)],
        min_len: usize,
        max_len: usize,
    ) -> BTreeSet<Vec<u32>> {
        let mut adj = vec![BTreeSet::new(); n];
        for &(u, v) in arcs {
            adj[u].insert(v);
        }
        let mut found = BTreeSet::new();
        fn extend(
            adj: &[BTreeSet<usize>],
            path: &mut Vec<usize>,
            min_len: usize,
            max_len: usize,
            found: &mut BTreeSet<Vec<u32>>,
        ) {
            let last = *path.last().unwrap();
            for &w in &adj[last] {
                if w == path[0] && path.len() >= min_len {
                    found.insert(path.iter().map(|&p| p as u32).collect());
                } else if w > path[0] && !path.contains(&w) && path.len() < max_len {
                    path.push(w);
                    extend(adj, path, min_len, max_len, found);
                    path.pop();
                }
            }
        }
        for s in 0..n {
            extend(&adj, &mut vec![s], min_len, max_len, &mut found);
        }
        found
    }

    #[test]
    fn triangle_has_one_cycle() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let found = simple_cycles(&g, &CycleConfig::default());
        assert_eq!(node_lists(&found), vec![vec![0, 1, 2]]);
        assert_eq!(found.cycles[0].edges.len(), 3);
        assert!(!found.truncated);
    }

    #[test]
    fn dag_has_none() {
        let g = graph(5, &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (0, 4)]);
        assert!(simple_cycles(&g, &config(2, 10)).cycles.is_empty());
    }

    #[test]
    fn complete_digraph_on_four() {
        let arcs: Vec<_> = (0..4)
            .flat_map(|u| (0..4).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        let g = graph(4, &arcs);
        let three = simple_cycles(&g, &config(3, 10));
        assert_eq!(three.cycles.len(), 14);
        assert_eq!(three.cycles.iter().filter(|c| c.length() == 3).count(), 8);
        assert_eq!(three.cycles.iter().filter(|c| c.length() == 4).count(), 6);
        assert_eq!(simple_cycles(&g, &config(2, 10)).cycles.len(), 20);
    }

    #[test]
    fn parallel_arcs_do_not_multiply() {
        let g = graph(2, &[(0, 1), (0, 1), (1, 0)]);
        let found = simple_cycles(&g, &config(2, 10));
        assert_eq!(found.cycles.len(), 1);
        assert_eq!(found.cycles[0].edges.len(), 3);
        assert!(found.cycles[0].edges[..2]
            .iter()
            .all(|e| (e.src.0, e.dst.0) == (0, 1)));

        let g = graph(3, &[(0, 1), (1, 2), (1, 2), (2, 0)]);
        let found = simple_cycles(&g, &config(3, 10));
        assert_eq!(found.cycles.len(), 1);
        assert_eq!(found.cycles[0].edges.len(), 4);
    }

    #[test]
    fn cap_truncates() {
        let arcs: Vec<_> = (0..5)
            .flat_map(|u| (0..5).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        let g = graph(5, &arcs);
        let capped = simple_cycles(
            &g,
            &CycleConfig {
                max_cycles_per_community: 7,
                ..config(2, 5)
            },
        );
        assert!(capped.truncated);
        assert_eq!(capped.cycles.len(), 7);
    }

    #[test]
    fn length_bound_respected() {
        // a 6-cycle with a chord making a 3-cycle
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (2, 0)]);
        assert_eq!(
            node_lists(&simple_cycles(&g, &config(3, 5))),
            vec![vec![0, 1, 2]]
        );
        assert_eq!(simple_cycles(&g, &config(3, 6)).cycles.len(), 2);
        assert_eq!(
            node_lists(&simple_cycles(&g, &config(4, 6))),
            vec![vec![0, 1, 2, 3, 4, 5]]
        );
    }

    #[test]
    fn subgraph_cycles_use_root_ids() {
        let g = graph(5, &[(0, 1), (2, 3), (3, 4), (4, 2)]);
        let sub = g.node_subgraph(&[AccountId(2), AccountId(3), AccountId(4)]);
        let found = simple_cycles_in_community(&sub, &CycleConfig::default(), 9);
        assert_eq!(node_lists(&found), vec![vec![2, 3, 4]]);
        assert_eq!(found.cycles[0].community_id, 9);
        assert_eq!(found.cycles[0].edges[0].src, AccountId(2));
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..300 {
            let n = rng.random_range(1..=9);
            let p = rng.random_range(0.1..0.6);
            let arcs: Vec<_> = (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|&(u, v)| u != v)
                .filter(|_| rng.random_bool(p))
                .collect();
            let min_len = rng.random_range(2..=4);
            let max_len = rng.random_range(min_len..=n.max(min_len) + 1);
            let g = graph(n, &arcs);
            let got = node_lists(&simple_cycles(&g, &config(min_len, max_len)));
            let expected: Vec<Vec<u32>> = brute_force(n, &arcs, min_len, max_len)
                .into_iter()
                .collect();
            assert_eq!(
                got, expected,
                "trial {trial}: n={n} min={min_len} max={max_len} arcs={arcs:?}"
            );
        }
    }

    #[test]
    fn rotation() {
        assert_eq!(canonical_rotation(&[5, 2, 9, 3]), vec![2, 9, 3, 5]);
        assert!(canonical_rotation::<u32>(&[]).is_empty());
    }
}
