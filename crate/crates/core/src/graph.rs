//! Compact directed multigraph of accounts and aggregated transactions.
//!
//! Nodes are dense `u32` indices; labels live in a table shared by a root
//! graph and every subgraph sliced from it. Adjacency is stored twice in CSR
//! form (outgoing and incoming), each list holding edge ids in ascending
//! order, so neighbourhood scans and subgraph extraction are linear.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::Amount;

/// Dense node index inside one [`TransactionGraph`].
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct AccountId(pub u32);

impl AccountId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Index of an edge inside one [`TransactionGraph`].
pub type EdgeId = u32;

/// Attributes carried by one directed account pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeAttrs {
    pub tx_count: u32,
    pub amount: Amount,
    pub year_first: u16,
    pub year_last: u16,
}

impl EdgeAttrs {
    pub fn new(tx_count: u32, amount: Amount, year_first: u16, year_last: u16) -> Self {
        EdgeAttrs {
            tx_count,
            amount,
            year_first,
            year_last,
        }
    }

    fn check(&self) -> Result<(), &'static str> {
        if self.tx_count < 1 {
            return Err("tx_count must be at least 1");
        }
        if self.amount.is_negative() {
            return Err("amount must be non-negative");
        }
        if self.year_first > self.year_last {
            return Err("year_first is after year_last");
        }
        Ok(())
    }
}

/// One directed data element: account pair, transaction count, total amount
/// and the first/last year of activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransactionEdge {
    pub src: AccountId,
    pub dst: AccountId,
    pub tx_count: u32,
    pub amount: Amount,
    pub year_first: u16,
    pub year_last: u16,
}

impl TransactionEdge {
    pub fn new(src: AccountId, dst: AccountId, attrs: EdgeAttrs) -> Self {
        TransactionEdge {
            src,
            dst,
            tx_count: attrs.tx_count,
            amount: attrs.amount,
            year_first: attrs.year_first,
            year_last: attrs.year_last,
        }
    }

    pub fn attrs(&self) -> EdgeAttrs {
        EdgeAttrs::new(self.tx_count, self.amount, self.year_first, self.year_last)
    }

    /// Whole years between the first and last transaction.
    #[inline]
    pub fn period_years(&self) -> u32 {
        u32::from(self.year_last.saturating_sub(self.year_first))
    }
}

/// An edge whose endpoints are still external labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledEdge {
    pub src: String,
    pub dst: String,
    pub attrs: EdgeAttrs,
}

impl LabeledEdge {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, attrs: EdgeAttrs) -> Self {
        LabeledEdge {
            src: src.into(),
            dst: dst.into(),
            attrs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge endpoint {0:?} is not a known node label")]
    DanglingEndpoint(String),
    #[error("edge endpoint index {index} is out of range for {node_count} nodes")]
    DanglingIndex { index: u32, node_count: usize },
    #[error("duplicate node label {0:?}")]
    DuplicateLabel(String),
    #[error("self-loop on {0:?}")]
    SelfLoop(String),
    #[error("edge {edge}: {reason}")]
    InvalidEdge { edge: usize, reason: &'static str },
    #[error("graph exceeds the u32 index space")]
    TooLarge,
}

/// Immutable directed multigraph with out- and in-adjacency.
#[derive(Debug, Clone)]
pub struct TransactionGraph {
    labels: Arc<Vec<String>>,
    /// local node -> node of the root graph (index into `labels`)
    origin: Vec<u32>,
    edges: Vec<TransactionEdge>,
    /// local edge -> edge of the root graph
    edge_origin: Vec<u32>,
    out_offsets: Vec<u32>,
    out_edges: Vec<EdgeId>,
    in_offsets: Vec<u32>,
    in_edges: Vec<EdgeId>,
}

/// Builds a graph from labeled edges. Edge order is preserved.
pub fn build_graph<I>(node_labels: Vec<String>, edges: I) -> Result<TransactionGraph, GraphError>
where
    I: IntoIterator<Item = LabeledEdge>,
{
    if node_labels.len() > u32::MAX as usize {
        return Err(GraphError::TooLarge);
    }
    let mut index: HashMap<&str, u32> = HashMap::with_capacity(node_labels.len());
    for (i, label) in node_labels.iter().enumerate() {
        if index.insert(label.as_str(), i as u32).is_some() {
            return Err(GraphError::DuplicateLabel(label.clone()));
        }
    }
    let lookup = |label: &str| {
        index
            .get(label)
            .copied()
            .map(AccountId)
            .ok_or_else(|| GraphError::DanglingEndpoint(label.to_string()))
    };
    let mut indexed = Vec::new();
    for edge in edges {
        let src = lookup(&edge.src)?;
        let dst = lookup(&edge.dst)?;
        indexed.push(TransactionEdge::new(src, dst, edge.attrs));
    }
    drop(index);
    TransactionGraph::from_indexed(node_labels, indexed)
}

impl TransactionGraph {
    /// Builds a graph from edges whose endpoints already index `labels`.
    pub fn from_indexed(
        labels: Vec<String>,
        edges: Vec<TransactionEdge>,
    ) -> Result<Self, GraphError> {
        let node_count = labels.len();
        if node_count > u32::MAX as usize || edges.len() > u32::MAX as usize {
            return Err(GraphError::TooLarge);
        }
        for (i, edge) in edges.iter().enumerate() {
            for end in [edge.src, edge.dst] {
                if end.index() >= node_count {
                    return Err(GraphError::DanglingIndex {
                        index: end.0,
                        node_count,
                    });
                }
            }
            if edge.src == edge.dst {
                return Err(GraphError::SelfLoop(labels[edge.src.index()].clone()));
            }
            edge.attrs()
                .check()
                .map_err(|reason| GraphError::InvalidEdge { edge: i, reason })?;
        }
        let mut seen: HashMap<&str, ()> = HashMap::with_capacity(node_count);
        for label in &labels {
            if seen.insert(label.as_str(), ()).is_some() {
                return Err(GraphError::DuplicateLabel(label.clone()));
            }
        }
        drop(seen);
        let origin = (0..node_count as u32).collect();
        let edge_origin = (0..edges.len() as u32).collect();
        Ok(Self::assemble(Arc::new(labels), origin, edges, edge_origin))
    }

    fn assemble(
        labels: Arc<Vec<String>>,
        origin: Vec<u32>,
        edges: Vec<TransactionEdge>,
        edge_origin: Vec<u32>,
    ) -> Self {
        let n = origin.len();
        let (out_offsets, out_edges) = csr(n, &edges, |e| e.src);
        let (in_offsets, in_edges) = csr(n, &edges, |e| e.dst);
        TransactionGraph {
            labels,
            origin,
            edges,
            edge_origin,
            out_offsets,
            out_edges,
            in_offsets,
            in_edges,
        }
    }

    pub fn node_count(&self) -> usize {
        self.origin.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = AccountId> + '_ {
        (0..self.node_count() as u32).map(AccountId)
    }

    pub fn edges(&self) -> &[TransactionEdge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: EdgeId) -> &TransactionEdge {
        &self.edges[id as usize]
    }

    /// Ids of edges leaving `node`, ascending.
    #[inline]
    pub fn out_edges(&self, node: AccountId) -> &[EdgeId] {
        let i = node.index();
        &self.out_edges[self.out_offsets[i] as usize..self.out_offsets[i + 1] as usize]
    }

    /// Ids of edges entering `node`, ascending.
    #[inline]
    pub fn in_edges(&self, node: AccountId) -> &[EdgeId] {
        let i = node.index();
        &self.in_edges[self.in_offsets[i] as usize..self.in_offsets[i + 1] as usize]
    }

    pub fn out_degree(&self, node: AccountId) -> usize {
        self.out_edges(node).len()
    }

    pub fn in_degree(&self, node: AccountId) -> usize {
        self.in_edges(node).len()
    }

    pub fn label(&self, node: AccountId) -> &str {
        &self.labels[self.origin[node.index()] as usize]
    }

    /// The node of the root graph this node was sliced from.
    pub fn origin(&self, node: AccountId) -> AccountId {
        AccountId(self.origin[node.index()])
    }

    /// The edge of the root graph this edge was sliced from.
    pub fn edge_origin(&self, edge: EdgeId) -> EdgeId {
        self.edge_origin[edge as usize]
    }

    /// Label table of the root graph, indexed by root node id.
    pub fn root_labels(&self) -> &[String] {
        &self.labels
    }

    /// Keeps the edges accepted by `keep` and the nodes incident to them.
    pub fn edge_subgraph<F>(&self, mut keep: F) -> TransactionGraph
    where
        F: FnMut(&TransactionEdge) -> bool,
    {
        let kept: Vec<EdgeId> = (0..self.edges.len() as u32)
            .filter(|&id| keep(self.edge(id)))
            .collect();
        self.edge_subgraph_ids(&kept)
    }

    /// Keeps exactly the listed edges and the nodes incident to them.
    ///
    /// Panics if an id is out of range.
    pub fn edge_subgraph_ids(&self, ids: &[EdgeId]) -> TransactionGraph {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut present = vec![false; self.node_count()];
        for &id in &ids {
            let e = self.edge(id);
            present[e.src.index()] = true;
            present[e.dst.index()] = true;
        }
        let mut local = vec![u32::MAX; self.node_count()];
        let mut origin = Vec::new();
        for (i, _) in present.iter().enumerate().filter(|(_, p)| **p) {
            local[i] = origin.len() as u32;
            origin.push(self.origin[i]);
        }
        let mut edges = Vec::with_capacity(ids.len());
        let mut edge_origin = Vec::with_capacity(ids.len());
        for &id in &ids {
            let e = self.edge(id);
            edges.push(TransactionEdge {
                src: AccountId(local[e.src.index()]),
                dst: AccountId(local[e.dst.index()]),
                ..*e
            });
            edge_origin.push(self.edge_origin[id as usize]);
        }
        Self::assemble(Arc::clone(&self.labels), origin, edges, edge_origin)
    }

    /// Keeps the given nodes and every edge with both endpoints among them.
    ///
    /// Nodes are re-indexed in ascending order of their current ids. Runs in
    /// time proportional to the selected nodes and their out-degrees, so it
    /// is cheap to call once per community of a large graph.
    ///
    /// Panics if a node id is out of range.
    pub fn node_subgraph(&self, nodes: &[AccountId]) -> TransactionGraph {
        let mut nodes = nodes.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        let local: HashMap<u32, u32> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.0, i as u32))
            .collect();
        let mut kept: Vec<EdgeId> = Vec::new();
        for &node in &nodes {
            for &id in self.out_edges(node) {
                if local.contains_key(&self.edge(id).dst.0) {
                    kept.push(id);
                }
            }
        }
        kept.sort_unstable();
        let mut edges = Vec::with_capacity(kept.len());
        let mut edge_origin = Vec::with_capacity(kept.len());
        for &id in &kept {
            let e = self.edge(id);
            edges.push(TransactionEdge {
                src: AccountId(local[&e.src.0]),
                dst: AccountId(local[&e.dst.0]),
                ..*e
            });
            edge_origin.push(self.edge_origin[id as usize]);
        }
        let origin = nodes.iter().map(|n| self.origin[n.index()]).collect();
        Self::assemble(Arc::clone(&self.labels), origin, edges, edge_origin)
    }

    /// Bytes held by this graph's own buffers. The shared label table is
    /// not included.
    pub fn heap_bytes(&self) -> usize {
        use std::mem::size_of;
        self.origin.capacity() * size_of::<u32>()
            + self.edges.capacity() * size_of::<TransactionEdge>()
            + self.edge_origin.capacity() * size_of::<u32>()
            + (self.out_offsets.capacity() + self.in_offsets.capacity()) * size_of::<u32>()
            + (self.out_edges.capacity() + self.in_edges.capacity()) * size_of::<EdgeId>()
    }
}

fn csr<F>(n: usize, edges: &[TransactionEdge], key: F) -> (Vec<u32>, Vec<EdgeId>)
where
    F: Fn(&TransactionEdge) -> AccountId,
{
    let mut offsets = vec![0u32; n + 1];
    for e in edges {
        offsets[key(e).index() + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor: Vec<u32> = offsets[..n].to_vec();
    let mut list = vec![0; edges.len()];
    for (id, e) in edges.iter().enumerate() {
        let slot = &mut cursor[key(e).index()];
        list[*slot as usize] = id as EdgeId;
        *slot += 1;
    }
    (offsets, list)
}
