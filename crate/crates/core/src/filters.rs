//! Edge and community filters applied before cycle search.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::Amount;
use crate::community::Partition;
use crate::graph::{TransactionEdge, TransactionGraph};

/// Reporting threshold: edges at or above this total are already reported.
pub const DEFAULT_AMOUNT_THRESHOLD: Amount = Amount::from_major(10_000);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid filter config: {0}")]
pub struct FilterConfigError(&'static str);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Edges whose year span is strictly below this many years pass.
    pub t0_years: u32,
    /// Edges whose amount is strictly below this pass.
    pub amount_threshold: Amount,
    /// Communities with fewer nodes are skipped.
    pub min_community_order: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            t0_years: 1,
            amount_threshold: DEFAULT_AMOUNT_THRESHOLD,
            min_community_order: 3,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), FilterConfigError> {
        if self.t0_years < 1 {
            return Err(FilterConfigError("t0_years must be at least 1"));
        }
        if self.amount_threshold <= Amount::ZERO {
            return Err(FilterConfigError("amount_threshold must be positive"));
        }
        if self.min_community_order < 1 {
            return Err(FilterConfigError("min_community_order must be at least 1"));
        }
        Ok(())
    }
}

#[inline]
pub fn passes_time(edge: &TransactionEdge, t0_years: u32) -> bool {
    edge.period_years() < t0_years
}

#[inline]
pub fn passes_amount(edge: &TransactionEdge, threshold: Amount) -> bool {
    edge.amount < threshold
}

/// Keeps edges active for fewer than `t0_years` whole years.
/// `u32::MAX` keeps everything.
pub fn time_filter(graph: &TransactionGraph, t0_years: u32) -> TransactionGraph {
    graph.edge_subgraph(|e| passes_time(e, t0_years))
}

/// Keeps edges whose amount is strictly below `threshold`.
/// [`Amount::MAX`] keeps everything.
pub fn amount_filter(graph: &TransactionGraph, threshold: Amount) -> TransactionGraph {
    if threshold == Amount::MAX {
        return graph.edge_subgraph(|_| true);
    }
    graph.edge_subgraph(|e| passes_amount(e, threshold))
}

/// Labels of communities with at least `min_order` members, ascending.
pub fn community_order_filter(partition: &Partition, min_order: usize) -> Vec<u32> {
    partition
        .community_sizes()
        .into_iter()
        .enumerate()
        .filter(|&(_, size)| size >= min_order)
        .map(|(c, _)| c as u32)
        .collect()
}
