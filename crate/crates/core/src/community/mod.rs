//! Community detection: modularity scoring and the Louvain method.

mod louvain;
mod modularity;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::AccountId;

pub use louvain::{louvain, louvain_on_view, LouvainResult};
pub use modularity::{
    build_modularity_view, modularity, modularity_with_resolution, ModularityView,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommunityError {
    #[error("modularity undefined (m = 0)")]
    ZeroWeight,
    #[error("edge weight total overflows")]
    WeightOverflow,
    #[error("partition covers {partition} nodes but the graph has {graph}")]
    PartitionMismatch { partition: usize, graph: usize },
    #[error("invalid louvain config: {0}")]
    InvalidConfig(&'static str),
}

/// Which edge attribute becomes the undirected weight `A_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Total amount in minor units.
    #[default]
    Amount,
    #[serde(rename = "count", alias = "tx_count")]
    TxCount,
    /// Every edge weighs 1.
    Unweighted,
}

impl WeightMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightMode::Amount => "amount",
            WeightMode::TxCount => "count",
            WeightMode::Unweighted => "unweighted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LouvainConfig {
    pub weight_mode: WeightMode,
    pub resolution: f64,
    pub gain_tolerance: f64,
    pub seed: u64,
    pub max_levels: u32,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            weight_mode: WeightMode::Amount,
            resolution: 1.0,
            gain_tolerance: 1e-7,
            seed: 0,
            max_levels: 32,
        }
    }
}

impl LouvainConfig {
    pub fn validate(&self) -> Result<(), CommunityError> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(CommunityError::InvalidConfig("resolution must be positive"));
        }
        if !(self.gain_tolerance > 0.0 && self.gain_tolerance.is_finite()) {
            return Err(CommunityError::InvalidConfig(
                "gain_tolerance must be positive",
            ));
        }
        if self.max_levels == 0 {
            return Err(CommunityError::InvalidConfig(
                "max_levels must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Assignment of every node to exactly one community. Labels are
/// consecutive from 0, numbered in order of first appearance by node id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<u32>,
    community_count: usize,
}

impl Partition {
    /// Normalizes arbitrary labels to consecutive ones.
    pub fn from_labels<I: IntoIterator<Item = u32>>(labels: I) -> Self {
        let mut remap = std::collections::HashMap::new();
        let assignment: Vec<u32> = labels
            .into_iter()
            .map(|l| {
                let next = remap.len() as u32;
                *remap.entry(l).or_insert(next)
            })
            .collect();
        Partition {
            assignment,
            community_count: remap.len(),
        }
    }

    pub fn singletons(node_count: usize) -> Self {
        Partition {
            assignment: (0..node_count as u32).collect(),
            community_count: node_count,
        }
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    #[inline]
    pub fn community_of(&self, node: AccountId) -> u32 {
        self.assignment[node.index()]
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.community_count];
        for &c in &self.assignment {
            sizes[c as usize] += 1;
        }
        sizes
    }

    /// Members of every community, ascending by node id.
    pub fn members(&self) -> Vec<Vec<AccountId>> {
        let mut groups: Vec<Vec<AccountId>> = self
            .community_sizes()
            .into_iter()
            .map(Vec::with_capacity)
            .collect();
        for (i, &c) in self.assignment.iter().enumerate() {
            groups[c as usize].push(AccountId(i as u32));
        }
        groups
    }

    /// True if both partitions group nodes identically, ignoring labels.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.assignment.len() == other.assignment.len()
            && Partition::from_labels(self.assignment.iter().copied()).assignment
                == Partition::from_labels(other.assignment.iter().copied()).assignment
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_normalized() {
        let p = Partition::from_labels([7, 7, 3, 9, 3]);
        assert_eq!(p.assignment(), &[0, 0, 1, 2, 1]);
        assert_eq!(p.community_count(), 3);
        assert_eq!(p.community_sizes(), vec![2, 2, 1]);
        assert_eq!(p.members()[1], vec![AccountId(2), AccountId(4)]);
        assert!(p.same_grouping(&Partition::from_labels([1, 1, 0, 5, 0])));
        assert!(!p.same_grouping(&Partition::singletons(5)));
    }

    #[test]
    fn config_validation() {
        assert!(LouvainConfig::default().validate().is_ok());
        let bad = LouvainConfig {
            resolution: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = LouvainConfig {
            gain_tolerance: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn weight_mode_names() {
        let m: WeightMode = serde_json::from_str("\"tx_count\"").unwrap();
        assert_eq!(m, WeightMode::TxCount);
        assert_eq!(serde_json::to_string(&m).unwrap(), "\"count\"");
    }
}
