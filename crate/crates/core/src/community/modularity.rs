use super::{CommunityError, Partition, WeightMode};
use crate::graph::{TransactionEdge, TransactionGraph};

/// Undirected weighted view of a transaction graph used for modularity.
///
/// Opposite directed edges fold into one weight, `A_uv = w(u->v) + w(v->u)`.
/// `self_weight[i]` holds `A_ii` in double-sum convention, which is only
/// non-zero for aggregated views built by the Louvain levels. All weights
/// are exact integers.
#[derive(Debug, Clone)]
pub struct ModularityView {
    pub(super) offsets: Vec<usize>,
    pub(super) neighbors: Vec<u32>,
    pub(super) weights: Vec<u64>,
    pub(super) self_weight: Vec<u64>,
    pub(super) strength: Vec<u64>,
    pub(super) two_m: u128,
}

fn edge_weight(edge: &TransactionEdge, mode: WeightMode) -> u64 {
    match mode {
        WeightMode::Amount => edge.amount.minor().max(0) as u64,
        WeightMode::TxCount => u64::from(edge.tx_count),
        WeightMode::Unweighted => 1,
    }
}

/// Symmetrizes `graph` under `mode`. Errors when the total weight is zero.
pub fn build_modularity_view(
    graph: &TransactionGraph,
    mode: WeightMode,
) -> Result<ModularityView, CommunityError> {
    let n = graph.node_count();
    let pairs = graph.edges().iter().filter_map(|e| {
        let w = edge_weight(e, mode);
        (w > 0).then_some((e.src.0, e.dst.0, w))
    });
    let view = ModularityView::from_pairs(n, pairs, vec![0; n])?;
    if view.two_m == 0 {
        return Err(CommunityError::ZeroWeight);
    }
    Ok(view)
}

impl ModularityView {
    /// Builds a view from undirected `(u, v, w)` contributions with `u != v`.
    /// Repeated pairs (in either orientation) are summed.
    pub(super) fn from_pairs<I>(
        n: usize,
        pairs: I,
        self_weight: Vec<u64>,
    ) -> Result<Self, CommunityError>
    where
        I: Iterator<Item = (u32, u32, u64)> + Clone,
    {
        let mut offsets = vec![0usize; n + 1];
        for (u, v, _) in pairs.clone() {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        let mut weights = vec![0u64; offsets[n]];
        for (u, v, w) in pairs {
            for (a, b) in [(u, v), (v, u)] {
                let slot = &mut cursor[a as usize];
                neighbors[*slot] = b;
                weights[*slot] = w;
                *slot += 1;
            }
        }
        // sort each row by neighbour and merge duplicates, compacting in place
        let mut write = 0usize;
        let mut new_offsets = vec![0usize; n + 1];
        let mut row: Vec<(u32, u64)> = Vec::new();
        for i in 0..n {
            row.clear();
            row.extend((offsets[i]..offsets[i + 1]).map(|k| (neighbors[k], weights[k])));
            row.sort_unstable_by_key(|&(j, _)| j);
            let start = write;
            for &(j, w) in &row {
                if write > start && neighbors[write - 1] == j {
                    weights[write - 1] = weights[write - 1]
                        .checked_add(w)
                        .ok_or(CommunityError::WeightOverflow)?;
                } else {
                    neighbors[write] = j;
                    weights[write] = w;
                    write += 1;
                }
            }
            new_offsets[i + 1] = write;
        }
        neighbors.truncate(write);
        weights.truncate(write);
        neighbors.shrink_to_fit();
        weights.shrink_to_fit();

        let mut strength = Vec::with_capacity(n);
        let mut two_m: u128 = 0;
        for i in 0..n {
            let mut k = self_weight[i];
            for &w in &weights[new_offsets[i]..new_offsets[i + 1]] {
                k = k.checked_add(w).ok_or(CommunityError::WeightOverflow)?;
            }
            strength.push(k);
            two_m += u128::from(k);
        }
        Ok(ModularityView {
            offsets: new_offsets,
            neighbors,
            weights,
            self_weight,
            strength,
            two_m,
        })
    }

    pub fn node_count(&self) -> usize {
        self.strength.len()
    }

    /// `(neighbour, A_ij)` pairs of node `i`, ascending, excluding `i` itself.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (u32, u64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.neighbors[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// `A_ij`; symmetric.
    pub fn weight(&self, i: usize, j: usize) -> u64 {
        if i == j {
            return self.self_weight[i];
        }
        let row = &self.neighbors[self.offsets[i]..self.offsets[i + 1]];
        match row.binary_search(&(j as u32)) {
            Ok(k) => self.weights[self.offsets[i] + k],
            Err(_) => 0,
        }
    }

    /// `k_i = sum_j A_ij`.
    pub fn strength(&self, i: usize) -> u64 {
        self.strength[i]
    }

    /// `2m = sum_ij A_ij`.
    pub fn total_weight_doubled(&self) -> u128 {
        self.two_m
    }

    /// `m = (1/2) sum_ij A_ij`.
    pub fn total_weight(&self) -> f64 {
        self.two_m as f64 / 2.0
    }
}

/// Modularity `Q` of `partition` under `view`.
pub fn modularity(view: &ModularityView, partition: &Partition) -> Result<f64, CommunityError> {
    modularity_with_resolution(view, partition, 1.0)
}

/// Generalized modularity with resolution `gamma` (1.0 gives the standard `Q`).
///
/// Evaluated per community: `sum_c [ in_c / 2m - gamma (tot_c / 2m)^2 ]`,
/// where `in_c` sums `A_ij` over ordered pairs inside `c` and `tot_c` sums
/// strengths.
pub fn modularity_with_resolution(
    view: &ModularityView,
    partition: &Partition,
    gamma: f64,
) -> Result<f64, CommunityError> {
    let n = view.node_count();
    if partition.node_count() != n {
        return Err(CommunityError::PartitionMismatch {
            partition: partition.node_count(),
            graph: n,
        });
    }
    if view.two_m == 0 {
        return Err(CommunityError::ZeroWeight);
    }
    let labels = partition.assignment();
    let mut inside = vec![0u128; partition.community_count()];
    let mut total = vec![0u128; partition.community_count()];
    for i in 0..n {
        let c = labels[i] as usize;
        total[c] += u128::from(view.strength[i]);
        inside[c] += u128::from(view.self_weight[i]);
        for (j, w) in view.neighbors(i) {
            if labels[j as usize] as usize == c {
                inside[c] += u128::from(w);
            }
        }
    }
    let two_m = view.two_m as f64;
    let covered: u128 = inside.iter().sum();
    let expected: f64 = total.iter().map(|&t| (t as f64 / two_m).powi(2)).sum();
    Ok(covered as f64 / two_m - gamma * expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amount::Amount;
    use crate::graph::{build_graph, EdgeAttrs, LabeledEdge};

    fn graph(n: usize, edges: &[(usize, usize, i64)]) -> TransactionGraph {
        let labels: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        build_graph(
            labels,
            edges.iter().map(|&(u, v, w)| {
                LabeledEdge::new(
                    format!("n{u}"),
                    format!("n{v}"),
                    EdgeAttrs::new(1, Amount::from_minor(w), 2015, 2015),
                )
            }),
        )
        .unwrap()
    }

    fn two_triangles() -> TransactionGraph {
        graph(
            6,
            &[
                (0, 1, 1),
                (1, 2, 1),
                (2, 0, 1),
                (3, 4, 1),
                (4, 5, 1),
                (5, 3, 1),
            ],
        )
    }

    #[test]
    fn single_edge() {
        let view = build_modularity_view(&graph(2, &[(0, 1, 5)]), WeightMode::Amount).unwrap();
        assert_eq!(view.weight(0, 1), 5);
        assert_eq!(view.weight(1, 0), 5);
        assert_eq!((view.strength(0), view.strength(1)), (5, 5));
        assert_eq!(view.total_weight(), 5.0);
    }

    #[test]
    fn opposite_edges_fold() {
        let view =
            build_modularity_view(&graph(2, &[(0, 1, 3), (1, 0, 4)]), WeightMode::Amount).unwrap();
        assert_eq!(view.weight(0, 1), 7);
        assert_eq!(view.total_weight(), 7.0);
    }

    #[test]
    fn unweighted_triangles() {
        let view = build_modularity_view(&two_triangles(), WeightMode::Unweighted).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!(view.weight(i, j) <= 1);
            }
        }
        assert_eq!(view.total_weight(), 6.0);
    }

    #[test]
    fn zero_weight_is_rejected() {
        let g = graph(3, &[(0, 1, 0), (1, 2, 0)]);
        assert_eq!(
            build_modularity_view(&g, WeightMode::Amount).unwrap_err(),
            CommunityError::ZeroWeight
        );
        assert!(build_modularity_view(&g, WeightMode::Unweighted).is_ok());
        let empty = graph(4, &[]);
        assert_eq!(
            build_modularity_view(&empty, WeightMode::Unweighted).unwrap_err(),
            CommunityError::ZeroWeight
        );
    }

    #[test]
    fn known_values() {
        let view = build_modularity_view(&two_triangles(), WeightMode::Unweighted).unwrap();
        let one = Partition::from_labels([0; 6]);
        assert!(modularity(&view, &one).unwrap().abs() < 1e-12);
        let split = Partition::from_labels([0, 0, 0, 1, 1, 1]);
        assert!((modularity(&view, &split).unwrap() - 0.5).abs() < 1e-12);
        let singles = Partition::singletons(6);
        assert!((modularity(&view, &singles).unwrap() + 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn size_mismatch() {
        let view = build_modularity_view(&two_triangles(), WeightMode::Unweighted).unwrap();
        let err = modularity(&view, &Partition::singletons(5)).unwrap_err();
        assert_eq!(
            err,
            CommunityError::PartitionMismatch {
                partition: 5,
                graph: 6
            }
        );
    }
}
