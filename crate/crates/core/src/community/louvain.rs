//! Two-phase Louvain modularity optimization.
//!
//! Each level runs local moves (every node tries the neighbouring community
//! with the best modularity gain) until a full pass moves nothing, then
//! collapses communities into super-nodes. Node visit order is a seeded
//! shuffle redrawn every pass; ties between equally good target
//! communities go to the smallest label.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::modularity::{build_modularity_view, modularity_with_resolution, ModularityView};
use super::{CommunityError, LouvainConfig, Partition};
use crate::graph::TransactionGraph;

#[derive(Debug, Clone)]
pub struct LouvainResult {
    pub partition: Partition,
    /// Modularity of the singleton partition, at the configured resolution.
    pub initial_modularity: f64,
    /// Modularity after each level that moved at least one node.
    pub level_modularity: Vec<f64>,
}

impl LouvainResult {
    pub fn modularity(&self) -> f64 {
        self.level_modularity
            .last()
            .copied()
            .unwrap_or(self.initial_modularity)
    }
}

pub fn louvain(
    graph: &TransactionGraph,
    config: &LouvainConfig,
) -> Result<LouvainResult, CommunityError> {
    config.validate()?;
    let view = build_modularity_view(graph, config.weight_mode)?;
    louvain_on_view(&view, config)
}

pub fn louvain_on_view(
    view: &ModularityView,
    config: &LouvainConfig,
) -> Result<LouvainResult, CommunityError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    run(view, config, &mut |_level, n| {
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut rng);
        order
    })
}

/// Core loop with an injectable visit order, called once per pass with the
/// level index and level node count.
pub(crate) fn run(
    view: &ModularityView,
    config: &LouvainConfig,
    order: &mut dyn FnMut(usize, usize) -> Vec<u32>,
) -> Result<LouvainResult, CommunityError> {
    config.validate()?;
    if view.two_m == 0 {
        return Err(CommunityError::ZeroWeight);
    }
    let gamma = config.resolution;
    let initial =
        modularity_with_resolution(view, &Partition::singletons(view.node_count()), gamma)?;
    let mut flat: Vec<u32> = (0..view.node_count() as u32).collect();
    let mut trace = Vec::new();
    let mut previous = initial;
    let mut owned: Option<ModularityView> = None;

    for level in 0..config.max_levels as usize {
        let current = owned.as_ref().unwrap_or(view);
        let (labels, moved) = local_moves(current, gamma, config.gain_tolerance, &mut |n| {
            order(level, n)
        });
        if !moved {
            break;
        }
        let level_partition = Partition::from_labels(labels);
        for c in flat.iter_mut() {
            *c = level_partition.community_of(crate::graph::AccountId(*c));
        }
        let q = modularity_with_resolution(current, &level_partition, gamma)?;
        trace.push(q);
        let gain = q - previous;
        previous = q;
        if gain <= config.gain_tolerance
            || level_partition.community_count() == current.node_count()
        {
            break;
        }
        owned = Some(aggregate(current, &level_partition)?);
    }

    Ok(LouvainResult {
        partition: Partition::from_labels(flat),
        initial_modularity: initial,
        level_modularity: trace,
    })
}

const ROUNDOFF: f64 = 1e-10;

/// One level of local moves starting from singletons. Returns the raw
/// community label per node and whether anything moved.
fn local_moves(
    view: &ModularityView,
    gamma: f64,
    tolerance: f64,
    order: &mut dyn FnMut(usize) -> Vec<u32>,
) -> (Vec<u32>, bool) {
    let n = view.node_count();
    let two_m = view.two_m as f64;
    let m = two_m / 2.0;
    let strength: Vec<f64> = view.strength.iter().map(|&k| k as f64).collect();
    let mut community: Vec<u32> = (0..n as u32).collect();
    let mut total: Vec<f64> = strength.clone();
    // scratch: weight from the current node to each neighbouring community
    let mut link = vec![0f64; n];
    let mut seen = vec![u32::MAX; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut moved_any = false;

    loop {
        let mut moved = 0usize;
        let mut pass_gain = 0.0f64;
        for (stamp, &node) in order(n).iter().enumerate() {
            let i = node as usize;
            let stamp = stamp as u32;
            let own = community[i];
            let k = strength[i];
            touched.clear();
            seen[own as usize] = stamp;
            link[own as usize] = 0.0;
            touched.push(own);
            for (j, w) in view.neighbors(i) {
                let c = community[j as usize];
                if seen[c as usize] != stamp {
                    seen[c as usize] = stamp;
                    link[c as usize] = 0.0;
                    touched.push(c);
                }
                link[c as usize] += w as f64;
            }
            total[own as usize] -= k;
            let score = |c: u32| link[c as usize] - gamma * total[c as usize] * k / two_m;
            let stay = score(own);
            let mut best = own;
            let mut best_score = f64::NEG_INFINITY;
            for &c in &touched {
                if c == own {
                    continue;
                }
                let s = score(c);
                if s > best_score || (s == best_score && c < best) {
                    best = c;
                    best_score = s;
                }
            }
            // any positive gain counts; the margin only absorbs roundoff
            if best != own && best_score - stay > ROUNDOFF * k.max(1.0) {
                community[i] = best;
                total[best as usize] += k;
                moved += 1;
                pass_gain += (best_score - stay) / m;
            } else {
                total[own as usize] += k;
            }
            // reset seen markers on the next stamp; clear here for reuse across passes
            for &c in &touched {
                seen[c as usize] = u32::MAX;
            }
        }
        moved_any |= moved > 0;
        if moved == 0 || pass_gain <= tolerance {
            break;
        }
    }
    (community, moved_any)
}

/// Collapses each community of `partition` into one node.
fn aggregate(
    view: &ModularityView,
    partition: &Partition,
) -> Result<ModularityView, CommunityError> {
    let k = partition.community_count();
    let members = partition.members();
    let mut self_weight = vec![0u64; k];
    let mut pairs: Vec<(u32, u32, u64)> = Vec::new();
    let mut acc = vec![0u64; k];
    let mut touched: Vec<u32> = Vec::new();
    for (c, nodes) in members.iter().enumerate() {
        let mut internal = 0u64;
        for &node in nodes {
            let i = node.index();
            internal = internal
                .checked_add(view.self_weight[i])
                .ok_or(CommunityError::WeightOverflow)?;
            for (j, w) in view.neighbors(i) {
                let d = partition.community_of(crate::graph::AccountId(j));
                if d as usize == c {
                    internal = internal
                        .checked_add(w)
                        .ok_or(CommunityError::WeightOverflow)?;
                } else if (d as usize) > c {
                    if acc[d as usize] == 0 {
                        touched.push(d);
                    }
                    acc[d as usize] = acc[d as usize]
                        .checked_add(w)
                        .ok_or(CommunityError::WeightOverflow)?;
                }
            }
        }
        self_weight[c] = internal;
        touched.sort_unstable();
        for &d in &touched {
            pairs.push((c as u32, d, acc[d as usize]));
            acc[d as usize] = 0;
        }
        touched.clear();
    }
    let view = ModularityView::from_pairs(k, pairs.iter().copied(), self_weight)?;
    Ok(view)
}
