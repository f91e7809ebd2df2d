//! End-to-end detection: communities, per-community edge filters, cycle
//! search and report assembly.

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::{louvain, CommunityError, LouvainConfig, LouvainResult, Partition};
use crate::cycles::{simple_cycles_in_community, CycleConfig, CycleRecord};
use crate::filters::{
    amount_filter, community_order_filter, passes_amount, passes_time, time_filter, FilterConfig,
};
use crate::graph::{AccountId, TransactionEdge, TransactionGraph};
use crate::report::{
    CommunitySizes, DetectionReport, Funnel, ReportCycle, ReportEdge, SizeSummary,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("graph has no usable edges")]
    NoUsableEdges,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Community(CommunityError),
    #[error("cannot start worker pool: {0}")]
    Workers(String),
}

impl From<CommunityError> for PipelineError {
    fn from(e: CommunityError) -> Self {
        match e {
            CommunityError::ZeroWeight => PipelineError::NoUsableEdges,
            CommunityError::InvalidConfig(msg) => PipelineError::InvalidConfig(msg.to_string()),
            other => PipelineError::Community(other),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub louvain: LouvainConfig,
    pub filter: FilterConfig,
    pub cycle: CycleConfig,
    /// Worker threads for the per-community stages; `None` uses every core.
    /// Not part of the report: results do not depend on it.
    #[serde(skip)]
    pub parallelism: Option<usize>,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.louvain.validate().map_err(PipelineError::from)?;
        self.filter
            .validate()
            .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        self.cycle
            .validate()
            .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        if self.parallelism == Some(0) {
            return Err(PipelineError::InvalidConfig(
                "parallelism must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// The configuration as recorded in reports.
    pub fn snapshot(&self) -> PipelineConfig {
        PipelineConfig {
            parallelism: None,
            ..self.clone()
        }
    }
}

/// Wall-clock and summed worker time per stage.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub louvain: Duration,
    pub filtering: Duration,
    pub cycles: Duration,
    pub community_stage_wall: Duration,
}

/// Everything a run produces, including intermediates the report omits.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub report: DetectionReport,
    pub louvain: LouvainResult,
    pub kept_communities: Vec<u32>,
    pub cycles: Vec<CycleRecord>,
    pub timings: StageTimings,
}

impl PipelineRun {
    pub fn partition(&self) -> &Partition {
        &self.louvain.partition
    }
}

struct CommunityOutcome {
    community: u32,
    edges_in: usize,
    time_pass: usize,
    amount_pass: usize,
    cycles: Vec<CycleRecord>,
    truncated: bool,
    filtering: Duration,
    search: Duration,
}

pub fn run_pipeline(
    graph: &TransactionGraph,
    config: &PipelineConfig,
) -> Result<DetectionReport, PipelineError> {
    Ok(run_pipeline_detailed(graph, config)?.report)
}

pub fn run_pipeline_detailed(
    graph: &TransactionGraph,
    config: &PipelineConfig,
) -> Result<PipelineRun, PipelineError> {
    config.validate()?;
    let mut timings = StageTimings::default();

    let started = Instant::now();
    let communities = louvain(graph, &config.louvain)?;
    timings.louvain = started.elapsed();

    let partition = &communities.partition;
    let kept = community_order_filter(partition, config.filter.min_community_order);
    let members = partition.members();

    let started = Instant::now();
    let work = |&community: &u32| {
        process_community(graph, &members[community as usize], community, config)
    };
    let outcomes: Vec<CommunityOutcome> = match config.parallelism {
        Some(1) => kept.iter().map(work).collect(),
        threads => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = threads {
                builder = builder.num_threads(n);
            }
            let pool = builder
                .build()
                .map_err(|e| PipelineError::Workers(e.to_string()))?;
            pool.install(|| kept.par_iter().map(work).collect())
        }
    };
    timings.community_stage_wall = started.elapsed();

    let mut funnel = Funnel {
        nodes: graph.node_count() as u64,
        edges_input: graph.edge_count() as u64,
        communities_total: partition.community_count() as u64,
        communities_kept: kept.len() as u64,
        ..Default::default()
    };
    let mut cycles: Vec<CycleRecord> = Vec::new();
    let mut truncated = Vec::new();
    for outcome in outcomes {
        funnel.edges_in_kept_communities += outcome.edges_in as u64;
        funnel.edges_time_pass += outcome.time_pass as u64;
        funnel.edges_amount_pass += outcome.amount_pass as u64;
        timings.filtering += outcome.filtering;
        timings.cycles += outcome.search;
        if outcome.truncated {
            truncated.push(outcome.community);
        }
        for mut cycle in outcome.cycles {
            cycle.cycle_id = cycles.len() as u64;
            cycles.push(cycle);
        }
    }

    let flagged = flagged_accounts(graph, &cycles);
    funnel.cycles_found = cycles.len() as u64;
    funnel.accounts_flagged = flagged.len() as u64;

    let sizes = partition.community_sizes();
    let summarize = |ids: &mut dyn Iterator<Item = usize>| {
        let mut s = SizeSummary::default();
        for size in ids {
            s.communities += 1;
            s.nodes += size as u64;
            s.largest = s.largest.max(size as u64);
        }
        s
    };
    let community_sizes = CommunitySizes {
        all: summarize(&mut sizes.iter().copied()),
        kept: summarize(&mut kept.iter().map(|&c| sizes[c as usize])),
    };

    let report = DetectionReport {
        config: config.snapshot(),
        input: None,
        funnel,
        community_sizes,
        truncated_communities: truncated,
        cycles: cycles.iter().map(|c| report_cycle(graph, c)).collect(),
        histogram: histogram(&cycles),
        flagged_accounts: flagged,
    };
    Ok(PipelineRun {
        report,
        louvain: communities,
        kept_communities: kept,
        cycles,
        timings,
    })
}

fn process_community(
    graph: &TransactionGraph,
    members: &[AccountId],
    community: u32,
    config: &PipelineConfig,
) -> CommunityOutcome {
    let started = Instant::now();
    let induced = graph.node_subgraph(members);
    let timed = time_filter(&induced, config.filter.t0_years);
    let below = amount_filter(&timed, config.filter.amount_threshold);
    let filtering = started.elapsed();
    let started = Instant::now();
    let search = simple_cycles_in_community(&below, &config.cycle, community);
    CommunityOutcome {
        community,
        edges_in: induced.edge_count(),
        time_pass: timed.edge_count(),
        amount_pass: below.edge_count(),
        cycles: search.cycles,
        truncated: search.truncated,
        filtering,
        search: started.elapsed(),
    }
}

pub fn report_cycle(graph: &TransactionGraph, cycle: &CycleRecord) -> ReportCycle {
    let labels = graph.root_labels();
    let name = |id: AccountId| labels[id.index()].clone();
    ReportCycle {
        cycle_id: cycle.cycle_id,
        community_id: cycle.community_id,
        length: cycle.length(),
        nodes: cycle.nodes.iter().map(|&n| name(n)).collect(),
        edges: cycle
            .edges
            .iter()
            .map(|e| ReportEdge {
                src: name(e.src),
                dst: name(e.dst),
                tx_count: e.tx_count,
                amount: e.amount,
                year_first: e.year_first,
                year_last: e.year_last,
            })
            .collect(),
    }
}

/// Sorted, deduplicated labels of every account on some cycle. Cycle node
/// ids refer to the root graph of `graph`.
pub fn flagged_accounts(graph: &TransactionGraph, cycles: &[CycleRecord]) -> Vec<String> {
    let labels = graph.root_labels();
    let ids: HashSet<AccountId> = cycles
        .iter()
        .flat_map(|c| c.nodes.iter().copied())
        .collect();
    let mut out: Vec<String> = ids
        .into_iter()
        .map(|id| labels[id.index()].clone())
        .collect();
    out.sort_unstable();
    out
}

/// Number of cycles per length.
pub fn histogram(cycles: &[CycleRecord]) -> BTreeMap<usize, u64> {
    let mut counts = BTreeMap::new();
    for c in cycles {
        *counts.entry(c.length()).or_insert(0) += 1;
    }
    counts
}

/// Re-checks every cycle against the root graph it came from: distinct
/// nodes, length bounds, real edges that pass both filters, and membership
/// in a single kept community. Returns one message per violation.
pub fn verify_cycles(
    graph: &TransactionGraph,
    partition: &Partition,
    cycles: &[CycleRecord],
    config: &PipelineConfig,
) -> Vec<String> {
    let mut problems = Vec::new();
    let sizes = partition.community_sizes();
    let mut seen = HashSet::new();
    for cycle in cycles {
        let id = cycle.cycle_id;
        let mut distinct = cycle.nodes.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != cycle.nodes.len() {
            problems.push(format!("cycle {id} repeats a node"));
        }
        if cycle.nodes.first() != distinct.first() {
            problems.push(format!("cycle {id} is not rooted at its smallest node"));
        }
        if !seen.insert(cycle.nodes.clone()) {
            problems.push(format!("cycle {id} is a duplicate"));
        }
        if cycle.length() < config.cycle.min_len || cycle.length() > config.cycle.max_len {
            problems.push(format!(
                "cycle {id} has length {} outside bounds",
                cycle.length()
            ));
        }
        for &n in &cycle.nodes {
            let c = partition.community_of(n);
            if c != cycle.community_id {
                problems.push(format!(
                    "cycle {id} node {n} is in community {c}, not {}",
                    cycle.community_id
                ));
            }
        }
        if sizes
            .get(cycle.community_id as usize)
            .is_none_or(|&s| s < config.filter.min_community_order)
        {
            problems.push(format!("cycle {id} lies in a community that was not kept"));
        }
        for (u, v) in cycle.arcs() {
            let on_arc: Vec<&TransactionEdge> = cycle
                .edges
                .iter()
                .filter(|e| e.src == u && e.dst == v)
                .collect();
            if on_arc.is_empty() {
                problems.push(format!("cycle {id} lacks an edge {u}->{v}"));
            }
            for e in on_arc {
                let exists = graph.out_edges(u).iter().any(|&eid| graph.edge(eid) == e);
                if !exists {
                    problems.push(format!(
                        "cycle {id} edge {u}->{v} is not in the input graph"
                    ));
                }
                if !passes_time(e, config.filter.t0_years)
                    || !passes_amount(e, config.filter.amount_threshold)
                {
                    problems.push(format!("cycle {id} edge {u}->{v} fails a filter"));
                }
            }
        }
        let arcs: HashSet<(AccountId, AccountId)> = cycle.arcs().collect();
        if cycle.edges.iter().any(|e| !arcs.contains(&(e.src, e.dst))) {
            problems.push(format!("cycle {id} carries an edge off the cycle"));
        }
    }
    problems
}
