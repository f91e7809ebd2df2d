//! Synthetic transaction networks with planted laundering cycles.
//!
//! Background edges come from a block-structured configuration model:
//! every node draws a total degree from a capped discrete power law, a
//! fixed fraction of its stubs is paired inside its block and the rest
//! across the whole graph. Self-loops and repeated pairs are re-paired,
//! and the edge count is then topped up to the exact target. Planted cycles
//! sit inside a single block on distinct nodes, with same-year edges below
//! the reporting threshold.

mod score;

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Geometric, LogNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::amount::Amount;
use crate::filters::DEFAULT_AMOUNT_THRESHOLD;
use crate::graph::EdgeAttrs;
use crate::ingest::EdgeCsvWriter;
use crate::report::ReportEdge;

pub use score::{score_detection, CommunityMembership, DetectionScore, ScoreError};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("infeasible config: {0}")]
    Infeasible(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// `count` planted cycles of `length` nodes each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub length: usize,
    pub count: usize,
}

/// Background amount mixture: a log-normal body truncated below the
/// threshold, plus a Pareto tail starting at the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmountDistribution {
    /// Mean of `ln(amount)` for the body, amount in major units.
    pub log_mean: f64,
    pub log_sd: f64,
    /// Share of edges at or above the threshold.
    pub above_threshold_fraction: f64,
    pub tail_exponent: f64,
    pub threshold: Amount,
}

impl Default for AmountDistribution {
    fn default() -> Self {
        AmountDistribution {
            log_mean: 7.0,
            log_sd: 1.2,
            above_threshold_fraction: 0.12,
            tail_exponent: 1.5,
            threshold: DEFAULT_AMOUNT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub nodes: usize,
    /// Exact number of distinct directed account pairs written.
    pub target_edges: usize,
    pub block_count: usize,
    pub intra_block_edge_fraction: f64,
    pub degree_exponent: f64,
    /// Largest target degree. `None` picks the most a node can place inside
    /// its own block at the configured intra-block share.
    pub max_degree: Option<u64>,
    pub year_range: (u16, u16),
    /// Share of background edges pointing down a hidden ranking of the
    /// accounts, which keeps background cycles rare. The rest are random.
    pub flow_order_fraction: f64,
    /// Share of background edges whose first and last year coincide.
    pub same_year_fraction: f64,
    pub amount_distribution: AmountDistribution,
    /// Extra self-loop records mixed into the file; cleaning drops them.
    pub self_loop_records: usize,
    pub planted_cycles: Vec<PlantSpec>,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            nodes: 10_000,
            target_edges: 25_000,
            block_count: 250,
            intra_block_edge_fraction: 0.9,
            degree_exponent: 2.5,
            max_degree: None,
            year_range: (2010, 2020),
            flow_order_fraction: 0.95,
            same_year_fraction: 0.46,
            amount_distribution: AmountDistribution::default(),
            self_loop_records: 0,
            planted_cycles: Vec::new(),
            seed: 0,
        }
    }
}

impl GenConfig {
    /// Node and edge counts of the private bank network, with 183 planted
    /// cycles weighted towards short lengths. Blocks are nearly closed and
    /// flows nearly one-way, so the funnel lands near the published one:
    /// about 20k communities, 1.6M edges after filtering and a few hundred
    /// cycles.
    pub fn bank_scale(seed: u64) -> Self {
        GenConfig {
            nodes: 1_624_030,
            target_edges: 3_823_167,
            block_count: 40_000,
            intra_block_edge_fraction: 0.998,
            flow_order_fraction: 0.9998,
            amount_distribution: AmountDistribution {
                above_threshold_fraction: 0.04,
                ..Default::default()
            },
            self_loop_records: 4_127_043 - 3_823_167,
            planted_cycles: vec![
                PlantSpec {
                    length: 3,
                    count: 80,
                },
                PlantSpec {
                    length: 4,
                    count: 50,
                },
                PlantSpec {
                    length: 5,
                    count: 25,
                },
                PlantSpec {
                    length: 6,
                    count: 18,
                },
                PlantSpec {
                    length: 7,
                    count: 10,
                },
            ],
            seed,
            ..Default::default()
        }
    }

    pub fn planted_edge_count(&self) -> usize {
        self.planted_cycles.iter().map(|p| p.length * p.count).sum()
    }

    // negated comparisons so NaN fails too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn validate(&self) -> Result<(), GenError> {
        let fail = |m: String| Err(GenError::Infeasible(m));
        if self.block_count == 0 || self.nodes < self.block_count {
            return fail(format!(
                "need 1 <= block_count <= nodes, got {} blocks for {} nodes",
                self.block_count, self.nodes
            ));
        }
        if self.nodes < 2 {
            return fail("need at least 2 nodes".into());
        }
        if !(self.intra_block_edge_fraction > 0.0 && self.intra_block_edge_fraction <= 1.0) {
            return fail("intra_block_edge_fraction must be in (0, 1]".into());
        }
        if !(self.degree_exponent > 2.0) {
            return fail("degree_exponent must exceed 2".into());
        }
        if !(0.0..=1.0).contains(&self.flow_order_fraction) {
            return fail("flow_order_fraction must be in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.same_year_fraction) {
            return fail("same_year_fraction must be in [0, 1]".into());
        }
        let a = &self.amount_distribution;
        if !(0.0..1.0).contains(&a.above_threshold_fraction)
            || !(a.log_sd > 0.0)
            || !(a.tail_exponent > 0.0)
        {
            return fail("invalid amount distribution".into());
        }
        if a.threshold <= Amount::from_minor(1) {
            return fail("amount threshold too small".into());
        }
        if self.year_range.0 > self.year_range.1 {
            return fail("year_range is reversed".into());
        }
        if self.same_year_fraction < 1.0 && self.year_range.0 == self.year_range.1 {
            return fail("multi-year edges need a year range spanning more than one year".into());
        }
        for p in &self.planted_cycles {
            if !(3..=10).contains(&p.length) {
                return fail(format!("planted cycle length {} outside 3..=10", p.length));
            }
        }
        let planted_nodes: usize = self.planted_cycles.iter().map(|p| p.length * p.count).sum();
        if planted_nodes > self.nodes {
            return fail(format!(
                "{planted_nodes} planted nodes exceed {} nodes",
                self.nodes
            ));
        }
        let background = self.target_edges.checked_sub(self.planted_edge_count());
        match background {
            None => return fail("planted edges exceed target_edges".into()),
            Some(b) if 2 * b < self.nodes => {
                return fail(format!(
                    "{b} background edges cannot touch all {} nodes",
                    self.nodes
                ))
            }
            Some(b) if b as u128 > (self.nodes as u128) * (self.nodes as u128 - 1) / 2 => {
                return fail("target_edges too dense for the node count".into())
            }
            _ => {}
        }
        if self.max_degree == Some(0)
            || self.background_mean_degree() >= 0.9 * self.degree_cap() as f64
        {
            return fail(format!(
                "mean degree {:.2} does not fit under the degree cap {}",
                self.background_mean_degree(),
                self.degree_cap()
            ));
        }
        if self.nodes > u32::MAX as usize {
            return fail("too many nodes".into());
        }
        Ok(())
    }

    /// The law every node's target total degree is drawn from.
    pub fn degree_law(&self) -> DegreeLaw {
        let mean = self.background_mean_degree();
        DegreeLaw::fit(self.degree_exponent - 1.0, self.degree_cap(), mean)
    }

    pub fn degree_cap(&self) -> u64 {
        let limit = (self.nodes - 1) as u64;
        match self.max_degree {
            Some(cap) => cap.min(limit),
            None => {
                let smallest_block = (self.nodes / self.block_count) as u64;
                let fits = smallest_block.saturating_sub(1) as f64
                    / (2.0 * self.intra_block_edge_fraction);
                (fits.floor() as u64).clamp(2, limit)
            }
        }
    }

    fn background_mean_degree(&self) -> f64 {
        2.0 * (self.target_edges - self.planted_edge_count()) as f64 / self.nodes as f64
    }

    pub fn block_of(&self, node: usize) -> usize {
        block_of(self.nodes, self.block_count, node)
    }
}

/// `D = min(cap, floor(scale * U^(-1/shape)))` with `U` uniform on (0, 1],
/// so `P(D >= k) = min(1, (scale / k)^shape)` for `k <= cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeLaw {
    pub scale: f64,
    pub shape: f64,
    pub cap: u64,
}

impl DegreeLaw {
    fn tail(&self, k: u64) -> f64 {
        if k > self.cap {
            0.0
        } else {
            (self.scale / k as f64).powf(self.shape).min(1.0)
        }
    }

    pub fn mean(&self) -> f64 {
        (1..=self.cap).map(|k| self.tail(k)).sum()
    }

    /// Smallest scale >= 1 whose mean reaches `mean`.
    fn fit(shape: f64, cap: u64, mean: f64) -> Self {
        let law = |scale| DegreeLaw { scale, shape, cap };
        let (mut lo, mut hi) = (1.0f64, 1.0f64);
        while law(hi).mean() < mean && hi < cap as f64 {
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if law(mid).mean() < mean {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        law(hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = 1.0 - rng.random::<f64>();
        let d = (self.scale * u.powf(-1.0 / self.shape)).floor();
        if d >= self.cap as f64 {
            self.cap
        } else {
            (d as u64).max(1)
        }
    }
}

/// Nodes split into contiguous blocks of near-equal size.
fn block_of(nodes: usize, blocks: usize, node: usize) -> usize {
    let base = nodes / blocks;
    let extra = nodes % blocks;
    let big = extra * (base + 1);
    if node < big {
        node / (base + 1)
    } else {
        extra + (node - big) / base
    }
}

fn block_range(nodes: usize, blocks: usize, block: usize) -> std::ops::Range<usize> {
    let base = nodes / blocks;
    let extra = nodes % blocks;
    let start = block * base + block.min(extra);
    let len = base + usize::from(block < extra);
    start..start + len
}

pub fn node_label(node: usize) -> String {
    format!("A{node}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCycle {
    /// Labels in cycle order.
    pub nodes: Vec<String>,
    pub block: usize,
    pub edges: Vec<ReportEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// SHA-256 of the generated edge file.
    pub instance_id: String,
    pub seed: u64,
    pub config: GenConfig,
    pub planted: Vec<PlantedCycle>,
}

impl GroundTruth {
    pub fn write(&self, path: &Path) -> Result<(), io::Error> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, self).map_err(io::Error::other)?;
        out.write_all(b"\n")?;
        out.flush()
    }

    pub fn read(path: &Path) -> Result<Self, io::Error> {
        let bytes = std::fs::read(path)?;
        serde_json::from_slice(&bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

/// A generated network held in memory.
#[derive(Debug, Clone)]
pub struct Instance {
    pub config: GenConfig,
    /// Records in file order; self-loop records included.
    pub records: Vec<(u32, u32, EdgeAttrs)>,
    planted: Vec<(Vec<u32>, usize, Vec<EdgeAttrs>)>,
}

impl Instance {
    pub fn distinct_edge_count(&self) -> usize {
        self.records.iter().filter(|(s, d, _)| s != d).count()
    }

    /// Node ids of each planted cycle, in cycle order.
    pub fn planted_nodes(&self) -> impl Iterator<Item = &[u32]> {
        self.planted.iter().map(|(nodes, _, _)| nodes.as_slice())
    }

    /// Writes the CSV and returns its SHA-256 as lowercase hex.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<String, io::Error> {
        let hashing = HashingWriter {
            inner: writer,
            hasher: Sha256::new(),
        };
        let mut out = EdgeCsvWriter::new(hashing).map_err(io::Error::other)?;
        for (src, dst, attrs) in &self.records {
            out.write_edge(
                &node_label(*src as usize),
                &node_label(*dst as usize),
                attrs,
            )
            .map_err(io::Error::other)?;
        }
        let mut hashing = out.into_inner()?;
        hashing.flush()?;
        Ok(hex::encode(hashing.hasher.finalize()))
    }

    pub fn ground_truth(&self, instance_id: String) -> GroundTruth {
        let planted = self
            .planted
            .iter()
            .map(|(nodes, block, attrs)| {
                let n = nodes.len();
                PlantedCycle {
                    nodes: nodes.iter().map(|&v| node_label(v as usize)).collect(),
                    block: *block,
                    edges: (0..n)
                        .map(|i| ReportEdge {
                            src: node_label(nodes[i] as usize),
                            dst: node_label(nodes[(i + 1) % n] as usize),
                            tx_count: attrs[i].tx_count,
                            amount: attrs[i].amount,
                            year_first: attrs[i].year_first,
                            year_last: attrs[i].year_last,
                        })
                        .collect(),
                }
            })
            .collect();
        GroundTruth {
            instance_id,
            seed: self.config.seed,
            config: self.config.clone(),
            planted,
        }
    }

    /// Writes the edge CSV and the ground-truth JSON.
    pub fn write_files(
        &self,
        csv_path: &Path,
        truth_path: &Path,
    ) -> Result<GroundTruth, io::Error> {
        let file = BufWriter::with_capacity(1 << 20, File::create(csv_path)?);
        let digest = self.write_csv(file)?;
        let truth = self.ground_truth(digest);
        truth.write(truth_path)?;
        Ok(truth)
    }
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

struct EdgeSet {
    seen: HashSet<u64>,
    edges: Vec<(u32, u32)>,
    degree: Vec<u32>,
    /// Position of each node in the flow order.
    rank: Vec<u32>,
    ordered: f64,
}

impl EdgeSet {
    /// Adds a background edge between `a` and `b`. Most point down the
    /// flow order; the rest get a random direction.
    fn link<R: Rng + ?Sized>(&mut self, rng: &mut R, a: u32, b: u32) -> bool {
        let (a, b) = self.orient(rng, a, b);
        self.try_add(a, b)
    }

    fn orient<R: Rng + ?Sized>(&self, rng: &mut R, a: u32, b: u32) -> (u32, u32) {
        let downhill = self.rank[a as usize] < self.rank[b as usize];
        let forward = if rng.random_bool(self.ordered) {
            downhill
        } else {
            rng.random_bool(0.5)
        };
        if forward {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Splits edge `i` = (x, y) into u-x and v-y. Degrees of x and y stay put,
    /// u and v gain one each.
    fn rewire<R: Rng + ?Sized>(&mut self, rng: &mut R, i: usize, u: u32, v: u32) -> bool {
        let (x, y) = self.edges[i];
        let (x, y) = if rng.random_bool(0.5) { (x, y) } else { (y, x) };
        let p = self.orient(rng, u, x);
        let q = self.orient(rng, v, y);
        let key = |(a, b): (u32, u32)| (u64::from(a) << 32) | u64::from(b);
        if u == x || v == y || p == q || self.seen.contains(&key(p)) || self.seen.contains(&key(q))
        {
            return false;
        }
        self.seen.remove(&key(self.edges[i]));
        self.seen.insert(key(p));
        self.seen.insert(key(q));
        self.edges[i] = p;
        self.edges.push(q);
        self.degree[u as usize] += 1;
        self.degree[v as usize] += 1;
        true
    }

    fn try_add(&mut self, a: u32, b: u32) -> bool {
        if a == b || !self.seen.insert((u64::from(a) << 32) | u64::from(b)) {
            return false;
        }
        self.edges.push((a, b));
        self.degree[a as usize] += 1;
        self.degree[b as usize] += 1;
        true
    }
}

/// Generates an instance. Deterministic for a fixed config.
pub fn generate(config: &GenConfig) -> Result<Instance, GenError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.nodes;
    let blocks = config.block_count;
    let years = config.year_range;

    let mut set = EdgeSet {
        seen: HashSet::with_capacity(config.target_edges),
        edges: Vec::with_capacity(config.target_edges),
        degree: vec![0; n],
        rank: Vec::new(),
        ordered: config.flow_order_fraction,
    };
    let mut rank: Vec<u32> = (0..n as u32).collect();
    rank.shuffle(&mut rng);
    set.rank = rank;

    // planted cycles: distinct nodes, one block each
    let mut used = vec![false; n];
    let mut planted = Vec::new();
    for spec in &config.planted_cycles {
        for _ in 0..spec.count {
            let (nodes, block) = pick_cycle_nodes(&mut rng, config, &mut used, spec.length)?;
            let base = rng.random_range(1_000.0..9_500.0f64);
            let year = rng.random_range(years.0..=years.1);
            let mut attrs = Vec::with_capacity(nodes.len());
            for i in 0..nodes.len() {
                let (a, b) = (nodes[i], nodes[(i + 1) % nodes.len()]);
                let amount = Amount::from_major_f64(base * (1.0 - rng.random_range(0.0..0.03)))
                    .expect("in range");
                attrs.push(EdgeAttrs::new(rng.random_range(1..=3), amount, year, year));
                let added = set.try_add(a, b);
                debug_assert!(added, "planted nodes are distinct and unused");
            }
            planted.push((nodes, block, attrs));
        }
    }
    let planted_edges = set.edges.len();
    let target = config.target_edges;

    // target degrees, adjusted so stubs pair into exactly the background count
    let law = config.degree_law();
    let mut degree: Vec<u64> = (0..n).map(|_| law.sample(&mut rng)).collect();
    let wanted = 2 * (target - planted_edges) as u64;
    let mut total: u64 = degree.iter().sum();
    while total < wanted {
        let v = rng.random_range(0..n);
        if degree[v] < law.cap {
            degree[v] += 1;
            total += 1;
        }
    }
    while total > wanted {
        let v = rng.random_range(0..n);
        if degree[v] > 1 {
            degree[v] -= 1;
            total -= 1;
        }
    }

    // split stubs into intra-block and global pools
    let mut global: Vec<u32> = Vec::new();
    let mut block_stubs: Vec<Vec<u32>> = vec![Vec::new(); blocks];
    let frac = config.intra_block_edge_fraction;
    for (v, &d) in degree.iter().enumerate() {
        let intra = if frac >= 1.0 {
            d
        } else {
            Binomial::new(d, frac).expect("valid").sample(&mut rng)
        };
        let b = block_of(n, blocks, v);
        let block_len = block_range(n, blocks, b).len() as u64;
        let intra = intra.min(2 * block_len.saturating_sub(1));
        block_stubs[b].extend(std::iter::repeat_n(v as u32, intra as usize));
        global.extend(std::iter::repeat_n(v as u32, (d - intra) as usize));
    }
    for stubs in block_stubs.iter_mut() {
        let first = set.edges.len();
        let leftover = pair_stubs(&mut rng, &mut set, std::mem::take(stubs), 3);
        // stubs left over sit on the block's busiest nodes; splice them into
        // the block's own edges so degrees and the intra-block share hold
        global.extend(splice_stubs(&mut rng, &mut set, leftover, first));
    }
    drop(block_stubs);
    let first = set.edges.len();
    let leftover = pair_stubs(&mut rng, &mut set, global, 5);
    splice_stubs(&mut rng, &mut set, leftover, first);

    // every node gets at least one edge
    for v in 0..n {
        if set.degree[v] == 0 {
            let range = block_range(n, blocks, block_of(n, blocks, v));
            loop {
                let w = if range.len() > 1 {
                    rng.random_range(range.clone())
                } else {
                    rng.random_range(0..n)
                };
                if set.link(&mut rng, v as u32, w as u32) {
                    break;
                }
            }
        }
    }
    // remove surplus edges that no node depends on, never planted ones
    while set.edges.len() > target {
        let i = rng.random_range(planted_edges..set.edges.len());
        let (a, b) = set.edges[i];
        if set.degree[a as usize] > 1 && set.degree[b as usize] > 1 {
            set.edges.swap_remove(i);
            set.seen.remove(&((u64::from(a) << 32) | u64::from(b)));
            set.degree[a as usize] -= 1;
            set.degree[b as usize] -= 1;
        }
    }
    // top up to the exact target, following the degree weights
    let mut stubs_by_weight: Vec<u32> = Vec::new();
    if set.edges.len() < target {
        stubs_by_weight = degree
            .iter()
            .enumerate()
            .flat_map(|(v, &d)| std::iter::repeat_n(v as u32, d as usize))
            .collect();
    }
    while set.edges.len() < target {
        let a = stubs_by_weight[rng.random_range(0..stubs_by_weight.len())];
        let b = if rng.random_bool(frac) {
            rng.random_range(block_range(n, blocks, block_of(n, blocks, a as usize))) as u32
        } else {
            stubs_by_weight[rng.random_range(0..stubs_by_weight.len())]
        };
        set.link(&mut rng, a, b);
    }
    drop(stubs_by_weight);
    drop(set.seen);

    // attributes
    let sampler = AttrSampler::new(config);
    let mut records: Vec<(u32, u32, EdgeAttrs)> =
        Vec::with_capacity(target + config.self_loop_records);
    let mut planted_attrs = planted
        .iter()
        .flat_map(|(_, _, attrs): &(Vec<u32>, usize, Vec<EdgeAttrs>)| attrs.iter().copied());
    for (i, &(a, b)) in set.edges.iter().enumerate() {
        let attrs = if i < planted_edges {
            planted_attrs.next().expect("planted attrs")
        } else {
            sampler.sample(&mut rng)
        };
        records.push((a, b, attrs));
    }
    for _ in 0..config.self_loop_records {
        let v = rng.random_range(0..n) as u32;
        records.push((v, v, sampler.sample(&mut rng)));
    }
    records.shuffle(&mut rng);
    Ok(Instance {
        config: config.clone(),
        records,
        planted,
    })
}

fn pick_cycle_nodes(
    rng: &mut ChaCha8Rng,
    config: &GenConfig,
    used: &mut [bool],
    length: usize,
) -> Result<(Vec<u32>, usize), GenError> {
    let blocks = config.block_count;
    let free = |b: usize, used: &[bool]| {
        block_range(config.nodes, blocks, b)
            .filter(|&v| !used[v])
            .count()
    };
    let mut block = rng.random_range(0..blocks);
    let mut tries = 0;
    while free(block, used) < length {
        tries += 1;
        if tries > 64 {
            // fall back to a scan so dense plantings still succeed when possible
            block = (0..blocks)
                .find(|&b| free(b, used) >= length)
                .ok_or_else(|| {
                    GenError::Infeasible(format!(
                        "no block has {length} free nodes for another planted cycle"
                    ))
                })?;
            break;
        }
        block = rng.random_range(0..blocks);
    }
    let mut candidates: Vec<u32> = block_range(config.nodes, blocks, block)
        .filter(|&v| !used[v])
        .map(|v| v as u32)
        .collect();
    candidates.shuffle(rng);
    candidates.truncate(length);
    for &v in &candidates {
        used[v as usize] = true;
    }
    Ok((candidates, block))
}

/// Places leftover stubs two at a time by splitting edges at index `first`
/// or later. Returns the stubs that found no edge to split.
fn splice_stubs(
    rng: &mut ChaCha8Rng,
    set: &mut EdgeSet,
    mut stubs: Vec<u32>,
    first: usize,
) -> Vec<u32> {
    stubs.shuffle(rng);
    let mut unplaced = Vec::new();
    let mut pairs = stubs.chunks_exact(2);
    for pair in &mut pairs {
        let placed = set.edges.len() > first
            && (0..16).any(|_| {
                let i = rng.random_range(first..set.edges.len());
                set.rewire(rng, i, pair[0], pair[1])
            });
        if !placed {
            unplaced.extend_from_slice(pair);
        }
    }
    unplaced.extend_from_slice(pairs.remainder());
    unplaced
}

/// Shuffles and pairs stubs, retrying rejected pairs for a few rounds.
/// Returns stubs that could not be placed.
fn pair_stubs(
    rng: &mut ChaCha8Rng,
    set: &mut EdgeSet,
    mut stubs: Vec<u32>,
    rounds: usize,
) -> Vec<u32> {
    for _ in 0..rounds {
        if stubs.len() < 2 {
            break;
        }
        stubs.shuffle(rng);
        let mut rejected = Vec::new();
        let mut chunks = stubs.chunks_exact(2);
        for pair in &mut chunks {
            if !set.link(rng, pair[0], pair[1]) {
                rejected.extend_from_slice(pair);
            }
        }
        rejected.extend_from_slice(chunks.remainder());
        if rejected.len() == stubs.len() {
            stubs = rejected;
            break;
        }
        stubs = rejected;
    }
    stubs
}

struct AttrSampler {
    body: LogNormal<f64>,
    above: f64,
    tail_exponent: f64,
    threshold: f64,
    same_year: f64,
    years: (u16, u16),
    tx_extra: Geometric,
}

impl AttrSampler {
    fn new(config: &GenConfig) -> Self {
        let a = &config.amount_distribution;
        AttrSampler {
            body: LogNormal::new(a.log_mean, a.log_sd).expect("validated"),
            above: a.above_threshold_fraction,
            tail_exponent: a.tail_exponent,
            threshold: a.threshold.to_major_f64(),
            same_year: config.same_year_fraction,
            years: config.year_range,
            tx_extra: Geometric::new(0.35).expect("valid"),
        }
    }

    fn amount<R: Rng + ?Sized>(&self, rng: &mut R) -> Amount {
        let threshold = Amount::from_major_f64(self.threshold).expect("finite");
        if rng.random_bool(self.above) {
            let u: f64 = 1.0 - rng.random::<f64>();
            let x = self.threshold * u.powf(-1.0 / self.tail_exponent);
            let amount = Amount::from_major_f64(x.min(1e12)).expect("bounded");
            return amount.max(threshold);
        }
        loop {
            let x = self.body.sample(rng);
            if let Some(amount) = Amount::from_major_f64(x) {
                if amount < threshold {
                    return amount;
                }
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> EdgeAttrs {
        let amount = self.amount(rng);
        let tx_count = 1 + self.tx_extra.sample(rng).min(999) as u32;
        let (first, last) = self.years;
        let (y1, y2) = if rng.random_bool(self.same_year) {
            let y = rng.random_range(first..=last);
            (y, y)
        } else {
            let y1 = rng.random_range(first..last);
            (y1, rng.random_range(y1 + 1..=last))
        };
        EdgeAttrs::new(tx_count, amount, y1, y2)
    }
}
