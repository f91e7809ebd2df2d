//! Detection report model and its JSON / CSV-bundle serialization.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::Amount;
use crate::ingest::IngestStats;
use crate::pipeline::PipelineConfig;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("malformed report {path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    /// A directory holding `cycles.csv`, `flagged_accounts.csv`,
    /// `funnel.csv`, `histogram.csv` and `meta.json`.
    CsvBundle,
}

/// Per-stage counts, in pipeline order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Funnel {
    pub nodes: u64,
    pub edges_input: u64,
    pub self_loops_dropped: u64,
    pub communities_total: u64,
    pub communities_kept: u64,
    pub edges_in_kept_communities: u64,
    pub edges_time_pass: u64,
    pub edges_amount_pass: u64,
    pub cycles_found: u64,
    pub accounts_flagged: u64,
}

impl Funnel {
    const NAMES: [&'static str; 10] = [
        "nodes",
        "edges_input",
        "self_loops_dropped",
        "communities_total",
        "communities_kept",
        "edges_in_kept_communities",
        "edges_time_pass",
        "edges_amount_pass",
        "cycles_found",
        "accounts_flagged",
    ];

    fn values(&self) -> [u64; 10] {
        [
            self.nodes,
            self.edges_input,
            self.self_loops_dropped,
            self.communities_total,
            self.communities_kept,
            self.edges_in_kept_communities,
            self.edges_time_pass,
            self.edges_amount_pass,
            self.cycles_found,
            self.accounts_flagged,
        ]
    }

    /// `(name, value)` in pipeline order.
    pub fn entries(&self) -> impl Iterator<Item = (&'static str, u64)> {
        Self::NAMES.into_iter().zip(self.values())
    }

    fn set(&mut self, name: &str, value: u64) -> bool {
        let slot = match name {
            "nodes" => &mut self.nodes,
            "edges_input" => &mut self.edges_input,
            "self_loops_dropped" => &mut self.self_loops_dropped,
            "communities_total" => &mut self.communities_total,
            "communities_kept" => &mut self.communities_kept,
            "edges_in_kept_communities" => &mut self.edges_in_kept_communities,
            "edges_time_pass" => &mut self.edges_time_pass,
            "edges_amount_pass" => &mut self.edges_amount_pass,
            "cycles_found" => &mut self.cycles_found,
            "accounts_flagged" => &mut self.accounts_flagged,
            _ => return false,
        };
        *slot = value;
        true
    }

    /// Edge and community counts never grow along the pipeline.
    pub fn is_monotone(&self) -> bool {
        self.communities_kept <= self.communities_total
            && self.communities_total <= self.nodes
            && self.edges_in_kept_communities <= self.edges_input
            && self.edges_time_pass <= self.edges_in_kept_communities
            && self.edges_amount_pass <= self.edges_time_pass
            && self.accounts_flagged <= self.nodes
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub communities: u64,
    pub nodes: u64,
    pub largest: u64,
}

/// Community sizes over all communities and over those kept for search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunitySizes {
    pub all: SizeSummary,
    pub kept: SizeSummary,
}

/// Where the analysed graph came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputInfo {
    /// SHA-256 of the input file; matches a generator's instance id.
    pub digest: String,
    pub aggregate: bool,
    pub ingest: IngestStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEdge {
    pub src: String,
    pub dst: String,
    pub tx_count: u32,
    pub amount: Amount,
    pub year_first: u16,
    pub year_last: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportCycle {
    pub cycle_id: u64,
    pub community_id: u32,
    pub length: usize,
    pub nodes: Vec<String>,
    pub edges: Vec<ReportEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub config: PipelineConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputInfo>,
    pub funnel: Funnel,
    #[serde(default)]
    pub community_sizes: CommunitySizes,
    /// Communities whose enumeration hit the per-community cap.
    #[serde(default)]
    pub truncated_communities: Vec<u32>,
    pub cycles: Vec<ReportCycle>,
    pub histogram: BTreeMap<usize, u64>,
    pub flagged_accounts: Vec<String>,
}

impl DetectionReport {
    pub fn empty(config: PipelineConfig) -> Self {
        DetectionReport {
            config,
            input: None,
            funnel: Funnel::default(),
            community_sizes: CommunitySizes::default(),
            truncated_communities: Vec::new(),
            cycles: Vec::new(),
            histogram: BTreeMap::new(),
            flagged_accounts: Vec::new(),
        }
    }

    pub fn instance_id(&self) -> Option<&str> {
        self.input.as_ref().map(|i| i.digest.as_str())
    }

    /// Checks the internal consistency every report must satisfy; returns
    /// a description of each violation.
    pub fn integrity_violations(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut union: Vec<&str> = self
            .cycles
            .iter()
            .flat_map(|c| c.nodes.iter().map(String::as_str))
            .collect();
        union.sort_unstable();
        union.dedup();
        if union.len() as u64 != self.funnel.accounts_flagged {
            problems.push(format!(
                "accounts_flagged {} but cycles touch {} accounts",
                self.funnel.accounts_flagged,
                union.len()
            ));
        }
        let listed: Vec<&str> = self.flagged_accounts.iter().map(String::as_str).collect();
        if listed != union {
            problems
                .push("flagged_accounts differs from the sorted union of cycle nodes".to_string());
        }
        let hist_total: u64 = self.histogram.values().sum();
        if hist_total != self.funnel.cycles_found
            || self.cycles.len() as u64 != self.funnel.cycles_found
        {
            problems.push(format!(
                "histogram sums to {hist_total}, cycles_found is {}, {} cycles listed",
                self.funnel.cycles_found,
                self.cycles.len()
            ));
        }
        if !self.funnel.is_monotone() {
            problems.push(format!("funnel is not monotone: {:?}", self.funnel));
        }
        for c in &self.cycles {
            if c.length != c.nodes.len() {
                problems.push(format!(
                    "cycle {} length {} != {} nodes",
                    c.cycle_id,
                    c.length,
                    c.nodes.len()
                ));
            }
        }
        problems
    }
}

pub fn write_report(
    report: &DetectionReport,
    path: &Path,
    format: ReportFormat,
) -> Result<(), ReportError> {
    match format {
        ReportFormat::Json => {
            let werr = |source| ReportError::Write {
                path: path.to_path_buf(),
                source,
            };
            let file = File::create(path).map_err(werr)?;
            let mut out = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut out, report)
                .map_err(|e| werr(io::Error::other(e)))?;
            out.write_all(b"\n").map_err(werr)?;
            out.flush().map_err(werr)
        }
        ReportFormat::CsvBundle => write_bundle(report, path),
    }
}

pub fn read_report(path: &Path, format: ReportFormat) -> Result<DetectionReport, ReportError> {
    match format {
        ReportFormat::Json => {
            let file = File::open(path).map_err(|source| ReportError::Read {
                path: path.to_path_buf(),
                source,
            })?;
            serde_json::from_reader(BufReader::new(file)).map_err(|e| ReportError::Malformed {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        }
        ReportFormat::CsvBundle => read_bundle(path),
    }
}

#[derive(Serialize, Deserialize)]
struct BundleMeta {
    config: PipelineConfig,
    #[serde(default)]
    input: Option<InputInfo>,
    #[serde(default)]
    community_sizes: CommunitySizes,
    #[serde(default)]
    truncated_communities: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct CycleRow {
    cycle_id: u64,
    community_id: u32,
    length: usize,
    position: usize,
    src: String,
    dst: String,
    tx_count: u32,
    amount: Amount,
    year_first: u16,
    year_last: u16,
}

fn write_bundle(report: &DetectionReport, dir: &Path) -> Result<(), ReportError> {
    let werr = |path: &Path| {
        let path = path.to_path_buf();
        move |e: io::Error| ReportError::Write { path, source: e }
    };
    fs::create_dir_all(dir).map_err(werr(dir))?;
    let csv_err = |path: &Path| {
        let path = path.to_path_buf();
        move |e: csv::Error| ReportError::Write {
            path,
            source: io::Error::other(e),
        }
    };

    let path = dir.join("cycles.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    for c in &report.cycles {
        for (position, e) in c.edges.iter().enumerate() {
            w.serialize(CycleRow {
                cycle_id: c.cycle_id,
                community_id: c.community_id,
                length: c.length,
                position,
                src: e.src.clone(),
                dst: e.dst.clone(),
                tx_count: e.tx_count,
                amount: e.amount,
                year_first: e.year_first,
                year_last: e.year_last,
            })
            .map_err(csv_err(&path))?;
        }
    }
    if report.cycles.is_empty() {
        w.write_record([
            "cycle_id",
            "community_id",
            "length",
            "position",
            "src",
            "dst",
            "tx_count",
            "amount",
            "year_first",
            "year_last",
        ])
        .map_err(csv_err(&path))?;
    }
    w.flush().map_err(werr(&path))?;

    let path = dir.join("flagged_accounts.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["account"]).map_err(csv_err(&path))?;
    for a in &report.flagged_accounts {
        w.write_record([a]).map_err(csv_err(&path))?;
    }
    w.flush().map_err(werr(&path))?;

    let path = dir.join("funnel.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["counter", "value"])
        .map_err(csv_err(&path))?;
    for (name, value) in Funnel::NAMES.iter().zip(report.funnel.values()) {
        w.write_record([*name, &value.to_string()])
            .map_err(csv_err(&path))?;
    }
    w.flush().map_err(werr(&path))?;

    let path = dir.join("histogram.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["length", "count"])
        .map_err(csv_err(&path))?;
    for (len, count) in &report.histogram {
        w.write_record([len.to_string(), count.to_string()])
            .map_err(csv_err(&path))?;
    }
    w.flush().map_err(werr(&path))?;

    let path = dir.join("meta.json");
    let meta = BundleMeta {
        config: report.config.clone(),
        input: report.input.clone(),
        community_sizes: report.community_sizes,
        truncated_communities: report.truncated_communities.clone(),
    };
    let bytes = serde_json::to_vec_pretty(&meta).map_err(|e| werr(&path)(io::Error::other(e)))?;
    fs::write(&path, bytes).map_err(werr(&path))
}

fn read_bundle(dir: &Path) -> Result<DetectionReport, ReportError> {
    let malformed = |path: &Path, message: String| ReportError::Malformed {
        path: path.to_path_buf(),
        message,
    };
    let open = |name: &str| -> Result<(PathBuf, csv::Reader<File>), ReportError> {
        let path = dir.join(name);
        let reader = csv::Reader::from_path(&path).map_err(|e| ReportError::Read {
            path: path.clone(),
            source: io::Error::other(e),
        })?;
        Ok((path, reader))
    };

    let meta_path = dir.join("meta.json");
    let meta_bytes = fs::read(&meta_path).map_err(|source| ReportError::Read {
        path: meta_path.clone(),
        source,
    })?;
    let meta: BundleMeta =
        serde_json::from_slice(&meta_bytes).map_err(|e| malformed(&meta_path, e.to_string()))?;

    let (path, mut r) = open("cycles.csv")?;
    let mut cycles: Vec<ReportCycle> = Vec::new();
    for row in r.deserialize::<CycleRow>() {
        let row = row.map_err(|e| malformed(&path, e.to_string()))?;
        if cycles.last().is_none_or(|c| c.cycle_id != row.cycle_id) {
            cycles.push(ReportCycle {
                cycle_id: row.cycle_id,
                community_id: row.community_id,
                length: row.length,
                nodes: Vec::new(),
                edges: Vec::new(),
            });
        }
        let cycle = cycles.last_mut().expect("pushed");
        if cycle.nodes.last() != Some(&row.src) {
            cycle.nodes.push(row.src.clone());
        }
        cycle.edges.push(ReportEdge {
            src: row.src,
            dst: row.dst,
            tx_count: row.tx_count,
            amount: row.amount,
            year_first: row.year_first,
            year_last: row.year_last,
        });
    }

    let (path, mut r) = open("flagged_accounts.csv")?;
    let mut flagged_accounts = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| malformed(&path, e.to_string()))?;
        flagged_accounts.push(row.get(0).unwrap_or_default().to_string());
    }

    let (path, mut r) = open("funnel.csv")?;
    let mut funnel = Funnel::default();
    for row in r.deserialize::<(String, u64)>() {
        let (name, value) = row.map_err(|e| malformed(&path, e.to_string()))?;
        if !funnel.set(&name, value) {
            return Err(malformed(&path, format!("unknown counter {name:?}")));
        }
    }

    let (path, mut r) = open("histogram.csv")?;
    let mut histogram = BTreeMap::new();
    for row in r.deserialize::<(usize, u64)>() {
        let (len, count) = row.map_err(|e| malformed(&path, e.to_string()))?;
        histogram.insert(len, count);
    }

    Ok(DetectionReport {
        config: meta.config,
        input: meta.input,
        funnel,
        community_sizes: meta.community_sizes,
        truncated_communities: meta.truncated_communities,
        cycles,
        histogram,
        flagged_accounts,
    })
}
