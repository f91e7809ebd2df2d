//! Edge-file ingestion: CSV parsing, validation and cleaning.
//!
//! The input format is a UTF-8 CSV with the header
//! `src,dst,tx_count,amount,year_first,year_last`, one directed account pair
//! per line. Parsing keeps every line it can decode; cleaning removes
//! self-loops and invalid records and optionally merges records that share
//! an account pair.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::amount::Amount;
use crate::graph::{AccountId, EdgeAttrs, GraphError, TransactionEdge, TransactionGraph};

pub const EDGE_HEADER: [&str; 6] = [
    "src",
    "dst",
    "tx_count",
    "amount",
    "year_first",
    "year_last",
];

/// Default number of malformed lines tolerated before parsing aborts.
pub const DEFAULT_ERROR_CAP: usize = 1_000;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header {
        found: Vec<String>,
        expected: Vec<String>,
    },
    #[error("more than {cap} malformed lines; first at line {first_line}: {first_message}")]
    TooManyErrors {
        cap: usize,
        first_line: u64,
        first_message: String,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One parsed line, not yet validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub src_label: String,
    pub dst_label: String,
    pub tx_count: i64,
    pub amount: Amount,
    pub year_first: i32,
    pub year_last: i32,
}

impl RawRecord {
    /// Why this record would be rejected by [`clean_records`], if at all.
    /// Self-loops are not reported here; they are counted separately.
    pub fn invalid_reason(&self) -> Option<&'static str> {
        if self.tx_count < 1 {
            Some("tx_count must be at least 1")
        } else if self.tx_count > i64::from(u32::MAX) {
            Some("tx_count out of range")
        } else if self.amount.is_negative() {
            Some("amount must be non-negative")
        } else if !(0..=i32::from(u16::MAX)).contains(&self.year_first)
            || !(0..=i32::from(u16::MAX)).contains(&self.year_last)
        {
            Some("year out of range")
        } else if self.year_first > self.year_last {
            Some("year_first is after year_last")
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// The line could not be decoded; no record was produced.
    Malformed,
    /// The line decoded but its values are invalid; cleaning will drop it.
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: u64,
    pub kind: DiagnosticKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub error_cap: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            error_cap: DEFAULT_ERROR_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParsedEdges {
    pub records: Vec<RawRecord>,
    pub diagnostics: Vec<Diagnostic>,
    /// Lowercase hex SHA-256 of the raw input bytes.
    pub digest: String,
}

impl ParsedEdges {
    pub fn malformed_lines(&self) -> usize {
        self.diagnostics
            .iter()
            .filter(|d| d.kind == DiagnosticKind::Malformed)
            .count()
    }
}

pub fn parse_edge_file(path: &Path, options: ParseOptions) -> Result<ParsedEdges, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_reader(BufReader::with_capacity(1 << 20, file), options).map_err(|e| match e {
        IngestError::Csv(err) if err.is_io_error() => IngestError::Io {
            path: path.to_path_buf(),
            source: io::Error::other(err.to_string()),
        },
        other => other,
    })
}

pub fn parse_edge_reader<R: Read>(
    reader: R,
    options: ParseOptions,
) -> Result<ParsedEdges, IngestError> {
    let mut hashing = HashingReader {
        inner: reader,
        hasher: Sha256::new(),
    };
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut malformed = 0usize;
    {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(&mut hashing);
        let header = csv.headers()?.clone();
        if header.len() != EDGE_HEADER.len() || header.iter().zip(EDGE_HEADER).any(|(a, b)| a != b)
        {
            return Err(IngestError::Header {
                found: header.iter().map(str::to_string).collect(),
                expected: EDGE_HEADER.iter().map(|s| s.to_string()).collect(),
            });
        }
        let mut row = csv::StringRecord::new();
        loop {
            let line = csv.position().line() + 1;
            match csv.read_record(&mut row) {
                Ok(false) => break,
                Ok(true) => {}
                Err(err) if !err.is_io_error() => {
                    malformed += 1;
                    diagnostics.push(Diagnostic {
                        line,
                        kind: DiagnosticKind::Malformed,
                        message: err.to_string(),
                    });
                    check_cap(malformed, options.error_cap, &diagnostics)?;
                    continue;
                }
                Err(err) => return Err(err.into()),
            }
            let line = row.position().map_or(line, |p| p.line());
            match decode_row(&row) {
                Ok(record) => {
                    if let Some(reason) = record.invalid_reason() {
                        diagnostics.push(Diagnostic {
                            line,
                            kind: DiagnosticKind::Invalid,
                            message: reason.to_string(),
                        });
                    }
                    records.push(record);
                }
                Err(message) => {
                    malformed += 1;
                    diagnostics.push(Diagnostic {
                        line,
                        kind: DiagnosticKind::Malformed,
                        message,
                    });
                    check_cap(malformed, options.error_cap, &diagnostics)?;
                }
            }
        }
    }
    // drain anything the csv reader left unread so the digest covers the file
    io::copy(&mut hashing, &mut io::sink()).map_err(csv::Error::from)?;
    let digest = hex::encode(hashing.hasher.finalize());
    Ok(ParsedEdges {
        records,
        diagnostics,
        digest,
    })
}

fn check_cap(malformed: usize, cap: usize, diagnostics: &[Diagnostic]) -> Result<(), IngestError> {
    if malformed > cap {
        let first = diagnostics
            .iter()
            .find(|d| d.kind == DiagnosticKind::Malformed)
            .expect("counted");
        return Err(IngestError::TooManyErrors {
            cap,
            first_line: first.line,
            first_message: first.message.clone(),
        });
    }
    Ok(())
}

fn decode_row(row: &csv::StringRecord) -> Result<RawRecord, String> {
    if row.len() != EDGE_HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            EDGE_HEADER.len(),
            row.len()
        ));
    }
    let label = |i: usize| {
        let s = &row[i];
        if s.is_empty() {
            Err(format!("empty {}", EDGE_HEADER[i]))
        } else {
            Ok(s.to_string())
        }
    };
    let int = |i: usize| -> Result<i64, String> {
        row[i]
            .parse::<i64>()
            .map_err(|_| format!("{} is not an integer: {:?}", EDGE_HEADER[i], &row[i]))
    };
    let year = |i: usize| -> Result<i32, String> {
        row[i]
            .parse::<i32>()
            .map_err(|_| format!("{} is not a year: {:?}", EDGE_HEADER[i], &row[i]))
    };
    Ok(RawRecord {
        src_label: label(0)?,
        dst_label: label(1)?,
        tx_count: int(2)?,
        amount: row[3].parse::<Amount>().map_err(|e| e.to_string())?,
        year_first: year(4)?,
        year_last: year(5)?,
    })
}

struct HashingReader<R> {
    inner: R,
    hasher: Sha256,
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }
}

/// Counters describing what cleaning did to the parsed records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub records_read: u64,
    pub self_loops_dropped: u64,
    pub malformed_rejected: u64,
    pub records_aggregated: u64,
    pub final_edge_count: u64,
    pub final_node_count: u64,
}

impl IngestStats {
    /// `records_read` equals the sum of every way a record can be accounted for.
    pub fn is_balanced(&self) -> bool {
        self.records_read
            == self.final_edge_count
                + self.self_loops_dropped
                + self.malformed_rejected
                + self.records_aggregated
    }
}

/// Validated edges with dense node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanedEdges {
    /// Node labels in order of first appearance among surviving records.
    pub labels: Vec<String>,
    pub edges: Vec<TransactionEdge>,
    pub stats: IngestStats,
}

impl CleanedEdges {
    pub fn into_graph(self) -> Result<(TransactionGraph, IngestStats), GraphError> {
        let stats = self.stats;
        Ok((
            TransactionGraph::from_indexed(self.labels, self.edges)?,
            stats,
        ))
    }

    /// Converts back to raw records, e.g. to re-run cleaning.
    pub fn to_raw_records(&self) -> Vec<RawRecord> {
        self.edges
            .iter()
            .map(|e| RawRecord {
                src_label: self.labels[e.src.index()].clone(),
                dst_label: self.labels[e.dst.index()].clone(),
                tx_count: i64::from(e.tx_count),
                amount: e.amount,
                year_first: i32::from(e.year_first),
                year_last: i32::from(e.year_last),
            })
            .collect()
    }
}

/// Drops self-loops and invalid records; with `aggregate`, merges records
/// sharing `(src, dst)` by summing counts and amounts and widening the year
/// span. Aggregated output is sorted by `(src, dst)` node id; otherwise the
/// input order is kept.
pub fn clean_records(records: Vec<RawRecord>, aggregate: bool) -> CleanedEdges {
    let mut stats = IngestStats {
        records_read: records.len() as u64,
        ..Default::default()
    };
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut intern = |label: String, labels: &mut Vec<String>| -> AccountId {
        if let Some(&id) = index.get(&label) {
            return AccountId(id);
        }
        let id = labels.len() as u32;
        labels.push(label.clone());
        index.insert(label, id);
        AccountId(id)
    };
    let mut edges = Vec::with_capacity(records.len());
    for record in records {
        if record.src_label == record.dst_label {
            stats.self_loops_dropped += 1;
            continue;
        }
        if record.invalid_reason().is_some() {
            stats.malformed_rejected += 1;
            continue;
        }
        let attrs = EdgeAttrs::new(
            record.tx_count as u32,
            record.amount,
            record.year_first as u16,
            record.year_last as u16,
        );
        let src = intern(record.src_label, &mut labels);
        let dst = intern(record.dst_label, &mut labels);
        edges.push(TransactionEdge::new(src, dst, attrs));
    }
    if aggregate {
        let before = edges.len();
        edges = aggregate_pairs(edges);
        stats.records_aggregated = (before - edges.len()) as u64;
    }
    stats.final_edge_count = edges.len() as u64;
    stats.final_node_count = labels.len() as u64;
    CleanedEdges {
        labels,
        edges,
        stats,
    }
}

fn aggregate_pairs(mut edges: Vec<TransactionEdge>) -> Vec<TransactionEdge> {
    edges.sort_by_key(|e| (e.src, e.dst));
    let mut merged: Vec<TransactionEdge> = Vec::with_capacity(edges.len());
    for e in edges {
        match merged.last_mut() {
            Some(last) if last.src == e.src && last.dst == e.dst => {
                last.tx_count = last.tx_count.saturating_add(e.tx_count);
                last.amount = last.amount.saturating_add(e.amount);
                last.year_first = last.year_first.min(e.year_first);
                last.year_last = last.year_last.max(e.year_last);
            }
            _ => merged.push(e),
        }
    }
    merged.shrink_to_fit();
    merged
}

/// A loaded, cleaned input graph.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: TransactionGraph,
    pub stats: IngestStats,
    pub diagnostics: Vec<Diagnostic>,
    pub digest: String,
}

/// Parses, cleans and builds a graph from an edge file.
pub fn load_edge_file(
    path: &Path,
    aggregate: bool,
    options: ParseOptions,
) -> Result<LoadedGraph, IngestError> {
    let parsed = parse_edge_file(path, options)?;
    let ParsedEdges {
        records,
        diagnostics,
        digest,
    } = parsed;
    let (graph, stats) = clean_records(records, aggregate).into_graph()?;
    Ok(LoadedGraph {
        graph,
        stats,
        diagnostics,
        digest,
    })
}

/// Streams edge rows in the canonical CSV format.
pub struct EdgeCsvWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> EdgeCsvWriter<W> {
    pub fn new(writer: W) -> Result<Self, csv::Error> {
        let mut inner = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        inner.write_record(EDGE_HEADER)?;
        Ok(EdgeCsvWriter { inner })
    }

    pub fn write_edge(
        &mut self,
        src: &str,
        dst: &str,
        attrs: &EdgeAttrs,
    ) -> Result<(), csv::Error> {
        self.inner.write_record([
            src,
            dst,
            &attrs.tx_count.to_string(),
            &attrs.amount.to_string(),
            &attrs.year_first.to_string(),
            &attrs.year_last.to_string(),
        ])
    }

    pub fn write_raw(&mut self, record: &RawRecord) -> Result<(), csv::Error> {
        self.inner.write_record([
            record.src_label.as_str(),
            record.dst_label.as_str(),
            &record.tx_count.to_string(),
            &record.amount.to_string(),
            &record.year_first.to_string(),
            &record.year_last.to_string(),
        ])
    }

    pub fn into_inner(self) -> Result<W, io::Error> {
        self.inner
            .into_inner()
            .map_err(|e| io::Error::other(e.to_string()))
    }
}

/// Writes every edge of `graph` with its labels.
pub fn write_edge_csv<W: Write>(writer: W, graph: &TransactionGraph) -> Result<W, io::Error> {
    let mut out = EdgeCsvWriter::new(writer).map_err(io::Error::other)?;
    for e in graph.edges() {
        out.write_edge(graph.label(e.src), graph.label(e.dst), &e.attrs())
            .map_err(io::Error::other)?;
    }
    out.into_inner()
}
