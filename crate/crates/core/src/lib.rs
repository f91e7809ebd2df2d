//! Cycle search inside transaction communities.
//!
//! Accounts are nodes and aggregated transfers are directed edges. The
//! pipeline groups accounts with Louvain, drops edges that span years or
//! exceed the reporting threshold, and lists the directed simple cycles left
//! inside each community.

pub mod amount;
pub mod cli;
pub mod community;
pub mod cycles;
pub mod filters;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod synthgen;

pub use amount::Amount;
pub use community::{louvain, modularity, LouvainConfig, Partition, WeightMode};
pub use cycles::{simple_cycles, CycleConfig, CycleRecord};
pub use filters::{amount_filter, time_filter, FilterConfig};
pub use graph::{build_graph, AccountId, EdgeAttrs, LabeledEdge, TransactionGraph};
pub use ingest::{load_edge_file, IngestStats};
pub use pipeline::{run_pipeline, PipelineConfig};
pub use report::DetectionReport;
