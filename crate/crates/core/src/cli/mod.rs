//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 when input or configuration is invalid,
//! 3 when an otherwise valid run fails.

use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::community::{louvain, WeightMode};
use crate::cycles::simple_cycles;
use crate::filters::DEFAULT_AMOUNT_THRESHOLD;
use crate::graph::TransactionGraph;
use crate::ingest::{load_edge_file, IngestError, LoadedGraph, ParseOptions, DEFAULT_ERROR_CAP};
use crate::pipeline::{
    histogram, report_cycle, run_pipeline_detailed, PipelineConfig, PipelineError,
};
use crate::report::{read_report, write_report, InputInfo, ReportCycle, ReportFormat};
use crate::synthgen::{
    generate, score_detection, CommunityMembership, GenConfig, GenError, GroundTruth, PlantSpec,
};

// Writes to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(io::stdout(), $($arg)*);
    }};
}

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

fn invalid(message: impl Display) -> CliError {
    CliError {
        code: EXIT_VALIDATION,
        message: message.to_string(),
    }
}

fn failed(message: impl Display) -> CliError {
    CliError {
        code: EXIT_RUNTIME,
        message: message.to_string(),
    }
}

type CliResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "cyclone",
    version,
    about = "Find money-laundering cycles inside transaction communities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic edge file with planted cycles
    Gen(GenArgs),
    /// Ingest an edge file and print its statistics
    Stats(StatsArgs),
    /// Run the full pipeline and write a report
    Detect(DetectArgs),
    /// Run community detection only and dump the partition
    Communities(CommunitiesArgs),
    /// List cycles in an already filtered edge file, ignoring communities
    Cycles(CyclesArgs),
    /// Compare a report with a generator's ground truth
    Score(ScoreArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    Amount,
    #[value(alias = "tx_count")]
    Count,
    Unweighted,
}

impl From<WeightArg> for WeightMode {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::Amount => WeightMode::Amount,
            WeightArg::Count => WeightMode::TxCount,
            WeightArg::Unweighted => WeightMode::Unweighted,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Edge CSV with header src,dst,tx_count,amount,year_first,year_last
    #[arg(long)]
    pub input: PathBuf,
    /// Keep repeated (src, dst) rows apart instead of summing them
    #[arg(long)]
    pub no_aggregate: bool,
    /// Malformed lines tolerated before ingestion aborts
    #[arg(long, default_value_t = DEFAULT_ERROR_CAP)]
    pub error_cap: usize,
}

#[derive(Debug, Args)]
pub struct LouvainArgs {
    /// Edge weight used for modularity
    #[arg(long, value_enum, default_value = "amount")]
    pub weight_mode: WeightArg,
    /// Modularity resolution
    #[arg(long, default_value_t = 1.0)]
    pub resolution: f64,
    /// Seed for the Louvain visit order
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// TOML file with [louvain], [filter] and [cycle] tables; flags win over it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CycleArgs {
    /// Shortest cycle reported
    #[arg(long, default_value_t = 3)]
    pub min_cycle_len: usize,
    /// Longest cycle reported
    #[arg(long, default_value_t = 10)]
    pub max_cycle_len: usize,
    /// Cycles listed per community before its search is cut short
    #[arg(long, default_value_t = 1_000_000)]
    pub max_cycles_per_community: usize,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Report path; a directory for --format csv
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    /// Edges active for this many years or more are dropped
    #[arg(long, default_value_t = 1)]
    pub t0_years: u32,
    /// Edges with an amount at or above this are dropped
    #[arg(long, default_value_t = DEFAULT_AMOUNT_THRESHOLD)]
    pub amount_threshold: Amount,
    /// Communities with fewer accounts are skipped
    #[arg(long, default_value_t = 3)]
    pub min_community_order: usize,
    #[command(flatten)]
    pub cycle: CycleArgs,
    #[command(flatten)]
    pub louvain: LouvainArgs,
    /// Worker threads for the per-community stages [default: all cores]
    #[arg(long, env = "CYCLONE_THREADS")]
    pub threads: Option<usize>,
    /// Also write the partition as node_label,community_id
    #[arg(long)]
    pub partition_out: Option<PathBuf>,
    /// Print the funnel as JSON instead of text
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CommunitiesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub louvain: LouvainArgs,
    /// Where to write node_label,community_id
    #[arg(long)]
    pub partition_out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CyclesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub cycle: CycleArgs,
    /// TOML file whose [cycle] table is used; flags win over it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the cycles as JSON here
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Start from the full bank-scale preset instead of the defaults
    #[arg(long)]
    pub bank_scale: bool,
    #[arg(long, default_value_t = 10_000)]
    pub nodes: usize,
    /// Distinct directed edges [default: about 2.35 per node]
    #[arg(long)]
    pub edges: Option<usize>,
    #[arg(long, default_value_t = 250)]
    pub blocks: usize,
    /// Share of background edges kept inside a block
    #[arg(long, default_value_t = 0.9)]
    pub intra_fraction: f64,
    /// Power-law exponent of the degree distribution
    #[arg(long, default_value_t = 2.5)]
    pub degree_exponent: f64,
    /// Largest target degree [default: what one block can hold]
    #[arg(long)]
    pub max_degree: Option<u64>,
    /// Share of background edges that follow a hidden account ordering
    #[arg(long, default_value_t = 0.95)]
    pub flow_order: f64,
    /// Share of background edges at or above the reporting threshold
    #[arg(long, default_value_t = 0.12)]
    pub above_threshold: f64,
    /// Share of background edges active within a single year
    #[arg(long, default_value_t = 0.46)]
    pub same_year: f64,
    /// Planted cycles as LENGTH:COUNT, repeatable
    #[arg(long, value_parser = parse_plant)]
    pub plant: Vec<PlantSpec>,
    /// Extra self-loop rows written to the file
    #[arg(long, default_value_t = 0)]
    pub self_loops: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "edges.csv")]
    pub out: PathBuf,
    /// Ground-truth JSON path
    #[arg(long, default_value = "truth.json")]
    pub truth: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    #[arg(long)]
    pub truth: PathBuf,
    /// Partition dump from detect or communities; enables community_intact_recall
    #[arg(long)]
    pub partition: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

fn parse_plant(s: &str) -> Result<PlantSpec, String> {
    let (len, count) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LENGTH:COUNT, got {s:?}"))?;
    let length = len
        .trim()
        .parse()
        .map_err(|_| format!("bad cycle length {len:?}"))?;
    let count = count
        .trim()
        .parse()
        .map_err(|_| format!("bad cycle count {count:?}"))?;
    Ok(PlantSpec { length, count })
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { 0 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return EXIT_VALIDATION;
        }
    };
    let sub = matches
        .subcommand()
        .map(|(_, m)| m)
        .expect("subcommand is required");
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a, sub),
        Command::Stats(a) => cmd_stats(a),
        Command::Detect(a) => cmd_detect(a, sub),
        Command::Communities(a) => cmd_communities(a, sub),
        Command::Cycles(a) => cmd_cycles(a, sub),
        Command::Score(a) => cmd_score(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn explicit(matches: &ArgMatches, id: &str) -> bool {
    matches!(
        matches.value_source(id),
        Some(ValueSource::CommandLine | ValueSource::EnvVariable)
    )
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    #[serde(flatten)]
    pipeline: PipelineConfigTables,
    threads: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct PipelineConfigTables {
    louvain: crate::community::LouvainConfig,
    filter: crate::filters::FilterConfig,
    cycle: crate::cycles::CycleConfig,
}

fn read_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Defaults, then the config file, then flags given on the command line.
fn pipeline_config(args: &DetectArgs, m: &ArgMatches) -> Result<PipelineConfig, CliError> {
    let file = read_config(args.louvain.config.as_deref())?;
    let mut config = PipelineConfig {
        louvain: file.pipeline.louvain,
        filter: file.pipeline.filter,
        cycle: file.pipeline.cycle,
        parallelism: file.threads,
    };
    apply_louvain(&mut config.louvain, &args.louvain, m);
    apply_cycle(&mut config.cycle, &args.cycle, m);
    if explicit(m, "t0_years") {
        config.filter.t0_years = args.t0_years;
    }
    if explicit(m, "amount_threshold") {
        config.filter.amount_threshold = args.amount_threshold;
    }
    if explicit(m, "min_community_order") {
        config.filter.min_community_order = args.min_community_order;
    }
    if explicit(m, "threads") {
        config.parallelism = args.threads;
    }
    config.validate().map_err(invalid)?;
    Ok(config)
}

fn apply_louvain(config: &mut crate::community::LouvainConfig, args: &LouvainArgs, m: &ArgMatches) {
    if explicit(m, "weight_mode") {
        config.weight_mode = args.weight_mode.into();
    }
    if explicit(m, "resolution") {
        config.resolution = args.resolution;
    }
    if explicit(m, "seed") {
        config.seed = args.seed;
    }
}

fn apply_cycle(config: &mut crate::cycles::CycleConfig, args: &CycleArgs, m: &ArgMatches) {
    if explicit(m, "min_cycle_len") {
        config.min_len = args.min_cycle_len;
    }
    if explicit(m, "max_cycle_len") {
        config.max_len = args.max_cycle_len;
    }
    if explicit(m, "max_cycles_per_community") {
        config.max_cycles_per_community = args.max_cycles_per_community;
    }
}

fn load(args: &InputArgs) -> Result<LoadedGraph, CliError> {
    let started = Instant::now();
    let loaded = load_edge_file(
        &args.input,
        !args.no_aggregate,
        ParseOptions {
            error_cap: args.error_cap,
        },
    )
    .map_err(|e| match e {
        IngestError::Io { ref source, .. }
            if source.kind() != io::ErrorKind::NotFound
                && source.kind() != io::ErrorKind::PermissionDenied
                && source.kind() != io::ErrorKind::IsADirectory =>
        {
            failed(e)
        }
        other => invalid(other),
    })?;
    let malformed = loaded
        .diagnostics
        .iter()
        .filter(|d| d.kind == crate::ingest::DiagnosticKind::Malformed)
        .count();
    for d in loaded.diagnostics.iter().take(5) {
        eprintln!("warning: line {}: {}", d.line, d.message);
    }
    if loaded.diagnostics.len() > 5 {
        eprintln!(
            "warning: {} more diagnostics not shown",
            loaded.diagnostics.len() - 5
        );
    }
    eprintln!(
        "[ingest] {} nodes, {} edges ({} malformed lines) in {:.2?}",
        loaded.graph.node_count(),
        loaded.graph.edge_count(),
        malformed,
        started.elapsed()
    );
    Ok(loaded)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| failed(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| failed(format!("{}: {e}", path.display())))?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| failed(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) {
    say!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

/// Writes `node_label,community_id` for every node.
pub fn write_partition(path: &Path, graph: &TransactionGraph, assignment: &[u32]) -> CliResult {
    let err = |e: &dyn Display| failed(format!("{}: {e}", path.display()));
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(["node_label", "community_id"])
        .map_err(|e| err(&e))?;
    for (node, community) in graph.nodes().zip(assignment) {
        out.write_record([graph.label(node), &community.to_string()])
            .map_err(|e| err(&e))?;
    }
    out.flush().map_err(|e| err(&e))
}

fn report_format(f: FormatArg) -> ReportFormat {
    match f {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::CsvBundle,
    }
}

fn pipeline_error(e: PipelineError) -> CliError {
    match e {
        PipelineError::NoUsableEdges | PipelineError::InvalidConfig(_) => invalid(e),
        other => failed(other),
    }
}

pub fn cmd_detect(args: &DetectArgs, m: &ArgMatches) -> CliResult {
    let config = pipeline_config(args, m)?;
    let loaded = load(&args.input)?;
    let run = run_pipeline_detailed(&loaded.graph, &config).map_err(pipeline_error)?;
    let t = &run.timings;
    eprintln!(
        "[louvain] {} communities, Q = {:.6}, {} levels in {:.2?}",
        run.partition().community_count(),
        run.louvain.modularity(),
        run.louvain.level_modularity.len(),
        t.louvain
    );
    eprintln!(
        "[communities] {} kept, stage wall time {:.2?} (filtering {:.2?}, cycles {:.2?} summed over workers)",
        run.kept_communities.len(),
        t.community_stage_wall,
        t.filtering,
        t.cycles
    );
    let mut report = run.report.clone();
    report.funnel.self_loops_dropped = loaded.stats.self_loops_dropped;
    report.input = Some(InputInfo {
        digest: loaded.digest.clone(),
        aggregate: !args.input.no_aggregate,
        ingest: loaded.stats,
    });
    write_report(&report, &args.out, report_format(args.format)).map_err(failed)?;
    if let Some(path) = &args.partition_out {
        write_partition(path, &loaded.graph, run.partition().assignment())?;
    }
    if !report.truncated_communities.is_empty() {
        eprintln!(
            "warning: cycle search was cut short in {} communities",
            report.truncated_communities.len()
        );
    }
    if args.json {
        print_json(&report.funnel);
    } else {
        for (name, value) in report.funnel.entries() {
            say!("{name:<28}{value}");
        }
    }
    Ok(())
}

pub fn cmd_stats(args: &StatsArgs) -> CliResult {
    let loaded = load(&args.input)?;
    if args.json {
        print_json(&loaded.stats);
    } else {
        let s = &loaded.stats;
        for (name, value) in [
            ("records_read", s.records_read),
            ("self_loops_dropped", s.self_loops_dropped),
            ("malformed_rejected", s.malformed_rejected),
            ("records_aggregated", s.records_aggregated),
            ("final_edge_count", s.final_edge_count),
            ("final_node_count", s.final_node_count),
        ] {
            say!("{name:<22}{value}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CommunitySummary {
    communities: usize,
    modularity: f64,
    initial_modularity: f64,
    level_modularity: Vec<f64>,
    largest: usize,
}

pub fn cmd_communities(args: &CommunitiesArgs, m: &ArgMatches) -> CliResult {
    let mut config = read_config(args.louvain.config.as_deref())?
        .pipeline
        .louvain;
    apply_louvain(&mut config, &args.louvain, m);
    config.validate().map_err(invalid)?;
    let loaded = load(&args.input)?;
    let started = Instant::now();
    let result = louvain(&loaded.graph, &config).map_err(|e| pipeline_error(e.into()))?;
    eprintln!("[louvain] {:.2?}", started.elapsed());
    if let Some(path) = &args.partition_out {
        write_partition(path, &loaded.graph, result.partition.assignment())?;
    }
    let summary = CommunitySummary {
        communities: result.partition.community_count(),
        modularity: result.modularity(),
        initial_modularity: result.initial_modularity,
        level_modularity: result.level_modularity.clone(),
        largest: result
            .partition
            .community_sizes()
            .into_iter()
            .max()
            .unwrap_or(0),
    };
    if args.json {
        print_json(&summary);
    } else {
        say!("communities         {}", summary.communities);
        say!("modularity          {:.6}", summary.modularity);
        say!("levels              {}", summary.level_modularity.len());
        say!("largest community   {}", summary.largest);
    }
    Ok(())
}

#[derive(Serialize)]
struct CycleListing {
    truncated: bool,
    cycles_found: usize,
    histogram: std::collections::BTreeMap<usize, u64>,
    cycles: Vec<ReportCycle>,
}

pub fn cmd_cycles(args: &CyclesArgs, m: &ArgMatches) -> CliResult {
    let mut config = read_config(args.config.as_deref())?.pipeline.cycle;
    apply_cycle(&mut config, &args.cycle, m);
    config.validate().map_err(invalid)?;
    let loaded = load(&args.input)?;
    let started = Instant::now();
    let search = simple_cycles(&loaded.graph, &config);
    eprintln!("[cycles] {:.2?}", started.elapsed());
    let listing = CycleListing {
        truncated: search.truncated,
        cycles_found: search.cycles.len(),
        histogram: histogram(&search.cycles),
        cycles: search
            .cycles
            .iter()
            .map(|c| report_cycle(&loaded.graph, c))
            .collect(),
    };
    if let Some(path) = &args.out {
        write_json(path, &listing)?;
    }
    if args.json {
        print_json(&serde_json::json!({
            "truncated": listing.truncated,
            "cycles_found": listing.cycles_found,
            "histogram": listing.histogram,
        }));
    } else {
        say!("cycles_found  {}", listing.cycles_found);
        for (len, count) in &listing.histogram {
            say!("  length {len:<3} {count}");
        }
        if listing.truncated {
            say!("truncated     true");
        }
    }
    Ok(())
}

pub fn cmd_gen(args: &GenArgs, m: &ArgMatches) -> CliResult {
    // with the preset, only flags given explicitly override it
    let set = |id: &str| !args.bank_scale || explicit(m, id);
    let mut config = if args.bank_scale {
        GenConfig::bank_scale(args.seed)
    } else {
        GenConfig::default()
    };
    if set("nodes") {
        config.nodes = args.nodes;
    }
    if let Some(edges) = args.edges {
        config.target_edges = edges;
    } else if set("nodes") {
        config.target_edges = (config.nodes as u128 * 3_823_167 / 1_624_030) as usize;
    }
    if set("blocks") {
        config.block_count = args.blocks;
    }
    if set("intra_fraction") {
        config.intra_block_edge_fraction = args.intra_fraction;
    }
    if set("degree_exponent") {
        config.degree_exponent = args.degree_exponent;
    }
    if set("max_degree") {
        config.max_degree = args.max_degree;
    }
    if set("flow_order") {
        config.flow_order_fraction = args.flow_order;
    }
    if set("above_threshold") {
        config.amount_distribution.above_threshold_fraction = args.above_threshold;
    }
    if set("same_year") {
        config.same_year_fraction = args.same_year;
    }
    if set("plant") {
        config.planted_cycles = args.plant.clone();
    }
    if set("self_loops") {
        config.self_loop_records = args.self_loops;
    }
    config.seed = args.seed;

    let started = Instant::now();
    let instance = generate(&config).map_err(|e| match e {
        GenError::Infeasible(_) => invalid(e),
        GenError::Io(_) => failed(e),
    })?;
    eprintln!(
        "[gen] {} records in {:.2?}",
        instance.records.len(),
        started.elapsed()
    );
    let truth = instance.write_files(&args.out, &args.truth).map_err(|e| {
        failed(format!(
            "writing {} / {}: {e}",
            args.out.display(),
            args.truth.display()
        ))
    })?;
    let summary = serde_json::json!({
        "instance_id": truth.instance_id,
        "nodes": config.nodes,
        "edges": config.target_edges,
        "records": instance.records.len(),
        "planted_cycles": truth.planted.len(),
        "edges_file": args.out,
        "truth_file": args.truth,
    });
    if args.json {
        print_json(&summary);
    } else {
        say!("instance_id     {}", truth.instance_id);
        say!("nodes           {}", config.nodes);
        say!("edges           {}", config.target_edges);
        say!("planted_cycles  {}", truth.planted.len());
    }
    Ok(())
}

pub fn cmd_score(args: &ScoreArgs) -> CliResult {
    let report = read_report(&args.report, report_format(args.format)).map_err(invalid)?;
    let truth = GroundTruth::read(&args.truth)
        .map_err(|e| invalid(format!("{}: {e}", args.truth.display())))?;
    let membership = match &args.partition {
        Some(path) => Some(
            CommunityMembership::from_path(path, report.config.filter.min_community_order)
                .map_err(invalid)?,
        ),
        None => None,
    };
    let score = score_detection(&report, &truth, membership.as_ref()).map_err(invalid)?;
    if args.json {
        print_json(&score);
    } else {
        let show = |x: Option<f64>| x.map_or("null".to_string(), |v| format!("{v:.4}"));
        say!("planted                  {}", score.planted);
        say!("planted_found            {}", score.planted_found);
        say!("recall                   {}", show(score.recall));
        say!(
            "community_intact_recall  {}",
            show(score.community_intact_recall)
        );
        say!("non_planted_found        {}", score.non_planted_found);
        say!(
            "precision_vs_planted     {}",
            show(score.precision_vs_planted)
        );
    }
    Ok(())
}
