//! One bank-sized instance, checked end to end.

use std::fs::File;
use std::io::{BufRead, BufReader};

use cyclone::ingest::{load_edge_file, ParseOptions};
use cyclone::synthgen::{generate, GenConfig};
use cyclone::{run_pipeline, PipelineConfig};

/// Counts data lines and lines whose first two fields match, without the
/// csv parser.
fn line_scan(path: &std::path::Path) -> (u64, u64) {
    let mut lines = BufReader::new(File::open(path).unwrap()).lines();
    lines.next().unwrap().unwrap();
    let (mut records, mut loops) = (0, 0);
    for line in lines {
        let line = line.unwrap();
        let mut fields = line.split(',');
        let (src, dst) = (fields.next().unwrap(), fields.next().unwrap());
        records += 1;
        loops += u64::from(src == dst);
    }
    (records, loops)
}

#[test]
fn bank_scale_instance() {
    let config = GenConfig::bank_scale(1);
    let instance = generate(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("edges.csv");
    instance
        .write_files(&csv, &dir.path().join("truth.json"))
        .unwrap();
    drop(instance);

    let (records, loops) = line_scan(&csv);
    assert_eq!(records, 4_127_043);

    let raw = load_edge_file(&csv, false, ParseOptions::default()).unwrap();
    assert_eq!(raw.stats.records_read, records);
    assert_eq!(raw.stats.self_loops_dropped, loops);
    assert_eq!(
        raw.stats.final_edge_count,
        records - loops - raw.stats.malformed_rejected
    );
    drop(raw);

    let loaded = load_edge_file(&csv, true, ParseOptions::default()).unwrap();
    assert_eq!(loaded.graph.node_count(), 1_624_030);
    assert_eq!(loaded.graph.edge_count(), 3_823_167);

    let report = run_pipeline(&loaded.graph, &PipelineConfig::default()).unwrap();
    let f = &report.funnel;
    eprintln!("{f:?}");
    eprintln!("{:?}", report.histogram);
    assert!((10_000..100_000).contains(&f.communities_total), "{f:?}");
    assert!(
        (1_000_000..10_000_000).contains(&f.edges_time_pass),
        "{f:?}"
    );
    assert!(
        (1_000_000..10_000_000).contains(&f.edges_amount_pass),
        "{f:?}"
    );
    assert!((100..1_000).contains(&f.cycles_found), "{f:?}");
    let hist = &report.histogram;
    let longer = hist
        .iter()
        .filter(|(&len, _)| len > 4)
        .map(|(_, &c)| c)
        .max()
        .unwrap_or(0);
    assert!(hist[&3] > longer && hist[&4] > longer, "{hist:?}");
}
