use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TRIANGLE: &str = "src,dst,tx_count,amount,year_first,year_last
a,b,2,4500.00,2015,2015
b,c,1,4400.00,2015,2015
c,a,3,4300.50,2015,2015
";

fn cyclone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclone"))
        .args(args)
        .env_remove("CYCLONE_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn detect_on_a_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "edges.csv", TRIANGLE);
    let out = dir.path().join("report.json");
    let run = cyclone(&["detect", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let report = json(&out);
    assert_eq!(report["cycles"].as_array().unwrap().len(), 1);
    assert_eq!(report["funnel"]["accounts_flagged"], 3);
    assert_eq!(report["histogram"]["3"], 1);
    assert_eq!(
        report["flagged_accounts"],
        serde_json::json!(["a", "b", "c"])
    );
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("cycles_found") && stdout.contains("accounts_flagged"));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("[louvain]") && stderr.contains("[communities]"));
}

#[test]
fn missing_input_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = cyclone(&[
        "detect",
        "--input",
        "/nonexistent/edges.csv",
        "--out",
        s(&dir.path().join("r.json")),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("error"));
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn bad_header_and_bad_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "edges.csv", "from,to\na,b\n");
    let out = dir.path().join("r.json");
    assert_eq!(
        cyclone(&["detect", "--input", s(&input), "--out", s(&out)])
            .status
            .code(),
        Some(2)
    );
    let input = write(dir.path(), "ok.csv", TRIANGLE);
    for bad in [
        vec!["--t0-years", "0"],
        vec!["--amount-threshold", "12.345"],
        vec!["--min-cycle-len", "1"],
        vec!["--min-cycle-len", "5", "--max-cycle-len", "4"],
        vec!["--weight-mode", "volume"],
        vec!["--threads", "0"],
        vec!["--resolution", "-1"],
    ] {
        let mut args = vec!["detect", "--input", s(&input), "--out", s(&out)];
        args.extend(bad.iter().copied());
        assert_eq!(cyclone(&args).status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn only_self_loops_means_no_usable_edges() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "edges.csv",
        "src,dst,tx_count,amount,year_first,year_last\na,a,1,5.00,2015,2015\n",
    );
    let run = cyclone(&[
        "detect",
        "--input",
        s(&input),
        "--out",
        s(&dir.path().join("r.json")),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("graph has no usable edges"));
}

#[test]
fn explicit_defaults_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.csv");
    let truth = dir.path().join("truth.json");
    let gen = cyclone(&[
        "gen",
        "--nodes",
        "3000",
        "--blocks",
        "60",
        "--plant",
        "3:4",
        "--seed",
        "3",
        "--out",
        s(&edges),
        "--truth",
        s(&truth),
    ]);
    assert!(gen.status.success());
    let plain = dir.path().join("plain.json");
    let explicit = dir.path().join("explicit.json");
    assert!(
        cyclone(&["detect", "--input", s(&edges), "--out", s(&plain)])
            .status
            .success()
    );
    let run = cyclone(&[
        "detect",
        "--input",
        s(&edges),
        "--out",
        s(&explicit),
        "--t0-years",
        "1",
        "--amount-threshold",
        "10000",
        "--min-cycle-len",
        "3",
    ]);
    assert!(run.status.success());
    assert_eq!(fs::read(&plain).unwrap(), fs::read(&explicit).unwrap());
}

#[test]
fn gen_writes_csv_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.csv");
    let truth = dir.path().join("truth.json");
    let args = [
        "gen", "--nodes", "1000", "--blocks", "10", "--plant", "3:5", "--plant", "4:3", "--seed",
        "7",
    ];
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", s(&edges), "--truth", s(&truth), "--json"]);
    let run = cyclone(&full);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let t = json(&truth);
    assert_eq!(t["planted"].as_array().unwrap().len(), 8);
    assert_eq!(t["seed"], 7);
    let summary: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(summary["instance_id"], t["instance_id"]);

    let first = fs::read(&edges).unwrap();
    assert!(cyclone(&full).status.success());
    assert_eq!(first, fs::read(&edges).unwrap(), "same seed, same bytes");
}

#[test]
fn gen_rejects_infeasible_planting() {
    let dir = tempfile::tempdir().unwrap();
    let run = cyclone(&[
        "gen",
        "--nodes",
        "12",
        "--edges",
        "20",
        "--blocks",
        "2",
        "--plant",
        "7:2",
        "--out",
        s(&dir.path().join("e.csv")),
        "--truth",
        s(&dir.path().join("t.json")),
    ]);
    assert_eq!(run.status.code(), Some(2));
    let run = cyclone(&["gen", "--plant", "3x5"]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn stats_counts_self_loops() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{TRIANGLE}d,d,1,10.00,2016,2016\n");
    let input = write(dir.path(), "edges.csv", &text);
    let run = cyclone(&["stats", "--input", s(&input), "--json"]);
    assert!(run.status.success());
    let stats: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(stats["self_loops_dropped"], 1);
    assert_eq!(stats["records_read"], 4);
    assert_eq!(stats["final_edge_count"], 3);
    let text_run = cyclone(&["stats", "--input", s(&input)]);
    let text = String::from_utf8_lossy(&text_run.stdout);
    let line = text
        .lines()
        .find(|l| l.starts_with("self_loops_dropped"))
        .unwrap();
    assert_eq!(line.split_whitespace().nth(1), Some("1"));
}

#[test]
fn score_reports_recall_fields() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.csv");
    let truth = dir.path().join("truth.json");
    let report = dir.path().join("report.json");
    let partition = dir.path().join("partition.csv");
    assert!(cyclone(&[
        "gen",
        "--nodes",
        "2000",
        "--blocks",
        "50",
        "--plant",
        "3:3",
        "--plant",
        "5:2",
        "--seed",
        "1",
        "--out",
        s(&edges),
        "--truth",
        s(&truth)
    ])
    .status
    .success());
    assert!(cyclone(&[
        "detect",
        "--input",
        s(&edges),
        "--out",
        s(&report),
        "--partition-out",
        s(&partition)
    ])
    .status
    .success());

    let run = cyclone(&[
        "score",
        "--report",
        s(&report),
        "--truth",
        s(&truth),
        "--partition",
        s(&partition),
        "--json",
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let score: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(score["planted"], 5);
    for key in [
        "recall",
        "community_intact_recall",
        "precision_vs_planted",
        "non_planted_found",
    ] {
        assert!(score.get(key).is_some(), "{key}");
    }
    assert_eq!(score["community_intact_recall"], 1.0);

    let dump = fs::read_to_string(&partition).unwrap();
    assert!(dump.starts_with("node_label,community_id\n"));
    assert_eq!(dump.lines().count(), 2001);

    // a report from a different file is refused
    let other = write(dir.path(), "tri.csv", TRIANGLE);
    let other_report = dir.path().join("tri.json");
    assert!(
        cyclone(&["detect", "--input", s(&other), "--out", s(&other_report)])
            .status
            .success()
    );
    let run = cyclone(&["score", "--report", s(&other_report), "--truth", s(&truth)]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn empty_truth_gives_null_recall() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.csv");
    let truth = dir.path().join("truth.json");
    let report = dir.path().join("report.json");
    assert!(cyclone(&[
        "gen",
        "--nodes",
        "500",
        "--blocks",
        "10",
        "--seed",
        "2",
        "--out",
        s(&edges),
        "--truth",
        s(&truth)
    ])
    .status
    .success());
    assert!(
        cyclone(&["detect", "--input", s(&edges), "--out", s(&report)])
            .status
            .success()
    );
    let run = cyclone(&[
        "score",
        "--report",
        s(&report),
        "--truth",
        s(&truth),
        "--json",
    ]);
    let score: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert!(score["recall"].is_null());
}

#[test]
fn help_lists_flags_with_defaults() {
    let run = cyclone(&["detect", "--help"]);
    assert_eq!(run.status.code(), Some(0));
    let help = String::from_utf8_lossy(&run.stdout);
    for (flag, default) in [
        ("--t0-years", "[default: 1]"),
        ("--amount-threshold", "[default: 10000.00]"),
        ("--min-community-order", "[default: 3]"),
        ("--min-cycle-len", "[default: 3]"),
        ("--max-cycle-len", "[default: 10]"),
        ("--weight-mode", "[default: amount]"),
        ("--resolution", "[default: 1]"),
        ("--seed", "[default: 0]"),
        ("--format", "[default: json]"),
    ] {
        let line = help
            .lines()
            .skip_while(|l| !l.contains(flag))
            .take(3)
            .collect::<Vec<_>>()
            .join(" ");
        assert!(line.contains(default), "{flag}: {line}");
    }
    for flag in [
        "--input",
        "--out",
        "--threads",
        "--partition-out",
        "--json",
        "--config",
        "CYCLONE_THREADS",
    ] {
        assert!(help.contains(flag), "{flag}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "edges.csv", TRIANGLE);
    // the file raises the order floor above the triangle's size
    let config = write(
        dir.path(),
        "cyclone.toml",
        "[filter]\nmin_community_order = 4\n\n[louvain]\nseed = 9\n",
    );
    let out = dir.path().join("r.json");
    assert!(cyclone(&[
        "detect",
        "--input",
        s(&input),
        "--out",
        s(&out),
        "--config",
        s(&config)
    ])
    .status
    .success());
    let report = json(&out);
    assert_eq!(report["cycles"].as_array().unwrap().len(), 0);
    assert_eq!(report["config"]["louvain"]["seed"], 9);
    let run = cyclone(&[
        "detect",
        "--input",
        s(&input),
        "--out",
        s(&out),
        "--config",
        s(&config),
        "--min-community-order",
        "3",
    ]);
    assert!(run.status.success());
    let report = json(&out);
    assert_eq!(report["cycles"].as_array().unwrap().len(), 1);
    assert_eq!(report["config"]["filter"]["min_community_order"], 3);

    let typo = write(
        dir.path(),
        "typo.toml",
        "[filter]\nmin_community_size = 4\n",
    );
    let run = cyclone(&[
        "detect",
        "--input",
        s(&input),
        "--out",
        s(&out),
        "--config",
        s(&typo),
    ]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn thread_count_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "edges.csv", TRIANGLE);
    let out = dir.path().join("r.json");
    let run = Command::new(env!("CARGO_BIN_EXE_cyclone"))
        .args(["detect", "--input", s(&input), "--out", s(&out)])
        .env("CYCLONE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));
    let run = Command::new(env!("CARGO_BIN_EXE_cyclone"))
        .args(["detect", "--input", s(&input), "--out", s(&out)])
        .env("CYCLONE_THREADS", "2")
        .output()
        .unwrap();
    assert!(run.status.success());
}

#[test]
fn csv_bundle_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "edges.csv", TRIANGLE);
    let bundle = dir.path().join("bundle");
    let run = cyclone(&[
        "detect",
        "--input",
        s(&input),
        "--out",
        s(&bundle),
        "--format",
        "csv",
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let cycles = fs::read_to_string(bundle.join("cycles.csv")).unwrap();
    assert_eq!(cycles.lines().count(), 4);
    let flagged = fs::read_to_string(bundle.join("flagged_accounts.csv")).unwrap();
    assert_eq!(flagged, "account\na\nb\nc\n");
    let hist = fs::read_to_string(bundle.join("histogram.csv")).unwrap();
    assert!(hist.contains("3,1"));
}

#[test]
fn communities_and_cycles_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "edges.csv", TRIANGLE);
    let partition = dir.path().join("p.csv");
    let run = cyclone(&[
        "communities",
        "--input",
        s(&input),
        "--partition-out",
        s(&partition),
        "--json",
    ]);
    assert!(run.status.success());
    let summary: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(summary["communities"], 1);
    assert_eq!(
        fs::read_to_string(&partition).unwrap(),
        "node_label,community_id\na,0\nb,0\nc,0\n"
    );

    let listing = dir.path().join("cycles.json");
    let run = cyclone(&[
        "cycles",
        "--input",
        s(&input),
        "--out",
        s(&listing),
        "--json",
    ]);
    assert!(run.status.success());
    let summary: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(summary["cycles_found"], 1);
    assert_eq!(
        json(&listing)["cycles"][0]["nodes"],
        serde_json::json!(["a", "b", "c"])
    );
    let run = cyclone(&[
        "cycles",
        "--input",
        s(&input),
        "--min-cycle-len",
        "4",
        "--json",
    ]);
    let summary: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(summary["cycles_found"], 0);
}

#[test]
fn no_subcommand_is_an_error() {
    assert_eq!(cyclone(&[]).status.code(), Some(2));
    assert_eq!(cyclone(&["--version"]).status.code(), Some(0));
}
