use std::collections::{HashMap, HashSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::GroundTruth;
use crate::report::DetectionReport;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("report instance {report} does not match ground truth instance {truth}")]
    InstanceMismatch { report: String, truth: String },
    #[error("partition dump: {0}")]
    Partition(String),
}

/// Community assignment read back from a partition dump, plus which
/// communities were large enough to be searched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommunityMembership {
    community: HashMap<String, u32>,
    kept: HashSet<u32>,
}

impl CommunityMembership {
    /// Communities with at least `min_order` members count as kept.
    pub fn new(assignment: impl IntoIterator<Item = (String, u32)>, min_order: usize) -> Self {
        let community: HashMap<String, u32> = assignment.into_iter().collect();
        let mut sizes: HashMap<u32, usize> = HashMap::new();
        for &c in community.values() {
            *sizes.entry(c).or_default() += 1;
        }
        let kept = sizes
            .into_iter()
            .filter(|&(_, s)| s >= min_order)
            .map(|(c, _)| c)
            .collect();
        CommunityMembership { community, kept }
    }

    /// Reads a `node_label,community_id` CSV.
    pub fn from_csv<R: Read>(reader: R, min_order: usize) -> Result<Self, ScoreError> {
        let mut rows = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut assignment = Vec::new();
        for (i, row) in rows.records().enumerate() {
            let row = row.map_err(|e| ScoreError::Partition(e.to_string()))?;
            let (Some(label), Some(id)) = (row.get(0), row.get(1)) else {
                return Err(ScoreError::Partition(format!(
                    "row {} has fewer than 2 fields",
                    i + 2
                )));
            };
            let id = id.parse().map_err(|_| {
                ScoreError::Partition(format!("row {}: bad community id {id:?}", i + 2))
            })?;
            assignment.push((label.to_string(), id));
        }
        Ok(Self::new(assignment, min_order))
    }

    pub fn from_path(path: &Path, min_order: usize) -> Result<Self, ScoreError> {
        let file = std::fs::File::open(path)
            .map_err(|e| ScoreError::Partition(format!("{}: {e}", path.display())))?;
        Self::from_csv(std::io::BufReader::new(file), min_order)
    }

    pub fn community_of(&self, label: &str) -> Option<u32> {
        self.community.get(label).copied()
    }

    /// True when every node sits in the same kept community.
    pub fn intact<S: AsRef<str>>(&self, nodes: &[S]) -> bool {
        let mut ids = nodes.iter().map(|l| self.community_of(l.as_ref()));
        match ids.next() {
            Some(Some(first)) => self.kept.contains(&first) && ids.all(|c| c == Some(first)),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionScore {
    pub planted: usize,
    pub planted_found: usize,
    /// `None` when nothing was planted.
    pub recall: Option<f64>,
    /// Planted cycles whose nodes all fell in one kept community.
    pub community_intact: Option<usize>,
    pub community_intact_found: Option<usize>,
    /// `None` without membership data or when no planted cycle stayed intact.
    pub community_intact_recall: Option<f64>,
    /// Reported cycles that are not planted; background cycles are expected.
    pub non_planted_found: usize,
    /// Planted share of all reported cycles; `None` when none were reported.
    pub precision_vs_planted: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Rotation starting at the smallest label, keeping orientation.
fn canonical(nodes: &[String]) -> Vec<&str> {
    let start = (0..nodes.len()).min_by_key(|&i| &nodes[i]).unwrap_or(0);
    nodes[start..]
        .iter()
        .chain(&nodes[..start])
        .map(String::as_str)
        .collect()
}

/// Matches reported cycles against planted ones by their canonical node
/// sequence.
pub fn score_detection(
    report: &DetectionReport,
    truth: &GroundTruth,
    membership: Option<&CommunityMembership>,
) -> Result<DetectionScore, ScoreError> {
    if let Some(id) = report.instance_id() {
        if !truth.instance_id.is_empty() && id != truth.instance_id {
            return Err(ScoreError::InstanceMismatch {
                report: id.to_string(),
                truth: truth.instance_id.clone(),
            });
        }
    }
    let reported: HashSet<Vec<&str>> = report.cycles.iter().map(|c| canonical(&c.nodes)).collect();
    let mut planted_found = 0;
    let mut intact = 0;
    let mut intact_found = 0;
    let mut planted_keys = HashSet::new();
    for cycle in &truth.planted {
        let key = canonical(&cycle.nodes);
        let found = reported.contains(&key);
        planted_found += usize::from(found);
        if membership.is_some_and(|m| m.intact(&cycle.nodes)) {
            intact += 1;
            intact_found += usize::from(found);
        }
        planted_keys.insert(key);
    }
    let non_planted_found = report
        .cycles
        .iter()
        .filter(|c| !planted_keys.contains(&canonical(&c.nodes)))
        .count();
    Ok(DetectionScore {
        planted: truth.planted.len(),
        planted_found,
        recall: ratio(planted_found, truth.planted.len()),
        community_intact: membership.map(|_| intact),
        community_intact_found: membership.map(|_| intact_found),
        community_intact_recall: membership.and_then(|_| ratio(intact_found, intact)),
        non_planted_found,
        precision_vs_planted: ratio(report.cycles.len() - non_planted_found, report.cycles.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::PipelineConfig;
    use crate::report::ReportCycle;
    use crate::synthgen::{GenConfig, PlantedCycle};

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn truth(cycles: &[&[&str]]) -> GroundTruth {
        GroundTruth {
            instance_id: String::new(),
            seed: 0,
            config: GenConfig::default(),
            planted: cycles
                .iter()
                .map(|c| PlantedCycle {
                    nodes: labels(c),
                    block: 0,
                    edges: Vec::new(),
                })
                .collect(),
        }
    }

    fn report(cycles: &[&[&str]]) -> DetectionReport {
        let mut r = DetectionReport::empty(PipelineConfig::default());
        r.cycles = cycles
            .iter()
            .enumerate()
            .map(|(i, c)| ReportCycle {
                cycle_id: i as u64,
                community_id: 0,
                length: c.len(),
                nodes: labels(c),
                edges: Vec::new(),
            })
            .collect();
        r
    }

    #[test]
    fn all_found() {
        let t = truth(&[&["A1", "A2", "A3"], &["A7", "A5", "A6", "A9"]]);
        let r = report(&[
            &["A1", "A2", "A3"],
            &["A5", "A6", "A9", "A7"],
            &["A1", "A3", "A8"],
        ]);
        let s = score_detection(&r, &t, None).unwrap();
        assert_eq!(s.recall, Some(1.0));
        assert_eq!(s.non_planted_found, 1);
        assert_eq!(s.precision_vs_planted, Some(2.0 / 3.0));
        assert_eq!(s.community_intact_recall, None);
    }

    #[test]
    fn reversed_orientation_is_a_different_cycle() {
        let t = truth(&[&["A1", "A2", "A3"]]);
        let s = score_detection(&report(&[&["A1", "A3", "A2"]]), &t, None).unwrap();
        assert_eq!(s.recall, Some(0.0));
    }

    #[test]
    fn empty_truth_is_undefined() {
        let s = score_detection(&report(&[]), &truth(&[]), None).unwrap();
        assert_eq!(s.recall, None);
        assert_eq!(s.precision_vs_planted, None);
    }

    #[test]
    fn intact_recall_ignores_split_cycles() {
        let t = truth(&[
            &["A1", "A2", "A3"],
            &["A4", "A5", "A6"],
            &["A7", "A8", "A9"],
        ]);
        let m = CommunityMembership::new(
            [
                ("A1", 0),
                ("A2", 0),
                ("A3", 0),
                ("A4", 1),
                ("A5", 1),
                ("A6", 2),
                ("A7", 3),
                ("A8", 3),
                ("A9", 3),
                ("A0", 1),
            ]
            .map(|(l, c)| (l.to_string(), c)),
            3,
        );
        let s = score_detection(&report(&[&["A1", "A2", "A3"]]), &t, Some(&m)).unwrap();
        assert_eq!(s.community_intact, Some(2));
        assert_eq!(s.community_intact_recall, Some(0.5));
        assert_eq!(s.recall, Some(1.0 / 3.0));
    }

    #[test]
    fn mismatched_instances() {
        let mut t = truth(&[]);
        t.instance_id = "aa".into();
        let mut r = report(&[]);
        r.input = Some(crate::report::InputInfo {
            digest: "bb".into(),
            aggregate: true,
            ingest: Default::default(),
        });
        assert!(matches!(
            score_detection(&r, &t, None),
            Err(ScoreError::InstanceMismatch { .. })
        ));
        t.instance_id = "bb".into();
        assert!(score_detection(&r, &t, None).is_ok());
    }

    #[test]
    fn membership_from_csv() {
        let m = CommunityMembership::from_csv(
            "node_label,community_id\nA1,0\nA2,0\nA3,1\n".as_bytes(),
            2,
        )
        .unwrap();
        assert!(m.intact(&["A1", "A2"]));
        assert!(!m.intact(&["A3"]));
        assert!(!m.intact(&["A1", "A3"]));
        assert!(
            CommunityMembership::from_csv("node_label,community_id\nA1,x\n".as_bytes(), 1).is_err()
        );
    }
}
