//! Per-frame metrics and window summaries for a recorded trajectory.

use std::collections::HashSet;
use std::io::Write;

use serde::Serialize;
use visflock_core::metrics::{
    summarize, trajectory_extent, WindowSummary, ROBOT_CLUSTER_THRESHOLD,
};
use visflock_core::{cluster_robot, Arena, MetricsRecord, Trajectory};

/// Dissimilarity used for the largest-cluster metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterMode {
    /// Distance to the median spacing plus pair polarization.
    #[default]
    Sim,
    /// Distance normalized by the trajectory extent times heading alignment;
    /// meant for tracked robot data.
    Robot,
}

impl std::str::FromStr for ClusterMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sim" => Ok(ClusterMode::Sim),
            "robot" => Ok(ClusterMode::Robot),
            other => Err(format!("unknown cluster mode `{other}` (expected sim or robot)")),
        }
    }
}

pub fn frame_metrics(
    trajectory: &Trajectory,
    arena: &Arena,
    radius: f64,
    mode: ClusterMode,
) -> Vec<MetricsRecord> {
    let r_max = match mode {
        ClusterMode::Sim => 0.0,
        ClusterMode::Robot => trajectory_extent(trajectory.frames()),
    };
    trajectory
        .records
        .iter()
        .map(|rec| {
            let mut m = MetricsRecord::compute(rec.t, &rec.states, arena, radius);
            if mode == ClusterMode::Robot {
                let positions: Vec<(f64, f64)> = rec.states.iter().map(|s| s.position()).collect();
                let headings: Vec<f64> = rec.states.iter().map(|s| s.psi).collect();
                m.n_clus_max =
                    match cluster_robot(&positions, &headings, r_max, ROBOT_CLUSTER_THRESHOLD) {
                        Ok(c) => c.largest,
                        Err(_) => positions.len(),
                    };
            }
            m
        })
        .collect()
}

#[derive(Serialize)]
struct MetricsRow {
    t: u64,
    #[serde(rename = "P")]
    polarization: f64,
    #[serde(rename = "D_mean")]
    mean_iid: Option<f64>,
    #[serde(rename = "RCA")]
    circularity: Option<f64>,
    #[serde(rename = "N_clus_max")]
    n_clus_max: usize,
    overlap_count: usize,
}

/// Writes `t,P,D_mean,RCA,N_clus_max,overlap_count`; undefined values are
/// left empty.
pub fn write_metrics_csv<W: Write>(records: &[MetricsRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(MetricsRow {
            t: r.t,
            polarization: r.polarization,
            mean_iid: r.mean_iid,
            circularity: r.circularity,
            n_clus_max: r.n_clus_max,
            overlap_count: r.overlap_count,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a step mask: whitespace or comma separated `t` values, `#`
/// comments allowed.
pub fn parse_step_mask(text: &str) -> Result<HashSet<u64>, String> {
    let mut out = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        for tok in content.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let t = tok
                .parse::<u64>()
                .map_err(|e| format!("step mask line {}: `{tok}`: {e}", i + 1))?;
            out.insert(t);
        }
    }
    Ok(out)
}

pub struct Analysis {
    pub records: Vec<MetricsRecord>,
    pub summary: WindowSummary,
}

pub fn analyze(
    trajectory: &Trajectory,
    arena: &Arena,
    radius: f64,
    window: f64,
    mode: ClusterMode,
    excluded: Option<&HashSet<u64>>,
) -> Analysis {
    let records = frame_metrics(trajectory, arena, radius, mode);
    let summary = summarize(&records, trajectory.n_agents(), window, excluded);
    Analysis { records, summary }
}

#[cfg(test)]
mod tests {
    use super::*;
    use visflock_core::{AgentState, Record};

    fn still(frames: usize, states: Vec<AgentState>) -> Trajectory {
        Trajectory {
            records: (0..frames)
                .map(|t| Record {
                    t: t as u64,
                    states: states.clone(),
                })
                .collect(),
        }
    }

    #[test]
    fn lone_agent_metrics() {
        let traj = still(5, vec![AgentState::new(10.0, 10.0, 1.0, 1.0)]);
        let a = analyze(&traj, &Arena::torus(900.0, 900.0), 5.5, 1.0, ClusterMode::Sim, None);
        assert_eq!(a.records.len(), 5);
        let r = a.records[0];
        assert_eq!((r.polarization, r.mean_iid, r.circularity, r.n_clus_max), (1.0, None, None, 1));
        assert!(a.summary.mean_iid.is_none());
        assert_eq!(a.summary.overlap_ratio, 0.0);

        let mut csv = Vec::new();
        write_metrics_csv(&a.records, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().next(), Some("t,P,D_mean,RCA,N_clus_max,overlap_count"));
        assert_eq!(text.lines().nth(1), Some("0,1.0,,,1,0"));
    }

    #[test]
    fn parallel_pair() {
        let pair = vec![
            AgentState::new(100.0, 100.0, 0.3, 1.0),
            AgentState::new(100.0, 200.0, 0.3, 1.0),
        ];
        let a = analyze(&still(4, pair), &Arena::walls(900.0, 900.0), 5.5, 1.0, ClusterMode::Sim, None);
        let s = a.summary;
        assert_eq!(s.polarization.unwrap().mean, 1.0);
        assert_eq!(s.mean_iid.unwrap().mean, 100.0);
        assert!(s.circularity.is_none());
        assert_eq!(s.n_clus_max.unwrap().mean, 2.0);
    }

    #[test]
    fn two_opposed_groups_split() {
        let mut states = Vec::new();
        for i in 0..5 {
            states.push(AgentState::new(100.0 + 10.0 * i as f64, 100.0, 0.0, 1.0));
            states.push(AgentState::new(700.0 + 10.0 * i as f64, 700.0, std::f64::consts::PI, 1.0));
        }
        let arena = Arena::walls(900.0, 900.0);
        let a = analyze(&still(2, states.clone()), &arena, 5.5, 1.0, ClusterMode::Sim, None);
        assert_eq!(a.records[0].n_clus_max, 5);
        let a = analyze(&still(2, states), &arena, 5.5, 1.0, ClusterMode::Robot, None);
        assert_eq!(a.records[0].n_clus_max, 5);
    }

    #[test]
    fn mask_excludes_steps() {
        let mask = parse_step_mask("3, 4\n# note\n 9").unwrap();
        assert_eq!(mask, HashSet::from([3, 4, 9]));
        assert!(parse_step_mask("x").is_err());
        let traj = still(10, vec![AgentState::new(1.0, 1.0, 0.0, 1.0), AgentState::new(50.0, 1.0, 0.0, 1.0)]);
        let a = analyze(&traj, &Arena::walls(900.0, 900.0), 5.5, 1.0, ClusterMode::Sim, Some(&mask));
        assert_eq!(a.summary.frames, 7);
    }
}
