//! Collective-behavior metrics: polarization, mean inter-individual
//! distance, overlap ratio, circularity of the group's convex hull and the
//! size of the largest polarized cluster.

pub mod cluster;
pub mod hull;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cluster::Clustering;

use crate::environment::Arena;
use crate::model::AgentState;

/// Clustering threshold for simulated agents.
pub const SIM_CLUSTER_THRESHOLD: f64 = 0.275;
/// Clustering threshold for the robot-data dissimilarity.
pub const ROBOT_CLUSTER_THRESHOLD: f64 = 0.1653;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
}

/// Norm of the mean unit heading vector.
pub fn polarization(headings: &[f64]) -> f64 {
    assert!(!headings.is_empty(), "polarization of an empty group");
    let (sx, sy) = headings.iter().fold((0.0, 0.0), |(x, y), psi| {
        let (s, c) = psi.sin_cos();
        (x + c, y + s)
    });
    (sx.hypot(sy) / headings.len() as f64).min(1.0)
}

/// Pairwise distances (minimal image on a torus).
pub fn distance_matrix(positions: &[(f64, f64)], arena: &Arena) -> Vec<Vec<f64>> {
    positions
        .iter()
        .map(|a| positions.iter().map(|b| arena.distance(*a, *b)).collect())
        .collect()
}

/// Mean distance over all unordered pairs; `None` for fewer than two agents.
pub fn mean_iid(positions: &[(f64, f64)], arena: &Arena) -> Option<f64> {
    let n = positions.len();
    if n < 2 {
        return None;
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..i {
            total += arena.distance(positions[i], positions[j]);
        }
    }
    Some(2.0 * total / (n * (n - 1)) as f64)
}

/// Number of agents closer than `2 · radius` to at least one other agent.
pub fn overlap_count(positions: &[(f64, f64)], radius: f64, arena: &Arena) -> usize {
    let limit = 2.0 * radius;
    (0..positions.len())
        .filter(|&i| {
            (0..positions.len())
                .any(|j| j != i && arena.distance(positions[i], positions[j]) < limit)
        })
        .count()
}

/// Overlap time ratio in percent: `1/(2N) Σ_i T_o,i / T · 100`, where
/// `T_o,i` counts the frames in which agent `i` overlaps someone.
pub fn overlap_ratio<'a, I>(frames: I, radius: f64, arena: &Arena) -> f64
where
    I: IntoIterator<Item = &'a [AgentState]>,
{
    let mut n_agents = 0usize;
    let mut n_frames = 0usize;
    let mut overlapping = 0usize;
    for frame in frames {
        let positions: Vec<(f64, f64)> = frame.iter().map(AgentState::position).collect();
        n_agents = positions.len();
        n_frames += 1;
        overlapping += overlap_count(&positions, radius, arena);
    }
    overlap_ratio_from_counts(overlapping, n_agents, n_frames)
}

/// Overlap ratio from the total of per-frame overlap counts.
pub fn overlap_ratio_from_counts(total_overlapping: usize, n_agents: usize, n_frames: usize) -> f64 {
    if n_agents == 0 || n_frames == 0 {
        return 0.0;
    }
    total_overlapping as f64 / n_frames as f64 * 100.0 / (2.0 * n_agents as f64)
}

/// Convex-hull area relative to the circle whose diameter is the hull
/// diameter, `4A / (π d²)`, clamped to `[0, 1]`. Degenerate hulls give 0.
pub fn circularity(positions: &[(f64, f64)]) -> Result<f64, MetricsError> {
    if positions.len() < 3 {
        return Err(MetricsError::DegenerateInput("circularity needs at least three agents"));
    }
    let h = hull::convex_hull(positions);
    if h.len() < 3 {
        return Ok(0.0);
    }
    let area = hull::shoelace_area(&h).abs();
    let d = hull::hull_diameter(&h);
    if d <= 0.0 {
        return Ok(0.0);
    }
    Ok((4.0 * area / (std::f64::consts::PI * d * d)).clamp(0.0, 1.0))
}

/// Ward clustering on the simulation dissimilarity, cut at `threshold`.
pub fn cluster_sim(
    positions: &[(f64, f64)],
    headings: &[f64],
    arena: &Arena,
    threshold: f64,
) -> Result<Clustering, MetricsError> {
    let distances = distance_matrix(positions, arena);
    let m = cluster::sim_dissimilarity(&distances, headings)?;
    Ok(cluster::cut(&cluster::ward_linkage(&m), threshold))
}

/// Ward clustering on the robot-data dissimilarity, cut at `threshold`.
pub fn cluster_robot(
    positions: &[(f64, f64)],
    headings: &[f64],
    r_max: f64,
    threshold: f64,
) -> Result<Clustering, MetricsError> {
    let distances = distance_matrix(positions, &Arena::unbounded());
    let m = cluster::robot_dissimilarity(&distances, headings, r_max)?;
    Ok(cluster::cut(&cluster::ward_linkage(&m), threshold))
}

/// Bound on any distance seen in a trajectory: the diagonal of the bounding
/// box of every recorded coordinate.
pub fn trajectory_extent<'a, I>(frames: I) -> f64
where
    I: IntoIterator<Item = &'a [AgentState]>,
{
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for s in frames.into_iter().flatten() {
        xs = (xs.0.min(s.x), xs.1.max(s.x));
        ys = (ys.0.min(s.y), ys.1.max(s.y));
    }
    if xs.0 > xs.1 {
        return 0.0;
    }
    (xs.1 - xs.0).hypot(ys.1 - ys.0)
}

/// Metrics of one recorded frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub t: u64,
    pub polarization: f64,
    /// Absent for a single agent.
    pub mean_iid: Option<f64>,
    /// Absent for fewer than three agents.
    pub circularity: Option<f64>,
    pub n_clus_max: usize,
    pub overlap_count: usize,
}

impl MetricsRecord {
    /// Computes every metric for one frame.
    ///
    /// On a torus the hull is built from the minimal images relative to
    /// agent 0, so a group straddling the seam keeps its shape.
    pub fn compute(t: u64, states: &[AgentState], arena: &Arena, radius: f64) -> Self {
        let positions: Vec<(f64, f64)> = states.iter().map(AgentState::position).collect();
        let headings: Vec<f64> = states.iter().map(|s| s.psi).collect();
        let hull_points: Vec<(f64, f64)> = if arena.is_periodic() && !positions.is_empty() {
            let origin = positions[0];
            positions
                .iter()
                .map(|p| {
                    let (dx, dy) = arena.displacement(origin, *p);
                    (origin.0 + dx, origin.1 + dy)
                })
                .collect()
        } else {
            positions.clone()
        };
        let n_clus_max = match cluster_sim(&positions, &headings, arena, SIM_CLUSTER_THRESHOLD) {
            Ok(c) => c.largest,
            // one agent, or all coincident: a single cluster
            Err(MetricsError::DegenerateInput(_)) => positions.len(),
        };
        MetricsRecord {
            t,
            polarization: polarization(&headings),
            mean_iid: mean_iid(&positions, arena),
            circularity: circularity(&hull_points).ok(),
            n_clus_max,
            overlap_count: overlap_count(&positions, radius, arena),
        }
    }
}

/// Mean, population standard deviation and median of one metric over a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub count: usize,
}

impl MetricSummary {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            0.5 * (sorted[mid - 1] + sorted[mid])
        };
        Some(MetricSummary {
            mean,
            std: var.sqrt(),
            median,
            count: values.len(),
        })
    }
}

/// Aggregates over the trailing window of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub window_fraction: f64,
    pub t_start: u64,
    pub t_end: u64,
    pub frames: usize,
    pub polarization: Option<MetricSummary>,
    pub mean_iid: Option<MetricSummary>,
    pub circularity: Option<MetricSummary>,
    pub n_clus_max: Option<MetricSummary>,
    /// Overlap time ratio (percent) over the window frames.
    pub overlap_ratio: f64,
}

/// Summarizes the records whose `t` lies in the last `window` fraction of
/// the recorded time span, skipping any `t` in `excluded`.
pub fn summarize(
    records: &[MetricsRecord],
    n_agents: usize,
    window: f64,
    excluded: Option<&HashSet<u64>>,
) -> WindowSummary {
    let window = window.clamp(0.0, 1.0);
    let (first, last) = match (records.first(), records.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => (0, 0),
    };
    let span = (last - first) as f64;
    let t_start = first + ((1.0 - window) * span).ceil() as u64;
    let selected: Vec<&MetricsRecord> = records
        .iter()
        .filter(|r| r.t >= t_start)
        .filter(|r| excluded.map_or(true, |ex| !ex.contains(&r.t)))
        .collect();
    let overlapping: usize = selected.iter().map(|r| r.overlap_count).sum();
    WindowSummary {
        window_fraction: window,
        t_start,
        t_end: last,
        frames: selected.len(),
        polarization: MetricSummary::of(selected.iter().map(|r| r.polarization)),
        mean_iid: MetricSummary::of(selected.iter().filter_map(|r| r.mean_iid)),
        circularity: MetricSummary::of(selected.iter().filter_map(|r| r.circularity)),
        n_clus_max: MetricSummary::of(selected.iter().map(|r| r.n_clus_max as f64)),
        overlap_ratio: overlap_ratio_from_counts(overlapping, n_agents, selected.len()),
    }
}
