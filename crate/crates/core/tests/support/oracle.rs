//! Reference implementations used as test oracles. They share no code with
//! the crate: geometry is done with dot products instead of angle
//! arithmetic, and Ward linkage is recomputed from cluster centroids.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use visflock_core::{AgentState, Arena, ModelParams};

fn minimal_image(focal: (f64, f64), other: (f64, f64), arena: &Arena) -> (f64, f64) {
    let mut dx = other.0 - focal.0;
    let mut dy = other.1 - focal.1;
    if arena.is_periodic() {
        dx -= arena.width * (dx / arena.width).round();
        dy -= arena.height * (dy / arena.height).round();
    }
    (dx, dy)
}

/// Casts one ray per retina pixel center and sets the pixel if the ray
/// meets the disc of a perceivable agent.
///
/// An agent is perceivable if its disc subtends at least one pixel, lies
/// within the vision range and its angular extent reaches into the field of
/// view. An observer inside another disc sees the half circle facing it.
pub fn ray_cast_vpf(focal: usize, states: &[AgentState], arena: &Arena, p: &ModelParams) -> Vec<bool> {
    let me = states[focal];
    let n = p.n_ret;
    let dphi = 2.0 * PI / n as f64;
    let fov_half = p.fov_fraction * PI;
    let (hx, hy) = (me.psi.cos(), me.psi.sin());

    let mut discs = Vec::new();
    for (j, s) in states.iter().enumerate() {
        if j == focal {
            continue;
        }
        let (cx, cy) = minimal_image(me.position(), s.position(), arena);
        let d = cx.hypot(cy);
        if d > p.vision_range {
            continue;
        }
        // apparent half-width
        let h = if d <= p.radius { PI / 2.0 } else { (p.radius / d).asin() };
        if p.radius < d && p.radius < d * (dphi / 2.0).sin() {
            continue;
        }
        if fov_half < PI {
            let off_axis = ((hx * cx + hy * cy) / d).clamp(-1.0, 1.0).acos();
            if off_axis > fov_half + h {
                continue;
            }
        }
        discs.push((cx, cy, d));
    }

    (0..n)
        .map(|k| {
            let theta = me.psi + (k as f64 + 0.5) * dphi - PI;
            let (ux, uy) = (theta.cos(), theta.sin());
            discs.iter().any(|&(cx, cy, d)| {
                let along = ux * cx + uy * cy;
                if d <= p.radius {
                    return along >= 0.0;
                }
                let perp2 = d * d - along * along;
                along > 0.0 && perp2 <= p.radius * p.radius
            })
        })
        .collect()
}

pub type Cluster = BTreeSet<usize>;

/// Ward merge sequence for points in the plane, found by trying every pair
/// of current clusters at every step. Heights use the centroid form
/// `sqrt(2 |A| |B| / (|A| + |B|)) · |c_A − c_B|`.
pub fn ward_reference(points: &[(f64, f64)]) -> Vec<(Cluster, Cluster, f64)> {
    let mut clusters: Vec<Cluster> = (0..points.len()).map(|i| BTreeSet::from([i])).collect();
    let centroid = |c: &Cluster| {
        let n = c.len() as f64;
        let (sx, sy) = c.iter().fold((0.0, 0.0), |acc, &i| (acc.0 + points[i].0, acc.1 + points[i].1));
        (sx / n, sy / n)
    };
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (a, b) = (&clusters[i], &clusters[j]);
                let (ca, cb) = (centroid(a), centroid(b));
                let (na, nb) = (a.len() as f64, b.len() as f64);
                let h = (2.0 * na * nb / (na + nb)).sqrt() * (ca.0 - cb.0).hypot(ca.1 - cb.1);
                if h < best.0 {
                    best = (h, i, j);
                }
            }
        }
        let (h, i, j) = best;
        let b = clusters.remove(j);
        let a = clusters[i].clone();
        clusters[i].extend(b.iter().copied());
        merges.push((a, b, h));
    }
    merges
}

/// Leaf sets of a dendrogram given with SciPy-style node ids.
pub fn leaf_sets(n: usize, merges: &[(usize, usize)]) -> Vec<(Cluster, Cluster)> {
    let mut members: Vec<Cluster> = (0..n).map(|i| BTreeSet::from([i])).collect();
    let mut out = Vec::new();
    for &(a, b) in merges {
        let (sa, sb) = (members[a].clone(), members[b].clone());
        members.push(sa.union(&sb).copied().collect());
        out.push((sa, sb));
    }
    out
}

/// Unordered pair of leaf sets, for comparing merges regardless of side.
pub fn unordered(a: &Cluster, b: &Cluster) -> (Cluster, Cluster) {
    if a.iter().next() <= b.iter().next() {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}
