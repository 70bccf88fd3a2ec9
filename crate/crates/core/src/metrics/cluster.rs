//! Agglomerative clustering with Ward linkage on a precomputed dissimilarity
//! matrix, plus the two movement-similarity dissimilarities.
//!
//! Linkage follows the Lance–Williams recurrence for Ward's method on
//! dissimilarities (the SciPy / fastcluster convention), so merge heights
//! are comparable to thresholds tuned with those tools. Flat clusters join
//! every merge whose height does not exceed the threshold.

use super::MetricsError;

/// One agglomeration step. Leaves are `0..n`; the cluster formed by step `i`
/// has id `n + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n: usize,
    pub merges: Vec<Merge>,
}

/// Flat clustering result. Labels are numbered by first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub n_clusters: usize,
    pub largest: usize,
}

impl Clustering {
    pub fn single(n: usize) -> Self {
        Clustering {
            labels: vec![0; n],
            n_clusters: usize::from(n > 0),
            largest: n,
        }
    }
}

/// Ward linkage over a symmetric `n × n` dissimilarity matrix.
///
/// The closest pair of active clusters is merged at each step; ties go to
/// the lexicographically smallest pair of matrix slots.
pub fn ward_linkage(dissimilarity: &[Vec<f64>]) -> Dendrogram {
    let n = dissimilarity.len();
    let mut d: Vec<Vec<f64>> = dissimilarity.to_vec();
    let mut id: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if active[j] && d[i][j] < best.0 {
                    best = (d[i][j], i, j);
                }
            }
        }
        let (dij, i, j) = best;
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let nk = size[k] as f64;
            let sq = ((ni + nk) * d[i][k] * d[i][k] + (nj + nk) * d[j][k] * d[j][k]
                - nk * dij * dij)
                / (ni + nj + nk);
            let updated = sq.max(0.0).sqrt();
            d[i][k] = updated;
            d[k][i] = updated;
        }
        merges.push(Merge {
            a: id[i].min(id[j]),
            b: id[i].max(id[j]),
            height: dij,
            size: size[i] + size[j],
        });
        active[j] = false;
        size[i] += size[j];
        id[i] = n + step;
    }
    Dendrogram { n, merges }
}

/// Flat clusters from every merge with height `<= threshold`.
pub fn cut(dendrogram: &Dendrogram, threshold: f64) -> Clustering {
    let n = dendrogram.n;
    let total = n + dendrogram.merges.len();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (step, m) in dendrogram.merges.iter().enumerate() {
        if m.height <= threshold {
            let node = n + step;
            let ra = find(&mut parent, m.a);
            let rb = find(&mut parent, m.b);
            parent[ra] = node;
            parent[rb] = node;
        }
    }
    let mut labels = vec![0usize; n];
    let mut roots: Vec<usize> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for (i, label) in labels.iter_mut().enumerate() {
        let r = find(&mut parent, i);
        let l = match roots.iter().position(|&x| x == r) {
            Some(l) => l,
            None => {
                roots.push(r);
                counts.push(0);
                roots.len() - 1
            }
        };
        counts[l] += 1;
        *label = l;
    }
    Clustering {
        labels,
        n_clusters: roots.len(),
        largest: counts.into_iter().max().unwrap_or(0),
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Simulation dissimilarity `((1 − P_ij) + D^N_ij) / 2`.
///
/// `distances` is the full `n × n` distance matrix. `D^N_ij` is
/// `|median(D) − D_ij| / max(D)`, with the median taken over every entry of
/// the matrix including the zero diagonal. `P_ij` is the pair polarization.
pub fn sim_dissimilarity(
    distances: &[Vec<f64>],
    headings: &[f64],
) -> Result<Vec<Vec<f64>>, MetricsError> {
    let n = headings.len();
    if n < 2 {
        return Err(MetricsError::DegenerateInput("clustering needs at least two agents"));
    }
    let mut flat: Vec<f64> = distances.iter().flatten().copied().collect();
    let max = flat.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(MetricsError::DegenerateInput("all agents are coincident"));
    }
    let med = median(&mut flat);
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (si, ci) = headings[i].sin_cos();
            let (sj, cj) = headings[j].sin_cos();
            let p = (ci + cj).hypot(si + sj) / 2.0;
            let dn = (med - distances[i][j]).abs() / max;
            m[i][j] = ((1.0 - p) + dn) / 2.0;
        }
    }
    Ok(m)
}

/// Robot-data dissimilarity `1 − sqrt((1 − D_ij / r_max)(n_i·n_j + 1) / 2)`.
pub fn robot_dissimilarity(
    distances: &[Vec<f64>],
    headings: &[f64],
    r_max: f64,
) -> Result<Vec<Vec<f64>>, MetricsError> {
    if !(r_max > 0.0) {
        return Err(MetricsError::DegenerateInput("trajectory extent r_max must be positive"));
    }
    let n = headings.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let closeness = (1.0 - distances[i][j] / r_max).max(0.0);
            let alignment = ((headings[i] - headings[j]).cos() + 1.0) / 2.0;
            m[i][j] = 1.0 - (closeness * alignment).sqrt();
        }
    }
    Ok(m)
}
