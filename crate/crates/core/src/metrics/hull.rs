//! Convex hull, shoelace area and the hull diameter used for circularity.

/// Convex hull in counter-clockwise order (Andrew's monotone chain).
/// Collinear points on hull edges are dropped.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Shoelace area of a polygon given in order (positive when counter-clockwise).
pub fn shoelace_area(vertices: &[(f64, f64)]) -> f64 {
    let n = vertices.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    0.5 * twice
}

/// Largest distance between two hull vertices that are not neighbors on the
/// hull (`1 < |i − j| < N_h − 1`); for hulls of three or fewer vertices, the
/// largest vertex distance.
pub fn hull_diameter(vertices: &[(f64, f64)]) -> f64 {
    let n = vertices.len();
    let dist = |i: usize, j: usize| {
        let (a, b) = (vertices[i], vertices[j]);
        (a.0 - b.0).hypot(a.1 - b.1)
    };
    let mut best = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let gap = j - i;
            if n <= 3 || (gap > 1 && gap < n - 1) {
                best = best.max(dist(i, j));
            }
        }
    }
    best
}
