//! SVG heatmaps of an aggregate table: α₀ on the vertical axis, β₀ on the
//! horizontal one, one panel per metric and FOV.

use std::fmt::Write as _;

use thiserror::Error;

use crate::sweep::AggregateRow;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeatmapError {
    #[error("no cells to plot")]
    EmptyGrid,
    #[error("grid is not rectangular: {0}")]
    NotRectangular(String),
    #[error("unknown metric `{0}` (expected P, D_mean, RCA, N_clus_max or R_o_sim)")]
    UnknownMetric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Polarization,
    MeanIid,
    Circularity,
    NClusMax,
    OverlapRatio,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Polarization,
        Metric::MeanIid,
        Metric::Circularity,
        Metric::NClusMax,
        Metric::OverlapRatio,
    ];

    /// Column name in the sweep tables.
    pub fn name(self) -> &'static str {
        match self {
            Metric::Polarization => "P",
            Metric::MeanIid => "D_mean",
            Metric::Circularity => "RCA",
            Metric::NClusMax => "N_clus_max",
            Metric::OverlapRatio => "R_o_sim",
        }
    }

    pub fn value(self, row: &AggregateRow) -> f64 {
        match self {
            Metric::Polarization => row.p,
            Metric::MeanIid => row.d_mean,
            Metric::Circularity => row.rca,
            Metric::NClusMax => row.n_clus_max,
            Metric::OverlapRatio => row.r_o,
        }
    }

    /// Color scale. Fixed where the metric is bounded; `N_clus_max` spans
    /// one to `n_agents` and `D_mean` the observed range.
    fn scale(self, values: &[f64], n_agents: usize) -> (f64, f64) {
        match self {
            Metric::Polarization | Metric::Circularity => (0.0, 1.0),
            Metric::OverlapRatio => (0.0, 50.0),
            Metric::NClusMax => (1.0, n_agents.max(1) as f64),
            Metric::MeanIid => {
                let finite = values.iter().copied().filter(|v| v.is_finite());
                let lo = finite.clone().fold(f64::INFINITY, f64::min);
                let hi = finite.fold(f64::NEG_INFINITY, f64::max);
                if lo.is_finite() {
                    (lo, hi)
                } else {
                    (0.0, 1.0)
                }
            }
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = HeatmapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| HeatmapError::UnknownMetric(s.to_string()))
    }
}

const CELL: f64 = 64.0;
const LEFT: f64 = 80.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 56.0;
const RIGHT: f64 = 24.0;

fn color(t: f64) -> (u8, u8, u8) {
    let c = colorous::VIRIDIS.eval_continuous(t.clamp(0.0, 1.0));
    (c.r, c.g, c.b)
}

fn sorted_unique(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Renders one panel. `rows` must hold exactly one row per (α₀, β₀) pair;
/// filter by FOV first.
pub fn emit_heatmap(
    rows: &[AggregateRow],
    metric: Metric,
    n_agents: usize,
) -> Result<String, HeatmapError> {
    if rows.is_empty() {
        return Err(HeatmapError::EmptyGrid);
    }
    let alphas = sorted_unique(rows.iter().map(|r| r.alpha0));
    let betas = sorted_unique(rows.iter().map(|r| r.beta0));
    if alphas.len() * betas.len() != rows.len() {
        return Err(HeatmapError::NotRectangular(format!(
            "{} rows for {} α₀ × {} β₀ values",
            rows.len(),
            alphas.len(),
            betas.len()
        )));
    }
    let mut grid = vec![vec![None; betas.len()]; alphas.len()];
    for r in rows {
        let i = alphas.iter().position(|&a| a == r.alpha0).unwrap_or(0);
        let j = betas.iter().position(|&b| b == r.beta0).unwrap_or(0);
        if grid[i][j].is_some() {
            return Err(HeatmapError::NotRectangular(format!(
                "duplicate cell α₀ = {}, β₀ = {}",
                r.alpha0, r.beta0
            )));
        }
        grid[i][j] = Some(metric.value(r));
    }
    let values: Vec<f64> = grid.iter().flatten().flatten().copied().collect();
    let (lo, hi) = metric.scale(&values, n_agents);

    let width = LEFT + CELL * betas.len() as f64 + RIGHT;
    let height = TOP + CELL * alphas.len() as f64 + BOTTOM;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    s.push_str(concat!(
        r#"<defs><pattern id="hatch" width="8" height="8" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"#,
        r##"<rect width="8" height="8" fill="#ffffff"/><line x1="0" y1="0" x2="0" y2="8" stroke="#888888" stroke-width="3"/>"##,
        "</pattern></defs>\n"
    ));
    let fov = rows[0].fov;
    let all_same_fov = rows.iter().all(|r| r.fov == fov);
    let title = if all_same_fov {
        format!("{} (FOV {}%)", metric.name(), fov * 100.0)
    } else {
        metric.name().to_string()
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#,
        width / 2.0
    );

    // α₀ grows upward
    for (i, &alpha) in alphas.iter().enumerate() {
        let y = TOP + CELL * (alphas.len() - 1 - i) as f64;
        let _ = writeln!(
            s,
            r#"<text class="row-label" x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{alpha}</text>"#,
            LEFT - 8.0,
            y + CELL / 2.0
        );
        for (j, &v) in grid[i].iter().enumerate() {
            let x = LEFT + CELL * j as f64;
            let v = v.unwrap_or(f64::NAN);
            if v.is_nan() {
                let _ = writeln!(
                    s,
                    r##"<rect class="cell missing" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="url(#hatch)" stroke="#ffffff"/>"##
                );
                continue;
            }
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            let (r, g, b) = color(t);
            let text = if (r as u32 * 299 + g as u32 * 587 + b as u32 * 114) / 1000 > 128 {
                "#000000"
            } else {
                "#ffffff"
            };
            let _ = writeln!(
                s,
                r##"<rect class="cell" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="#{r:02x}{g:02x}{b:02x}" stroke="#ffffff"/>"##
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" fill="{text}">{v:.2}</text>"#,
                x + CELL / 2.0,
                y + CELL / 2.0
            );
        }
    }
    let axis_y = TOP + CELL * alphas.len() as f64;
    for (j, &beta) in betas.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text class="col-label" x="{}" y="{}" text-anchor="middle">{beta}</text>"#,
            LEFT + CELL * (j as f64 + 0.5),
            axis_y + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">β₀</text>"#,
        LEFT + CELL * betas.len() as f64 / 2.0,
        axis_y + 40.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">α₀</text>"#,
        TOP + CELL * alphas.len() as f64 / 2.0,
        TOP + CELL * alphas.len() as f64 / 2.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}
