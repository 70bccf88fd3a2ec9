//! Visual projection fields.
//!
//! Every other agent within sight subtends an angular interval (a blob) on
//! the focal agent's retina. The pipeline is: pick one image per agent on a
//! torus, compute the subtended interval, drop blobs that are too narrow or
//! too far, drop blobs entirely outside the active field of view (partially
//! visible blobs are kept whole), and rasterize the union.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use thiserror::Error;

use crate::angle::wrap_pi;
use crate::environment::Arena;
use crate::model::{AgentState, ModelParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerceptionError {
    #[error("agents {focal} and {other} are coincident")]
    CoincidentAgents { focal: usize, other: usize },
    #[error("malformed detection box #{index}: {reason}")]
    MalformedBox { index: usize, reason: String },
    #[error("camera field of view must lie in (0, 2π], got {0}")]
    InvalidCameraFov(f64),
}

/// Binary retina over `[−π, π)`; pixel 0 starts at `−π`, angles grow to the
/// agent's left.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VisualField {
    values: Vec<bool>,
}

impl VisualField {
    pub fn zeros(n_ret: usize) -> Self {
        VisualField {
            values: vec![false; n_ret],
        }
    }

    pub fn from_bits(values: Vec<bool>) -> Self {
        VisualField { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn delta_phi(&self) -> f64 {
        TAU / self.values.len() as f64
    }

    pub fn get(&self, k: usize) -> bool {
        self.values[k]
    }

    pub fn set(&mut self, k: usize, value: bool) {
        self.values[k] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.values
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    /// Field reflected about `φ = 0` (left and right swapped).
    pub fn mirrored(&self) -> Self {
        VisualField {
            values: self.values.iter().rev().copied().collect(),
        }
    }

    /// Debug dump: one `index value` line per pixel.
    pub fn to_dump(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 6);
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{k} {}", u8::from(*v));
        }
        out
    }
}

/// Angular extent of one visible agent, relative to the focal heading.
///
/// `phi_lo <= phi_hi`; the center lies in `(−π, π]` and the bounds may reach
/// past `±π`, in which case the blob wraps around the rear seam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobInterval {
    pub source: usize,
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub distance: f64,
}

impl BlobInterval {
    pub fn width(&self) -> f64 {
        self.phi_hi - self.phi_lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.phi_lo + self.phi_hi)
    }
}

/// Bounding box of a detected agent on a camera frame (pixels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionBox {
    pub x_min: f64,
    pub x_max: f64,
    pub height: f64,
    pub frame_width: f64,
}

impl DetectionBox {
    fn width(&self) -> f64 {
        self.x_max - self.x_min
    }
}

/// Of the nine copies of `other` shifted by `{0, −W, +W} × {0, −H, +H}`, the
/// one closest to `focal`. Ties keep the first copy in that order.
pub fn nearest_torus_image(focal: (f64, f64), other: (f64, f64), arena: &Arena) -> (f64, f64) {
    let mut best = other;
    let mut best_d2 = f64::INFINITY;
    for sx in [0.0, -arena.width, arena.width] {
        for sy in [0.0, -arena.height, arena.height] {
            let p = (other.0 + sx, other.1 + sy);
            let d2 = (p.0 - focal.0).powi(2) + (p.1 - focal.1).powi(2);
            if d2 < best_d2 {
                best = p;
                best_d2 = d2;
            }
        }
    }
    best
}

/// Interval subtended by a disc of `radius` centered at `other`.
pub fn angular_interval(
    focal: &AgentState,
    source: usize,
    other: (f64, f64),
    radius: f64,
) -> Result<BlobInterval, PerceptionError> {
    let dx = other.0 - focal.x;
    let dy = other.1 - focal.y;
    let distance = dx.hypot(dy);
    if distance == 0.0 {
        return Err(PerceptionError::CoincidentAgents {
            focal: usize::MAX,
            other: source,
        });
    }
    let bearing = wrap_pi(dy.atan2(dx) - focal.psi);
    let half = if radius >= distance {
        FRAC_PI_2
    } else {
        (radius / distance).asin()
    };
    Ok(BlobInterval {
        source,
        phi_lo: bearing - half,
        phi_hi: bearing + half,
        distance,
    })
}

/// Sets every pixel whose center lies in at least one interval.
pub fn rasterize(intervals: &[BlobInterval], n_ret: usize) -> VisualField {
    let mut field = VisualField::zeros(n_ret);
    let dphi = TAU / n_ret as f64;
    let half = (n_ret / 2) as f64;
    let n = n_ret as i64;
    for iv in intervals {
        if iv.width() >= TAU {
            field.values.fill(true);
            break;
        }
        let first = (iv.phi_lo / dphi + half - 0.5).floor() as i64;
        let last = (iv.phi_hi / dphi + half - 0.5).ceil() as i64;
        for k in first..=last {
            let center = (k as f64 + 0.5 - half) * dphi;
            if iv.phi_lo <= center && center <= iv.phi_hi {
                field.values[k.rem_euclid(n) as usize] = true;
            }
        }
    }
    field
}

/// Drops blobs narrower than one retina pixel and blobs beyond the vision
/// range.
pub fn apply_visibility_cutoff(
    intervals: Vec<BlobInterval>,
    params: &ModelParams,
) -> Vec<BlobInterval> {
    let dphi = params.delta_phi();
    intervals
        .into_iter()
        .filter(|iv| iv.width() >= dphi && iv.distance <= params.vision_range)
        .collect()
}

/// Keeps, in full, every blob that intersects `[−φ_L, φ_L]`.
pub fn limit_fov(intervals: Vec<BlobInterval>, fov_half: f64) -> Vec<BlobInterval> {
    if fov_half >= PI {
        return intervals;
    }
    intervals
        .into_iter()
        .filter(|iv| {
            [-TAU, 0.0, TAU]
                .iter()
                .any(|s| iv.phi_lo + s <= fov_half && iv.phi_hi + s >= -fov_half)
        })
        .collect()
}

/// Visual projection field of agent `focal` given all agent states.
pub fn build_vpf(
    focal: usize,
    states: &[AgentState],
    arena: &Arena,
    params: &ModelParams,
) -> Result<VisualField, PerceptionError> {
    let me = &states[focal];
    let mut intervals = Vec::with_capacity(states.len().saturating_sub(1));
    for (j, other) in states.iter().enumerate() {
        if j == focal {
            continue;
        }
        let pos = if arena.is_periodic() {
            nearest_torus_image(me.position(), other.position(), arena)
        } else {
            other.position()
        };
        let iv = angular_interval(me, j, pos, params.radius)
            .map_err(|_| PerceptionError::CoincidentAgents { focal, other: j })?;
        intervals.push(iv);
    }
    let visible = apply_visibility_cutoff(intervals, params);
    let visible = limit_fov(visible, params.fov_half());
    Ok(rasterize(&visible, params.n_ret))
}

/// Minimum raw box width, in source pixels, for a detection to count.
const MIN_BOX_WIDTH: f64 = 3.0;
/// Boxes whose horizontal IoU with a wider kept box exceeds this are dropped.
const MAX_BOX_OVERLAP: f64 = 0.5;

/// Visual projection field from camera detections.
///
/// Boxes are filtered (narrower than 3 px, or overlapping a wider box by
/// more than half), boxes touching a frame edge are widened to a square
/// towards the outside of the frame, and the horizontal extents are mapped
/// linearly onto `[−fov/2, fov/2]` with the frame's left edge at `+fov/2`.
pub fn vpf_from_boxes(
    boxes: &[DetectionBox],
    camera_fov: f64,
    n_ret: usize,
) -> Result<VisualField, PerceptionError> {
    if !(camera_fov > 0.0 && camera_fov <= TAU) {
        return Err(PerceptionError::InvalidCameraFov(camera_fov));
    }
    for (index, b) in boxes.iter().enumerate() {
        let reason = if !(b.frame_width > 0.0) {
            Some("frame width must be positive")
        } else if b.x_min > b.x_max {
            Some("x_min exceeds x_max")
        } else if b.x_min < 0.0 || b.x_max > b.frame_width {
            Some("bounds outside the frame")
        } else if !(b.height > 0.0) {
            Some("height must be positive")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(PerceptionError::MalformedBox {
                index,
                reason: reason.to_string(),
            });
        }
    }

    let mut order: Vec<usize> = (0..boxes.len())
        .filter(|&i| boxes[i].width() >= MIN_BOX_WIDTH)
        .collect();
    order.sort_by(|&a, &b| boxes[b].width().total_cmp(&boxes[a].width()));
    let mut kept: Vec<usize> = Vec::with_capacity(order.len());
    for i in order {
        let b = &boxes[i];
        let overlaps = kept.iter().any(|&j| {
            let o = &boxes[j];
            let inter = (b.x_max.min(o.x_max) - b.x_min.max(o.x_min)).max(0.0);
            let union = b.x_max.max(o.x_max) - b.x_min.min(o.x_min);
            union > 0.0 && inter / union > MAX_BOX_OVERLAP
        });
        if !overlaps {
            kept.push(i);
        }
    }
    kept.sort_unstable();

    let intervals: Vec<BlobInterval> = kept
        .into_iter()
        .map(|i| {
            let b = &boxes[i];
            let (mut lo, mut hi) = (b.x_min, b.x_max);
            if b.width() < b.height {
                let touches_left = lo <= 0.0;
                let touches_right = hi >= b.frame_width;
                if touches_left && !touches_right {
                    lo = hi - b.height;
                } else if touches_right && !touches_left {
                    hi = lo + b.height;
                }
            }
            let to_angle = |x: f64| (0.5 * b.frame_width - x) * camera_fov / b.frame_width;
            BlobInterval {
                source: i,
                phi_lo: to_angle(hi),
                phi_hi: to_angle(lo),
                // range is not observable from a single frame
                distance: f64::INFINITY,
            }
        })
        .collect();
    Ok(rasterize(&intervals, n_ret))
}
