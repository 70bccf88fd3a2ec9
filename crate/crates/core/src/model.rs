//! Individual and social forces and the explicit state update.
//!
//! Each agent relaxes towards its preferred speed and reacts to the blobs on
//! its retina. The social acceleration integrates the visual field against a
//! `cos` mask and the turning rate against a `sin` mask. Both integrands are
//! a short-range area term (`-V`) and a long-range edge term (`(∂V/∂φ)²`).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::wrap_2pi;
use crate::environment::Arena;
use crate::perception::{build_vpf, VisualField};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid parameter `{field}`: {reason}")]
pub struct ParamError {
    pub field: &'static str,
    pub reason: String,
}

impl ParamError {
    pub(crate) fn new(field: &'static str, reason: impl Into<String>) -> Self {
        ParamError {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("social force has constant sign over ({lo}, {hi}) px")]
    NoSignChange { lo: f64, hi: f64 },
    #[error(transparent)]
    InvalidParams(#[from] ParamError),
}

/// Parameters of the vision-based model.
///
/// The field of view is stored as a fraction of the full circle so that
/// configuration files round-trip exactly; [`ModelParams::fov_half`] gives
/// the half-angle `φ_L` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Relaxation rate towards the preferred speed.
    pub gamma: f64,
    /// Preferred speed (px/ts).
    pub v0: f64,
    /// Amplitude of the acceleration response.
    pub alpha0: f64,
    /// Front-back equilibrium control.
    pub alpha1: f64,
    /// Amplitude of the turning response.
    pub beta0: f64,
    /// Left-right equilibrium control.
    pub beta1: f64,
    /// Agent radius (half body length) in px.
    pub radius: f64,
    /// Retina resolution in pixels.
    pub n_ret: usize,
    /// Active field of view as a fraction of 2π, in `[0, 1]`.
    pub fov_fraction: f64,
    /// Maximum detection distance in px.
    pub vision_range: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            gamma: 0.1,
            v0: 1.0,
            alpha0: 1.0,
            alpha1: 0.09,
            beta0: 0.5,
            beta1: 0.09,
            radius: 5.5,
            n_ret: 320,
            fov_fraction: 1.0,
            vision_range: 2000.0,
        }
    }
}

impl ModelParams {
    /// Half-angle `φ_L` of the active field of view; the FOV is `[-φ_L, φ_L]`.
    pub fn fov_half(&self) -> f64 {
        self.fov_fraction * PI
    }

    /// Angular size of one retina pixel.
    pub fn delta_phi(&self) -> f64 {
        TAU / self.n_ret as f64
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let finite = [
            ("gamma", self.gamma),
            ("v0", self.v0),
            ("alpha0", self.alpha0),
            ("alpha1", self.alpha1),
            ("beta0", self.beta0),
            ("beta1", self.beta1),
            ("radius", self.radius),
            ("fov_fraction", self.fov_fraction),
            ("vision_range", self.vision_range),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return Err(ParamError::new(field, "must be finite"));
            }
        }
        if self.gamma <= 0.0 {
            return Err(ParamError::new("gamma", format!("must be > 0, got {}", self.gamma)));
        }
        if self.n_ret < 4 || self.n_ret % 2 != 0 {
            return Err(ParamError::new(
                "n_ret",
                format!("must be even and >= 4, got {}", self.n_ret),
            ));
        }
        if !(0.0..=1.0).contains(&self.fov_fraction) {
            return Err(ParamError::new(
                "fov_fraction",
                format!("must lie in [0, 1], got {}", self.fov_fraction),
            ));
        }
        if self.radius <= 0.0 {
            return Err(ParamError::new("radius", format!("must be > 0, got {}", self.radius)));
        }
        if self.vision_range <= 0.0 {
            return Err(ParamError::new(
                "vision_range",
                format!("must be > 0, got {}", self.vision_range),
            ));
        }
        Ok(())
    }
}

/// Kinematic state of one disc agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    /// Heading in `[0, 2π)`.
    pub psi: f64,
    /// Signed speed; negative values move the agent backwards.
    pub v: f64,
}

impl AgentState {
    pub fn new(x: f64, y: f64, psi: f64, v: f64) -> Self {
        AgentState {
            x,
            y,
            psi: wrap_2pi(psi),
            v,
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.psi.is_finite() && self.v.is_finite()
    }

    /// Explicit Euler update: speed and heading first, then the position is
    /// displaced along the new heading with the new speed.
    pub fn advance(&self, force: ForcePair, dt: f64) -> AgentState {
        let v = self.v + force.dv * dt;
        let psi = wrap_2pi(self.psi + force.dpsi * dt);
        AgentState {
            x: self.x + v * psi.cos() * dt,
            y: self.y + v * psi.sin() * dt,
            psi,
            v,
        }
    }
}

/// Right-hand sides of the speed and heading equations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForcePair {
    pub dv: f64,
    pub dpsi: f64,
}

impl std::ops::Add for ForcePair {
    type Output = ForcePair;

    fn add(self, rhs: ForcePair) -> ForcePair {
        ForcePair {
            dv: self.dv + rhs.dv,
            dpsi: self.dpsi + rhs.dpsi,
        }
    }
}

/// Self-propulsion term `γ (v₀ − v)`.
pub fn individual_force(v: f64, params: &ModelParams) -> f64 {
    params.gamma * (params.v0 - v)
}

/// Circular forward difference of a binary field, `(V[k+1] − V[k]) / Δφ`.
pub fn field_derivative(field: &VisualField) -> Vec<f64> {
    let n = field.len();
    let dphi = field.delta_phi();
    (0..n)
        .map(|k| {
            let next = field.get((k + 1) % n) as i8;
            let here = field.get(k) as i8;
            f64::from(next - here) / dphi
        })
        .collect()
}

/// Precomputed mask tables for one retina resolution.
///
/// Pixel `k` covers `[−π + kΔφ, −π + (k+1)Δφ)`. The area term is sampled at
/// pixel centers. The forward difference at `k` describes the boundary
/// between pixels `k` and `k+1`, so the edge term is sampled at that
/// boundary, which keeps reversed fields exactly mirror-symmetric.
#[derive(Debug, Clone)]
pub struct Retina {
    n: usize,
    delta_phi: f64,
    center_cos: Vec<f64>,
    center_sin: Vec<f64>,
    edge_cos: Vec<f64>,
    edge_sin: Vec<f64>,
}

impl Retina {
    pub fn new(n_ret: usize) -> Self {
        assert!(n_ret >= 4 && n_ret % 2 == 0, "retina size must be even and >= 4");
        let delta_phi = TAU / n_ret as f64;
        let half = (n_ret / 2) as f64;
        let centers: Vec<f64> = (0..n_ret)
            .map(|k| (k as f64 + 0.5 - half) * delta_phi)
            .collect();
        let edges: Vec<f64> = (0..n_ret).map(|k| (k as f64 + 1.0 - half) * delta_phi).collect();
        let mut edge_cos: Vec<f64> = edges.iter().map(|a| a.cos()).collect();
        let mut edge_sin: Vec<f64> = edges.iter().map(|a| a.sin()).collect();
        // The last boundary is the ±π seam.
        edge_cos[n_ret - 1] = -1.0;
        edge_sin[n_ret - 1] = 0.0;
        Retina {
            n: n_ret,
            delta_phi,
            center_cos: centers.iter().map(|a| a.cos()).collect(),
            center_sin: centers.iter().map(|a| a.sin()).collect(),
            edge_cos,
            edge_sin,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn delta_phi(&self) -> f64 {
        self.delta_phi
    }

    /// Center angle of pixel `k`.
    pub fn center(&self, k: usize) -> f64 {
        (k as f64 + 0.5 - (self.n / 2) as f64) * self.delta_phi
    }

    /// Social acceleration and turning rate for `field`.
    ///
    /// Every blob edge contributes `α₁` (resp. `β₁`) weighted by the mask at
    /// the edge; blob pixels contribute `−Δφ` weighted by the mask at their
    /// centers. Terms are accumulated in mirror pairs `(k, n−1−k)` so that a
    /// reversed field yields exactly the negated turning rate.
    pub fn forces(&self, field: &VisualField, params: &ModelParams) -> ForcePair {
        assert_eq!(field.len(), self.n, "field and retina resolution differ");
        let n = self.n;
        let v = |k: usize| f64::from(u8::from(field.get(k)));
        // squared forward difference times Δφ²: 1 on an edge, 0 elsewhere
        let edge = |k: usize| {
            let d = v((k + 1) % n) - v(k);
            d * d
        };

        let mut area_cos = 0.0;
        let mut area_sin = 0.0;
        for k in 0..n / 2 {
            let m = n - 1 - k;
            area_cos += -v(k) * self.center_cos[k] - v(m) * self.center_cos[m];
            area_sin += -v(k) * self.center_sin[k] - v(m) * self.center_sin[m];
        }

        let mut edge_cos = 0.0;
        let mut edge_sin = 0.0;
        for k in 0..n / 2 - 1 {
            let m = n - 2 - k;
            edge_cos += edge(k) * self.edge_cos[k] + edge(m) * self.edge_cos[m];
            edge_sin += edge(k) * self.edge_sin[k] + edge(m) * self.edge_sin[m];
        }
        for k in [n / 2 - 1, n - 1] {
            edge_cos += edge(k) * self.edge_cos[k];
            edge_sin += edge(k) * self.edge_sin[k];
        }

        ForcePair {
            dv: params.alpha0 * (area_cos * self.delta_phi + params.alpha1 * edge_cos),
            dpsi: params.beta0 * (area_sin * self.delta_phi + params.beta1 * edge_sin),
        }
    }
}

/// Social forces of `field` under `params`. Builds the mask tables on every
/// call; hot loops should hold a [`Retina`] instead.
pub fn social_forces(field: &VisualField, params: &ModelParams) -> ForcePair {
    Retina::new(field.len()).forces(field, params)
}

/// Synchronous Euler step for every agent.
pub fn integrate_step(states: &[AgentState], forces: &[ForcePair], dt: f64) -> Vec<AgentState> {
    assert_eq!(states.len(), forces.len(), "one force pair per agent");
    states
        .iter()
        .zip(forces)
        .map(|(s, f)| s.advance(*f, dt))
        .collect()
}

/// Axis along which an equilibrium distance is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Second agent straight ahead; zero of the social acceleration.
    FrontBack,
    /// Second agent on the left; zero of the social turning rate.
    LeftRight,
}

const EQUILIBRIUM_SCAN_POINTS: usize = 2048;
const EQUILIBRIUM_TOLERANCE: f64 = 1e-5;

/// Distance at which the social force on `axis` turns from repulsion (near)
/// to attraction (far).
///
/// The force is piecewise constant in distance because the retina is
/// pixelated, so the root is located as the first negative-to-positive jump
/// on a geometric scan of `(2R, vision_range)` and refined by bisection.
pub fn find_equilibrium_distance(axis: Axis, params: &ModelParams) -> Result<f64, ModelError> {
    params.validate()?;
    let retina = Retina::new(params.n_ret);
    let arena = Arena::unbounded();
    let force = |d: f64| -> f64 {
        let other = match axis {
            Axis::FrontBack => AgentState::new(d, 0.0, 0.0, params.v0),
            Axis::LeftRight => AgentState::new(0.0, d, 0.0, params.v0),
        };
        let states = [AgentState::new(0.0, 0.0, 0.0, params.v0), other];
        let field = build_vpf(0, &states, &arena, params).expect("agents are separated");
        let f = retina.forces(&field, params);
        match axis {
            Axis::FrontBack => f.dv,
            Axis::LeftRight => f.dpsi,
        }
    };

    let lo = 2.0 * params.radius;
    let hi = params.vision_range;
    if hi <= lo {
        return Err(ModelError::NoSignChange { lo, hi });
    }
    let ratio = (hi / lo).powf(1.0 / (EQUILIBRIUM_SCAN_POINTS - 1) as f64);
    let mut prev_d = lo * (1.0 + 1e-9);
    let mut prev_f = force(prev_d);
    for i in 1..EQUILIBRIUM_SCAN_POINTS {
        let d = if i == EQUILIBRIUM_SCAN_POINTS - 1 {
            hi
        } else {
            lo * ratio.powi(i as i32)
        };
        let f = force(d);
        if prev_f < 0.0 && f > 0.0 {
            let (mut a, mut b) = (prev_d, d);
            while b - a > EQUILIBRIUM_TOLERANCE {
                let mid = 0.5 * (a + b);
                if force(mid) < 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev_d = d;
        prev_f = f;
    }
    Err(ModelError::NoSignChange { lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn blob(n: usize, range: std::ops::RangeInclusive<usize>) -> VisualField {
        let mut f = VisualField::zeros(n);
        for k in range {
            f.set(k % n, true);
        }
        f
    }

    #[test]
    fn individual_force_examples() {
        let p = ModelParams::default();
        assert_eq!(individual_force(1.0, &p), 0.0);
        assert_abs_diff_eq!(individual_force(0.0, &p), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(individual_force(3.0, &p), -0.2, epsilon = 1e-15);
    }

    #[test]
    fn derivative_of_constant_fields_vanishes() {
        assert!(field_derivative(&VisualField::zeros(320)).iter().all(|&d| d == 0.0));
        let ones = VisualField::from_bits(vec![true; 320]);
        assert!(field_derivative(&ones).iter().all(|&d| d == 0.0));
    }

    #[test]
    fn derivative_of_single_blob_has_two_edges() {
        let d = field_derivative(&blob(320, 100..=105));
        let nonzero: Vec<(usize, f64)> =
            d.iter().copied().enumerate().filter(|(_, x)| *x != 0.0).collect();
        let mag = 320.0 / TAU;
        assert_eq!(nonzero.len(), 2);
        assert_eq!(nonzero[0].0, 99);
        assert_abs_diff_eq!(nonzero[0].1, mag, epsilon = 1e-9);
        assert_eq!(nonzero[1].0, 105);
        assert_abs_diff_eq!(nonzero[1].1, -mag, epsilon = 1e-9);
    }

    #[test]
    fn empty_and_full_fields_exert_no_force() {
        let p = ModelParams::default();
        assert_eq!(social_forces(&VisualField::zeros(320), &p), ForcePair::default());
        let full = social_forces(&VisualField::from_bits(vec![true; 320]), &p);
        assert!(full.dv.abs() < 1e-12 && full.dpsi.abs() < 1e-12);
    }

    #[test]
    fn symmetric_front_blob_does_not_turn() {
        let p = ModelParams::default();
        for half in 1..80 {
            let f = social_forces(&blob(320, 160 - half..=159 + half), &p);
            assert_eq!(f.dpsi, 0.0, "half width {half}");
        }
    }

    #[test]
    fn front_blob_attracts_when_narrow_and_repels_when_wide() {
        let p = ModelParams::default();
        let narrow = social_forces(&blob(320, 159..=160), &p);
        let wide = social_forces(&blob(320, 120..=199), &p);
        assert!(narrow.dv > 0.0);
        assert!(wide.dv < 0.0);
    }

    #[test]
    fn narrow_rear_blob_decelerates() {
        let p = ModelParams::default();
        let f = social_forces(&blob(320, 319..=320), &p);
        assert!(f.dv < 0.0, "{f:?}");
        assert!(f.dpsi.abs() < 1e-15);
    }

    #[test]
    fn euler_step_examples() {
        let s = AgentState::new(0.0, 0.0, 0.0, 1.0);
        let next = s.advance(ForcePair::default(), 1.0);
        assert_eq!((next.x, next.y), (1.0, 0.0));

        let s = AgentState::new(0.0, 0.0, 7.0 * PI / 4.0, 0.0);
        let next = s.advance(ForcePair { dv: 0.0, dpsi: PI / 2.0 }, 1.0);
        assert_abs_diff_eq!(next.psi, PI / 4.0, epsilon = 1e-12);

        let mut s = AgentState::new(0.0, 0.0, 0.0, 1.0);
        for _ in 0..10 {
            s = s.advance(ForcePair { dv: -0.3, dpsi: 0.0 }, 1.0);
        }
        assert_abs_diff_eq!(s.v, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn integrate_step_is_per_agent() {
        let states = [AgentState::new(0.0, 0.0, 0.0, 1.0), AgentState::new(5.0, 5.0, PI, 2.0)];
        let forces = [ForcePair::default(), ForcePair { dv: 1.0, dpsi: 0.0 }];
        let next = integrate_step(&states, &forces, 1.0);
        assert_eq!(next[0], states[0].advance(forces[0], 1.0));
        assert_eq!(next[1], states[1].advance(forces[1], 1.0));
    }

    #[test]
    fn param_validation() {
        assert!(ModelParams::default().validate().is_ok());
        let bad = ModelParams { gamma: -1.0, ..Default::default() };
        assert_eq!(bad.validate().unwrap_err().field, "gamma");
        let odd = ModelParams { n_ret: 321, ..Default::default() };
        assert_eq!(odd.validate().unwrap_err().field, "n_ret");
        let fov = ModelParams { fov_fraction: 1.5, ..Default::default() };
        assert_eq!(fov.validate().unwrap_err().field, "fov_fraction");
    }

    #[test]
    fn equilibrium_without_edge_term_has_no_crossing() {
        let p = ModelParams { alpha1: 0.0, beta1: 0.0, ..Default::default() };
        assert!(matches!(
            find_equilibrium_distance(Axis::FrontBack, &p),
            Err(ModelError::NoSignChange { .. })
        ));
        assert!(matches!(
            find_equilibrium_distance(Axis::LeftRight, &p),
            Err(ModelError::NoSignChange { .. })
        ));
    }
}
