//! Arena boundaries: periodic wrapping and reflective walls.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::angle::wrap_2pi;
use crate::model::{AgentState, ParamError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Torus: leaving one side re-enters on the opposite side.
    Periodic,
    /// Walls at `x = 0, W` and `y = 0, H`.
    Reflective,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "torus",
            Boundary::Reflective => "walls",
        })
    }
}

impl FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "torus" => Ok(Boundary::Periodic),
            "walls" => Ok(Boundary::Reflective),
            other => Err(format!("unknown boundary `{other}` (expected torus or walls)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
    pub boundary: Boundary,
}

impl Arena {
    pub fn new(width: f64, height: f64, boundary: Boundary) -> Self {
        Arena {
            width,
            height,
            boundary,
        }
    }

    pub fn torus(width: f64, height: f64) -> Self {
        Self::new(width, height, Boundary::Periodic)
    }

    pub fn walls(width: f64, height: f64) -> Self {
        Self::new(width, height, Boundary::Reflective)
    }

    /// Open plane without images; used for isolated geometry checks.
    pub fn unbounded() -> Self {
        Self::new(f64::INFINITY, f64::INFINITY, Boundary::Reflective)
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.height).contains(&y)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.width > 0.0) {
            return Err(ParamError::new("width", format!("must be > 0, got {}", self.width)));
        }
        if !(self.height > 0.0) {
            return Err(ParamError::new("height", format!("must be > 0, got {}", self.height)));
        }
        Ok(())
    }

    /// Displacement `b − a`, using the minimal image on a torus.
    pub fn displacement(&self, a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
        let mut dx = b.0 - a.0;
        let mut dy = b.1 - a.1;
        if self.is_periodic() {
            dx -= self.width * (dx / self.width).round();
            dy -= self.height * (dy / self.height).round();
        }
        (dx, dy)
    }

    pub fn distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let (dx, dy) = self.displacement(a, b);
        dx.hypot(dy)
    }
}

/// Maps a position into `[0, W) × [0, H)`.
pub fn wrap_periodic(pos: (f64, f64), arena: &Arena) -> (f64, f64) {
    fn wrap(v: f64, len: f64) -> f64 {
        let r = v.rem_euclid(len);
        if r >= len {
            0.0
        } else {
            r
        }
    }
    (wrap(pos.0, arena.width), wrap(pos.1, arena.height))
}

/// Order in which the two orthogonal wall reflections are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnPreference {
    /// `ψ + π/2` before `ψ − π/2`.
    LeftFirst,
    RightFirst,
}

/// Applies the wall rule to a tentative update.
///
/// `prev` is the state at `t`; `tentative` is the vision-driven update
/// (new speed, heading and position). If the tentative position is inside
/// the arena it is returned as is. Otherwise the heading is replaced by
/// `ψ(t) ± π/2` (in `preference` order), or `ψ(t) + π` when neither keeps
/// the agent inside, and the displacement is recomputed with the new
/// heading and the updated signed speed. If even the reversal overshoots
/// (speed larger than the arena), the position is clamped to the walls.
pub fn reflect_if_needed(
    prev: &AgentState,
    tentative: &AgentState,
    arena: &Arena,
    dt: f64,
    preference: TurnPreference,
) -> AgentState {
    if arena.contains(tentative.x, tentative.y) {
        return *tentative;
    }
    let (first, second) = match preference {
        TurnPreference::LeftFirst => (FRAC_PI_2, -FRAC_PI_2),
        TurnPreference::RightFirst => (-FRAC_PI_2, FRAC_PI_2),
    };
    let moved = |offset: f64| {
        let psi = wrap_2pi(prev.psi + offset);
        AgentState {
            x: prev.x + tentative.v * psi.cos() * dt,
            y: prev.y + tentative.v * psi.sin() * dt,
            psi,
            v: tentative.v,
        }
    };
    for offset in [first, second, PI] {
        let candidate = moved(offset);
        if arena.contains(candidate.x, candidate.y) {
            return candidate;
        }
    }
    let mut reversed = moved(PI);
    reversed.x = reversed.x.clamp(0.0, arena.width);
    reversed.y = reversed.y.clamp(0.0, arena.height);
    reversed
}
