//! Simulation loop: seeded initialization, the synchronous
//! perception → force → integration → boundary update, and trajectory
//! recording.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{reflect_if_needed, wrap_periodic, Arena, Boundary, TurnPreference};
use crate::model::{individual_force, AgentState, ForcePair, ModelParams, ParamError, Retina};
use crate::perception::{build_vpf, PerceptionError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    InvalidConfig(#[from] ParamError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error("agent {agent} reached a non-finite state at t = {t}")]
    NonFinite { t: u64, agent: usize },
}

/// Initial heading distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Independent uniform headings.
    #[default]
    Uniform,
    /// One shared, randomly drawn heading.
    Polarized,
}

/// Which orthogonal reflection a wall hit tries first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallTurn {
    /// Always `ψ + π/2` first.
    #[default]
    Fixed,
    /// Coin flip derived from `(seed, t, agent)`.
    Seeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub arena: Arena,
    pub n_agents: usize,
    pub t_max: u64,
    pub dt: f64,
    pub seed: u64,
    pub record_stride: u64,
    pub init: InitMode,
    pub wall_turn: WallTurn,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            params: ModelParams::default(),
            arena: Arena::torus(900.0, 900.0),
            n_agents: 10,
            t_max: 20_000,
            dt: 1.0,
            seed: 0,
            record_stride: 10,
            init: InitMode::Uniform,
            wall_turn: WallTurn::Fixed,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ParamError> {
        self.params.validate()?;
        self.arena.validate()?;
        if !self.arena.width.is_finite() || !self.arena.height.is_finite() {
            return Err(ParamError::new("arena", "simulation arenas must be finite"));
        }
        if self.n_agents < 1 {
            return Err(ParamError::new("n_agents", "at least one agent is required"));
        }
        if self.t_max < 1 {
            return Err(ParamError::new("t_max", "at least one step is required"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ParamError::new("dt", format!("must be > 0, got {}", self.dt)));
        }
        if self.record_stride < 1 {
            return Err(ParamError::new("record_stride", "must be >= 1"));
        }
        Ok(())
    }
}

/// Seed of run `run_index` in a family of runs sharing `master` seed; each
/// run draws from its own ChaCha stream.
pub fn derive_seed(master: u64, run_index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(run_index);
    rng.next_u64()
}

/// Uniform positions and (by default) uniform headings, all at the
/// preferred speed. Exactly coincident agents are re-drawn.
pub fn init_population(config: &SimConfig) -> Vec<AgentState> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let arena = &config.arena;
    let shared_heading = rng.random_range(0.0..std::f64::consts::TAU);
    let mut states: Vec<AgentState> = Vec::with_capacity(config.n_agents);
    while states.len() < config.n_agents {
        let x = rng.random_range(0.0..arena.width);
        let y = rng.random_range(0.0..arena.height);
        let psi = match config.init {
            InitMode::Uniform => rng.random_range(0.0..std::f64::consts::TAU),
            InitMode::Polarized => shared_heading,
        };
        if states.iter().any(|s| arena.distance(s.position(), (x, y)) == 0.0) {
            continue;
        }
        states.push(AgentState::new(x, y, psi, config.params.v0));
    }
    states
}

fn turn_preference(config: &SimConfig, t: u64, agent: usize) -> TurnPreference {
    match config.wall_turn {
        WallTurn::Fixed => TurnPreference::LeftFirst,
        WallTurn::Seeded => {
            // splitmix64 finalizer over (seed, t, agent)
            let mut z = config
                .seed
                .wrapping_add(t.wrapping_mul(0x9E37_79B9_7F4A_7C15))
                .wrapping_add((agent as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            if z & 1 == 0 {
                TurnPreference::LeftFirst
            } else {
                TurnPreference::RightFirst
            }
        }
    }
}

fn step_with(
    retina: &Retina,
    states: &[AgentState],
    config: &SimConfig,
    t: u64,
) -> Result<Vec<AgentState>, EngineError> {
    let params = &config.params;
    let arena = &config.arena;
    let mut next = Vec::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        let field = build_vpf(i, states, arena, params)?;
        let force = retina.forces(&field, params)
            + ForcePair {
                dv: individual_force(s.v, params),
                dpsi: 0.0,
            };
        let tentative = s.advance(force, config.dt);
        let updated = match arena.boundary {
            Boundary::Periodic => {
                let (x, y) = wrap_periodic(tentative.position(), arena);
                AgentState { x, y, ..tentative }
            }
            Boundary::Reflective => reflect_if_needed(
                s,
                &tentative,
                arena,
                config.dt,
                turn_preference(config, t, i),
            ),
        };
        if !updated.is_finite() {
            return Err(EngineError::NonFinite { t: t + 1, agent: i });
        }
        next.push(updated);
    }
    Ok(next)
}

/// Advances every agent by one step from the snapshot `states` taken at
/// time `t`.
pub fn step(states: &[AgentState], config: &SimConfig, t: u64) -> Result<Vec<AgentState>, EngineError> {
    step_with(&Retina::new(config.params.n_ret), states, config, t)
}

/// One recorded frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: u64,
    pub states: Vec<AgentState>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn n_agents(&self) -> usize {
        self.records.first().map_or(0, |r| r.states.len())
    }

    pub fn frames(&self) -> impl Iterator<Item = &[AgentState]> + '_ {
        self.records.iter().map(|r| r.states.as_slice())
    }
}

/// Stateful driver over one run.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    retina: Retina,
    states: Vec<AgentState>,
    t: u64,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let states = init_population(&config);
        Ok(Self::from_states(config, states))
    }

    pub fn from_states(config: SimConfig, states: Vec<AgentState>) -> Self {
        Simulation {
            retina: Retina::new(config.params.n_ret),
            config,
            states,
            t: 0,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn states(&self) -> &[AgentState] {
        &self.states
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn step(&mut self) -> Result<(), EngineError> {
        self.states = step_with(&self.retina, &self.states, &self.config, self.t)?;
        self.t += 1;
        Ok(())
    }

    /// Runs to `t_max`, recording `t = 0` and every `record_stride` steps.
    pub fn run(mut self) -> Result<Trajectory, EngineError> {
        let stride = self.config.record_stride;
        let mut records =
            Vec::with_capacity((self.config.t_max / stride + 1) as usize);
        records.push(Record {
            t: 0,
            states: self.states.clone(),
        });
        while self.t < self.config.t_max {
            self.step()?;
            if self.t % stride == 0 {
                records.push(Record {
                    t: self.t,
                    states: self.states.clone(),
                });
            }
        }
        Ok(Trajectory { records })
    }
}

/// Full run from a seeded initial population.
pub fn run(config: &SimConfig) -> Result<Trajectory, EngineError> {
    Simulation::new(*config)?.run()
}
