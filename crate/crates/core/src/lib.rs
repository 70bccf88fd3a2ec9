//! Vision-based collective motion.
//!
//! Agents are discs that see each other only through a one-dimensional
//! binary retina (the visual projection field). Social acceleration and
//! turning are computed from the blobs on that retina, masked by `cos` and
//! `sin` so that front/back and left/right are distinguished. The crate
//! contains the force model, the perception pipeline that builds retinas
//! from world geometry, periodic and reflective boundaries, the simulation
//! engine and the swarm metrics used to summarize runs.

pub mod angle;
pub mod engine;
pub mod environment;
pub mod metrics;
pub mod model;
pub mod perception;

pub use engine::{
    init_population, run, step, EngineError, InitMode, Record, SimConfig, Simulation, Trajectory,
    WallTurn,
};
pub use environment::{reflect_if_needed, wrap_periodic, Arena, Boundary};
pub use metrics::{
    circularity, cluster_robot, cluster_sim, mean_iid, overlap_ratio, polarization, Clustering,
    MetricsError, MetricsRecord,
};
pub use model::{
    field_derivative, find_equilibrium_distance, individual_force, integrate_step, social_forces,
    AgentState, Axis, ForcePair, ModelError, ModelParams, ParamError, Retina,
};
pub use perception::{
    angular_interval, apply_visibility_cutoff, build_vpf, limit_fov, nearest_torus_image,
    rasterize, vpf_from_boxes, BlobInterval, DetectionBox, PerceptionError, VisualField,
};
