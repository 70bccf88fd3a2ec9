//! Command-line harness for the visual flocking model: configuration files,
//! trajectory I/O, trajectory analysis, parameter sweeps and SVG heatmaps.

pub mod analyze;
pub mod config;
pub mod heatmap;
pub mod io;
pub mod sweep;
