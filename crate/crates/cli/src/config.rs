//! `KEY=VALUE` configuration files.
//!
//! Keys are the simulation framework's variable names (`VF_ALP0`,
//! `AGENT_FOV`, ...) plus harness keys. Missing keys keep their defaults;
//! unknown or repeated keys are rejected. `#` starts a comment.

use std::fmt::Write as _;

use thiserror::Error;
use visflock_core::model::ParamError;
use visflock_core::{Arena, Boundary, InitMode, SimConfig, WallTurn};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("out of range: {0}")]
    Range(#[from] ParamError),
}

const KEYS: &[&str] = &[
    "ENV_WIDTH",
    "ENV_HEIGHT",
    "VISUAL_FIELD_RESOLUTION",
    "RADIUS_AGENT",
    "VF_GAM",
    "VF_V0",
    "VF_ALP0",
    "VF_ALP1",
    "VF_BET0",
    "VF_BET1",
    "AGENT_FOV",
    "T",
    "N",
    "BOUNDARY",
    "VISION_RANGE",
    "SEED",
    "DT",
    "RECORD_STRIDE",
    "INIT",
    "WALL_TURN",
];

fn value<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| ConfigError::Parse {
        line,
        message: format!("invalid value `{raw}` for {key}: {e}"),
    })
}

/// Parses a configuration file on top of [`SimConfig::default`].
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut config = SimConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, raw) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected KEY=VALUE, got `{content}`"),
        })?;
        let key = key.trim();
        let raw = raw.trim();
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        };
        if seen.contains(&known) {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        seen.push(known);

        let p = &mut config.params;
        match known {
            "ENV_WIDTH" => config.arena.width = value(line, key, raw)?,
            "ENV_HEIGHT" => config.arena.height = value(line, key, raw)?,
            "VISUAL_FIELD_RESOLUTION" => p.n_ret = value(line, key, raw)?,
            "RADIUS_AGENT" => p.radius = value(line, key, raw)?,
            "VF_GAM" => p.gamma = value(line, key, raw)?,
            "VF_V0" => p.v0 = value(line, key, raw)?,
            "VF_ALP0" => p.alpha0 = value(line, key, raw)?,
            "VF_ALP1" => p.alpha1 = value(line, key, raw)?,
            "VF_BET0" => p.beta0 = value(line, key, raw)?,
            "VF_BET1" => p.beta1 = value(line, key, raw)?,
            "AGENT_FOV" => p.fov_fraction = value(line, key, raw)?,
            "VISION_RANGE" => p.vision_range = value(line, key, raw)?,
            "T" => config.t_max = value(line, key, raw)?,
            "N" => config.n_agents = value(line, key, raw)?,
            "BOUNDARY" => config.arena.boundary = value::<Boundary>(line, key, raw)?,
            "SEED" => config.seed = value(line, key, raw)?,
            "DT" => config.dt = value(line, key, raw)?,
            "RECORD_STRIDE" => config.record_stride = value(line, key, raw)?,
            "INIT" => {
                config.init = match raw {
                    "uniform" => InitMode::Uniform,
                    "polarized" => InitMode::Polarized,
                    _ => {
                        return Err(ConfigError::Parse {
                            line,
                            message: format!("INIT must be uniform or polarized, got `{raw}`"),
                        })
                    }
                }
            }
            "WALL_TURN" => {
                config.wall_turn = match raw {
                    "fixed" => WallTurn::Fixed,
                    "seeded" => WallTurn::Seeded,
                    _ => {
                        return Err(ConfigError::Parse {
                            line,
                            message: format!("WALL_TURN must be fixed or seeded, got `{raw}`"),
                        })
                    }
                }
            }
            _ => unreachable!("every listed key is handled"),
        }
    }
    config.validate()?;
    Ok(config)
}

/// Renders every key; `parse_config(&render_config(c)) == c`.
pub fn render_config(config: &SimConfig) -> String {
    let p = &config.params;
    let Arena {
        width,
        height,
        boundary,
    } = config.arena;
    let mut out = String::new();
    let mut line = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(out, "{k}={v}");
    };
    line("ENV_WIDTH", &width);
    line("ENV_HEIGHT", &height);
    line("VISUAL_FIELD_RESOLUTION", &p.n_ret);
    line("RADIUS_AGENT", &p.radius);
    line("VF_GAM", &p.gamma);
    line("VF_V0", &p.v0);
    line("VF_ALP0", &p.alpha0);
    line("VF_ALP1", &p.alpha1);
    line("VF_BET0", &p.beta0);
    line("VF_BET1", &p.beta1);
    line("AGENT_FOV", &p.fov_fraction);
    line("T", &config.t_max);
    line("N", &config.n_agents);
    line("BOUNDARY", &boundary);
    line("VISION_RANGE", &p.vision_range);
    line("SEED", &config.seed);
    line("DT", &config.dt);
    line("RECORD_STRIDE", &config.record_stride);
    line(
        "INIT",
        &match config.init {
            InitMode::Uniform => "uniform",
            InitMode::Polarized => "polarized",
        },
    );
    line(
        "WALL_TURN",
        &match config.wall_turn {
            WallTurn::Fixed => "fixed",
            WallTurn::Seeded => "seeded",
        },
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TABLE_DEFAULTS: &str = "\
# fixed simulation parameters
ENV_WIDTH=900
ENV_HEIGHT=900
VISUAL_FIELD_RESOLUTION=320
RADIUS_AGENT=5.5
VF_GAM=0.1
VF_V0=1
VF_ALP1=0.09
VF_BET1=0.09
T=20000
N=10
BOUNDARY=torus
VISION_RANGE=2000
";

    #[test]
    fn table_defaults() {
        let c = parse_config(TABLE_DEFAULTS).unwrap();
        let p = c.params;
        assert_eq!((p.gamma, p.v0, p.alpha1, p.beta1, p.radius), (0.1, 1.0, 0.09, 0.09, 5.5));
        assert_eq!(p.n_ret, 320);
        assert_eq!(p.vision_range, 2000.0);
        assert_eq!((c.arena.width, c.arena.height), (900.0, 900.0));
        assert_eq!(c.arena.boundary, Boundary::Periodic);
        assert_eq!((c.n_agents, c.t_max), (10, 20_000));
    }

    #[test]
    fn fov_is_a_fraction_of_the_circle() {
        let c = parse_config("AGENT_FOV=0.5").unwrap();
        assert_eq!(c.params.fov_half(), PI / 2.0);
    }

    #[test]
    fn negative_gamma_is_a_range_error() {
        assert!(matches!(parse_config("VF_GAM=-1"), Err(ConfigError::Range(e)) if e.field == "gamma"));
        assert!(matches!(parse_config("VISUAL_FIELD_RESOLUTION=7"), Err(ConfigError::Range(_))));
        assert!(matches!(parse_config("DT=0"), Err(ConfigError::Range(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config("N=10\n\nFOO=1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }), "{err}");
        let err = parse_config("N=10\nN=11").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
        let err = parse_config("N=ten").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
        let err = parse_config("BOUNDARY=box").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
        let err = parse_config("just text").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
    }

    #[test]
    fn comments_and_whitespace() {
        let c = parse_config("  VF_ALP0 = 1.25   # speed response\nBOUNDARY=walls").unwrap();
        assert_eq!(c.params.alpha0, 1.25);
        assert_eq!(c.arena.boundary, Boundary::Reflective);
    }

    #[test]
    fn default_round_trip() {
        let c = SimConfig::default();
        assert_eq!(parse_config(&render_config(&c)).unwrap(), c);
    }
}
