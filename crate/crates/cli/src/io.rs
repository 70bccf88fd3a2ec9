//! Trajectory files.
//!
//! CSV: header `t,agent_id,x,y,psi,v`, one row per agent per recorded step.
//!
//! Binary (little endian): the 8-byte magic `VFLKTRAJ`, a `u32` format
//! version, a `u32` agent count and a `u64` record count, then for every
//! record a `u64` step followed by `x, y, psi, v` as `f64` for each agent.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use visflock_core::{AgentState, Record, Trajectory};

pub const BINARY_MAGIC: &[u8; 8] = b"VFLKTRAJ";
pub const BINARY_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed trajectory: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryFormat {
    Csv,
    Binary,
}

impl std::str::FromStr for TrajectoryFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TrajectoryFormat::Csv),
            "binary" => Ok(TrajectoryFormat::Binary),
            other => Err(format!("unknown format `{other}` (expected csv or binary)")),
        }
    }
}

impl TrajectoryFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TrajectoryFormat::Csv => "csv",
            TrajectoryFormat::Binary => "bin",
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    t: u64,
    agent_id: usize,
    x: f64,
    y: f64,
    psi: f64,
    v: f64,
}

pub fn write_csv<W: Write>(trajectory: &Trajectory, out: W) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    for rec in &trajectory.records {
        for (agent_id, s) in rec.states.iter().enumerate() {
            w.serialize(Row {
                t: rec.t,
                agent_id,
                x: s.x,
                y: s.y,
                psi: s.psi,
                v: s.v,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Trajectory, FormatError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut records: Vec<Record> = Vec::new();
    for row in reader.deserialize() {
        let row: Row = row?;
        let state = AgentState {
            x: row.x,
            y: row.y,
            psi: row.psi,
            v: row.v,
        };
        match records.last_mut() {
            Some(last) if last.t == row.t => {
                if row.agent_id != last.states.len() {
                    return Err(FormatError::Malformed(format!(
                        "t = {}: expected agent {}, found {}",
                        row.t,
                        last.states.len(),
                        row.agent_id
                    )));
                }
                last.states.push(state);
            }
            last => {
                if let Some(prev) = last {
                    if row.t < prev.t {
                        return Err(FormatError::Malformed(format!(
                            "steps must increase, {} follows {}",
                            row.t, prev.t
                        )));
                    }
                }
                if row.agent_id != 0 {
                    return Err(FormatError::Malformed(format!(
                        "t = {}: first agent id is {}",
                        row.t, row.agent_id
                    )));
                }
                records.push(Record {
                    t: row.t,
                    states: vec![state],
                });
            }
        }
    }
    let trajectory = Trajectory { records };
    check_shape(&trajectory)?;
    Ok(trajectory)
}

fn check_shape(trajectory: &Trajectory) -> Result<(), FormatError> {
    let n = trajectory.n_agents();
    if trajectory.records.is_empty() {
        return Err(FormatError::Malformed("no records".into()));
    }
    for pair in trajectory.records.windows(2) {
        if pair[1].t <= pair[0].t {
            return Err(FormatError::Malformed(format!(
                "steps must increase, {} follows {}",
                pair[1].t, pair[0].t
            )));
        }
    }
    if let Some(r) = trajectory.records.iter().find(|r| r.states.len() != n) {
        return Err(FormatError::Malformed(format!(
            "t = {} has {} agents, expected {n}",
            r.t,
            r.states.len()
        )));
    }
    Ok(())
}

pub fn write_binary<W: Write>(trajectory: &Trajectory, mut out: W) -> Result<(), FormatError> {
    let n = trajectory.n_agents();
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&BINARY_VERSION.to_le_bytes())?;
    out.write_all(&(n as u32).to_le_bytes())?;
    out.write_all(&(trajectory.records.len() as u64).to_le_bytes())?;
    for rec in &trajectory.records {
        out.write_all(&rec.t.to_le_bytes())?;
        for s in &rec.states {
            for v in [s.x, s.y, s.psi, s.v] {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Trajectory, FormatError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(FormatError::Malformed("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != BINARY_VERSION {
        return Err(FormatError::Malformed(format!("unsupported version {version}")));
    }
    input.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b8)?;
    let n_records = u64::from_le_bytes(b8);
    let mut records = Vec::new();
    for _ in 0..n_records {
        input.read_exact(&mut b8)?;
        let t = u64::from_le_bytes(b8);
        let mut states = Vec::with_capacity(n);
        for _ in 0..n {
            let mut vals = [0.0f64; 4];
            for v in &mut vals {
                input.read_exact(&mut b8)?;
                *v = f64::from_le_bytes(b8);
            }
            states.push(AgentState {
                x: vals[0],
                y: vals[1],
                psi: vals[2],
                v: vals[3],
            });
        }
        records.push(Record { t, states });
    }
    let trajectory = Trajectory { records };
    check_shape(&trajectory)?;
    Ok(trajectory)
}

/// Reads either format, detected from the leading bytes.
pub fn read_trajectory(bytes: &[u8]) -> Result<Trajectory, FormatError> {
    if bytes.starts_with(BINARY_MAGIC) {
        read_binary(bytes)
    } else {
        read_csv(bytes)
    }
}

pub fn write_trajectory<W: Write>(
    trajectory: &Trajectory,
    format: TrajectoryFormat,
    out: W,
) -> Result<(), FormatError> {
    match format {
        TrajectoryFormat::Csv => write_csv(trajectory, out),
        TrajectoryFormat::Binary => write_binary(trajectory, out),
    }
}

#[derive(Debug, Deserialize)]
struct SceneRow {
    x: f64,
    y: f64,
    psi: f64,
    #[serde(default)]
    v: Option<f64>,
}

/// Scene file for the `vpf` subcommand: CSV with header `x,y,psi[,v]`.
pub fn read_scene<R: Read>(input: R, default_speed: f64) -> Result<Vec<AgentState>, FormatError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut states = Vec::new();
    for row in reader.deserialize() {
        let row: SceneRow = row?;
        states.push(AgentState::new(row.x, row.y, row.psi, row.v.unwrap_or(default_speed)));
    }
    if states.is_empty() {
        return Err(FormatError::Malformed("scene has no agents".into()));
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_trajectory() -> impl Strategy<Value = Trajectory> {
        (1usize..5, 1usize..6).prop_flat_map(|(n, frames)| {
            prop::collection::vec(
                prop::collection::vec(
                    (-1e3f64..1e3, -1e3f64..1e3, 0.0f64..6.28, -5.0f64..5.0),
                    n,
                ),
                frames,
            )
            .prop_map(|frames| Trajectory {
                records: frames
                    .into_iter()
                    .enumerate()
                    .map(|(i, states)| Record {
                        t: 3 * i as u64,
                        states: states
                            .into_iter()
                            .map(|(x, y, psi, v)| AgentState { x, y, psi, v })
                            .collect(),
                    })
                    .collect(),
            })
        })
    }

    proptest! {
        #[test]
        fn both_formats_round_trip(traj in arb_trajectory()) {
            let mut csv_bytes = Vec::new();
            write_csv(&traj, &mut csv_bytes).unwrap();
            prop_assert_eq!(read_trajectory(&csv_bytes).unwrap(), traj.clone());
            let mut bin = Vec::new();
            write_binary(&traj, &mut bin).unwrap();
            prop_assert_eq!(read_trajectory(&bin).unwrap(), traj);
        }
    }

    #[test]
    fn csv_header() {
        let traj = Trajectory {
            records: vec![Record { t: 0, states: vec![AgentState { x: 1.0, y: 2.0, psi: 0.5, v: 1.0 }] }],
        };
        let mut out = Vec::new();
        write_csv(&traj, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "t,agent_id,x,y,psi,v\n0,0,1.0,2.0,0.5,1.0\n");
    }

    #[test]
    fn malformed_inputs() {
        let skipped = "t,agent_id,x,y,psi,v\n0,0,1,1,0,1\n0,2,1,1,0,1\n";
        assert!(matches!(read_csv(skipped.as_bytes()), Err(FormatError::Malformed(_))));
        let ragged = "t,agent_id,x,y,psi,v\n0,0,1,1,0,1\n0,1,1,1,0,1\n1,0,1,1,0,1\n";
        assert!(matches!(read_csv(ragged.as_bytes()), Err(FormatError::Malformed(_))));
        let backwards = "t,agent_id,x,y,psi,v\n5,0,1,1,0,1\n2,0,1,1,0,1\n";
        assert!(matches!(read_csv(backwards.as_bytes()), Err(FormatError::Malformed(_))));
        assert!(read_csv("t,agent_id,x,y,psi,v\n".as_bytes()).is_err());
        let mut bad = BINARY_MAGIC.to_vec();
        bad.extend_from_slice(&7u32.to_le_bytes());
        assert!(read_trajectory(&bad).is_err());
    }

    #[test]
    fn scene_speed_defaults() {
        let s = read_scene("x,y,psi\n1,2,0.5\n".as_bytes(), 1.0).unwrap();
        assert_eq!(s, vec![AgentState::new(1.0, 2.0, 0.5, 1.0)]);
        let s = read_scene("x,y,psi,v\n1,2,0.5,3\n".as_bytes(), 1.0).unwrap();
        assert_eq!(s[0].v, 3.0);
    }
}
