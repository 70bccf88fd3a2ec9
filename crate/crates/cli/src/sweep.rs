//! Parameter sweeps over (α₀, β₀, FOV) grids.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use visflock_core::engine::derive_seed;
use visflock_core::metrics::{summarize, WindowSummary};
use visflock_core::{EngineError, MetricsRecord, SimConfig, Simulation};

pub const DEFAULT_ALPHA0: &[f64] = &[0.0, 0.5, 1.0, 1.5, 2.0];
pub const DEFAULT_BETA0: &[f64] = &[0.0, 1.0, 2.0, 3.0, 4.0];
pub const DEFAULT_FOV: &[f64] = &[0.25, 0.5, 0.75, 1.0];
pub const DEFAULT_REPETITIONS: usize = 20;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("{0} must not be empty")]
    EmptyAxis(&'static str),
    #[error("repetitions must be >= 1")]
    NoRepetitions,
    #[error("window must lie in (0, 1], got {0}")]
    BadWindow(f64),
    #[error("invalid base configuration: {0}")]
    Base(#[from] visflock_core::ParamError),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub alpha0_values: Vec<f64>,
    pub beta0_values: Vec<f64>,
    pub fov_fractions: Vec<f64>,
    pub repetitions: usize,
    pub base: SimConfig,
    /// Trailing fraction of the run used for summaries.
    pub window: f64,
}

impl SweepSpec {
    pub fn new(base: SimConfig) -> Self {
        SweepSpec {
            alpha0_values: DEFAULT_ALPHA0.to_vec(),
            beta0_values: DEFAULT_BETA0.to_vec(),
            fov_fractions: DEFAULT_FOV.to_vec(),
            repetitions: DEFAULT_REPETITIONS,
            base,
            window: 0.25,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.alpha0_values.is_empty() {
            return Err(SweepError::EmptyAxis("alpha0_values"));
        }
        if self.beta0_values.is_empty() {
            return Err(SweepError::EmptyAxis("beta0_values"));
        }
        if self.fov_fractions.is_empty() {
            return Err(SweepError::EmptyAxis("fov_fractions"));
        }
        if self.repetitions < 1 {
            return Err(SweepError::NoRepetitions);
        }
        if !(self.window > 0.0 && self.window <= 1.0) {
            return Err(SweepError::BadWindow(self.window));
        }
        // every cell must be a valid configuration
        for &a in &self.alpha0_values {
            for &b in &self.beta0_values {
                for &f in &self.fov_fractions {
                    self.cell_config(a, b, f, 0).validate()?;
                }
            }
        }
        Ok(())
    }

    /// Cells in grid order: FOV outermost, then α₀, then β₀.
    pub fn cells(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for &f in &self.fov_fractions {
            for &a in &self.alpha0_values {
                for &b in &self.beta0_values {
                    out.push((a, b, f));
                }
            }
        }
        out
    }

    /// Repetition `rep` uses the same derived seed in every cell.
    pub fn cell_config(&self, alpha0: f64, beta0: f64, fov: f64, rep: usize) -> SimConfig {
        let mut c = self.base;
        c.params.alpha0 = alpha0;
        c.params.beta0 = beta0;
        c.params.fov_fraction = fov;
        c.seed = derive_seed(self.base.seed, rep as u64);
        c
    }
}

/// Runs one simulation, computing metrics only on recorded frames inside
/// the trailing window.
pub fn run_windowed(config: &SimConfig, window: f64) -> Result<WindowSummary, EngineError> {
    let mut sim = Simulation::new(*config)?;
    let stride = config.record_stride;
    let last = config.t_max - config.t_max % stride;
    let t_start = ((1.0 - window.clamp(0.0, 1.0)) * last as f64).ceil() as u64;
    let radius = config.params.radius;
    let mut records = Vec::new();
    let mut observe = |sim: &Simulation| {
        let t = sim.t();
        if t % stride == 0 && t >= t_start {
            records.push(MetricsRecord::compute(t, sim.states(), &config.arena, radius));
        }
    };
    observe(&sim);
    while sim.t() < config.t_max {
        sim.step()?;
        observe(&sim);
    }
    let mut summary = summarize(&records, config.n_agents, 1.0, None);
    summary.window_fraction = window;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub alpha0: f64,
    pub beta0: f64,
    pub fov: f64,
    pub rep: usize,
    pub seed: u64,
    pub result: Result<WindowSummary, String>,
}

impl RunOutcome {
    pub fn polarization(&self) -> f64 {
        self.mean_of(|s| s.polarization.map(|m| m.mean))
    }
    pub fn mean_iid(&self) -> f64 {
        self.mean_of(|s| s.mean_iid.map(|m| m.mean))
    }
    pub fn circularity(&self) -> f64 {
        self.mean_of(|s| s.circularity.map(|m| m.mean))
    }
    pub fn n_clus_max(&self) -> f64 {
        self.mean_of(|s| s.n_clus_max.map(|m| m.mean))
    }
    /// Median of the largest cluster size over the window frames.
    pub fn n_clus_max_median(&self) -> f64 {
        self.mean_of(|s| s.n_clus_max.map(|m| m.median))
    }
    pub fn overlap_ratio(&self) -> f64 {
        self.mean_of(|s| Some(s.overlap_ratio))
    }

    fn mean_of(&self, f: impl Fn(&WindowSummary) -> Option<f64>) -> f64 {
        self.result.as_ref().ok().and_then(f).unwrap_or(f64::NAN)
    }
}

/// Mean over the successful repetitions of one cell; NaN when none
/// succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAggregate {
    pub alpha0: f64,
    pub beta0: f64,
    pub fov: f64,
    pub reps_ok: usize,
    pub reps_failed: usize,
    pub polarization: f64,
    pub mean_iid: f64,
    pub circularity: f64,
    pub n_clus_max: f64,
    pub overlap_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub runs: Vec<RunOutcome>,
    pub cells: Vec<CellAggregate>,
}

fn nan_mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .filter(|v| !v.is_nan())
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn aggregate(runs: &[RunOutcome]) -> CellAggregate {
    let ok: Vec<&RunOutcome> = runs.iter().filter(|r| r.result.is_ok()).collect();
    CellAggregate {
        alpha0: runs[0].alpha0,
        beta0: runs[0].beta0,
        fov: runs[0].fov,
        reps_ok: ok.len(),
        reps_failed: runs.len() - ok.len(),
        polarization: nan_mean(ok.iter().map(|r| r.polarization())),
        mean_iid: nan_mean(ok.iter().map(|r| r.mean_iid())),
        circularity: nan_mean(ok.iter().map(|r| r.circularity())),
        n_clus_max: nan_mean(ok.iter().map(|r| r.n_clus_max())),
        overlap_ratio: nan_mean(ok.iter().map(|r| r.overlap_ratio())),
    }
}

/// Runs every repetition of every cell on `workers` threads (0 lets rayon
/// choose). Results are ordered by grid index and repetition.
pub fn sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult, SweepError> {
    use rayon::prelude::*;

    spec.validate()?;
    let jobs: Vec<(f64, f64, f64, usize)> = spec
        .cells()
        .into_iter()
        .flat_map(|(a, b, f)| (0..spec.repetitions).map(move |r| (a, b, f, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let runs: Vec<RunOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(alpha0, beta0, fov, rep)| {
                let config = spec.cell_config(alpha0, beta0, fov, rep);
                RunOutcome {
                    alpha0,
                    beta0,
                    fov,
                    rep,
                    seed: config.seed,
                    result: run_windowed(&config, spec.window).map_err(|e| e.to_string()),
                }
            })
            .collect()
    });
    let cells = runs.chunks(spec.repetitions).map(aggregate).collect();
    Ok(SweepResult { runs, cells })
}

#[derive(Serialize)]
struct DetailRow<'a> {
    alpha0: f64,
    beta0: f64,
    fov: f64,
    rep: usize,
    seed: u64,
    status: &'a str,
    #[serde(rename = "P")]
    p: f64,
    #[serde(rename = "D_mean")]
    d_mean: f64,
    #[serde(rename = "RCA")]
    rca: f64,
    #[serde(rename = "N_clus_max")]
    n_clus_max: f64,
    #[serde(rename = "R_o_sim")]
    r_o: f64,
}

pub fn write_detail_csv<W: Write>(runs: &[RunOutcome], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in runs {
        w.serialize(DetailRow {
            alpha0: r.alpha0,
            beta0: r.beta0,
            fov: r.fov,
            rep: r.rep,
            seed: r.seed,
            status: if r.result.is_ok() { "ok" } else { "failed" },
            p: r.polarization(),
            d_mean: r.mean_iid(),
            rca: r.circularity(),
            n_clus_max: r.n_clus_max(),
            r_o: r.overlap_ratio(),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// One row of the aggregate table as written to and read from CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub alpha0: f64,
    pub beta0: f64,
    pub fov: f64,
    pub reps_ok: usize,
    pub reps_failed: usize,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "D_mean")]
    pub d_mean: f64,
    #[serde(rename = "RCA")]
    pub rca: f64,
    #[serde(rename = "N_clus_max")]
    pub n_clus_max: f64,
    #[serde(rename = "R_o_sim")]
    pub r_o: f64,
}

impl From<&CellAggregate> for AggregateRow {
    fn from(c: &CellAggregate) -> Self {
        AggregateRow {
            alpha0: c.alpha0,
            beta0: c.beta0,
            fov: c.fov,
            reps_ok: c.reps_ok,
            reps_failed: c.reps_failed,
            p: c.polarization,
            d_mean: c.mean_iid,
            rca: c.circularity,
            n_clus_max: c.n_clus_max,
            r_o: c.overlap_ratio,
        }
    }
}

pub fn write_aggregate_csv<W: Write>(cells: &[CellAggregate], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in cells {
        w.serialize(AggregateRow::from(c))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate_csv<R: std::io::Read>(input: R) -> csv::Result<Vec<AggregateRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SweepSpec {
        let base = SimConfig {
            n_agents: 4,
            t_max: 60,
            record_stride: 5,
            ..Default::default()
        };
        SweepSpec {
            alpha0_values: vec![1.0],
            beta0_values: vec![0.5],
            fov_fractions: vec![1.0],
            repetitions: 2,
            base,
            window: 0.5,
        }
    }

    #[test]
    fn one_cell_two_reps() {
        let r = sweep(&tiny(), 1).unwrap();
        assert_eq!(r.runs.len(), 2);
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.cells[0].reps_ok, 2);
        let mut detail = Vec::new();
        write_detail_csv(&r.runs, &mut detail).unwrap();
        assert_eq!(String::from_utf8(detail).unwrap().lines().count(), 3);
        let mut agg = Vec::new();
        write_aggregate_csv(&r.cells, &mut agg).unwrap();
        assert_eq!(read_aggregate_csv(agg.as_slice()).unwrap().len(), 1);
    }

    #[test]
    fn repetitions_share_seeds_across_cells() {
        let spec = SweepSpec {
            alpha0_values: vec![0.5, 1.0],
            ..tiny()
        };
        let r = sweep(&spec, 2).unwrap();
        assert_eq!(r.runs[0].seed, r.runs[2].seed);
        assert_ne!(r.runs[0].seed, r.runs[1].seed);
    }

    #[test]
    fn window_covers_the_tail() {
        let c = tiny().base;
        let s = run_windowed(&c, 0.5).unwrap();
        assert_eq!((s.t_start, s.t_end, s.frames), (30, 60, 7));
        let s = run_windowed(&c, 1.0).unwrap();
        assert_eq!(s.frames, 13);
    }

    #[test]
    fn invalid_specs() {
        let mut s = tiny();
        s.beta0_values.clear();
        assert!(matches!(s.validate(), Err(SweepError::EmptyAxis("beta0_values"))));
        let mut s = tiny();
        s.repetitions = 0;
        assert!(matches!(s.validate(), Err(SweepError::NoRepetitions)));
        let mut s = tiny();
        s.fov_fractions = vec![1.5];
        assert!(matches!(s.validate(), Err(SweepError::Base(_))));
    }

    #[test]
    fn failed_runs_are_flagged_not_fatal() {
        let runs = vec![
            RunOutcome {
                alpha0: 1.0,
                beta0: 1.0,
                fov: 1.0,
                rep: 0,
                seed: 1,
                result: Err("boom".into()),
            },
        ];
        let agg = aggregate(&runs);
        assert_eq!((agg.reps_ok, agg.reps_failed), (0, 1));
        assert!(agg.polarization.is_nan());
        let mut out = Vec::new();
        write_detail_csv(&runs, &mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().contains(",failed,NaN,"));
    }
}
