use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use visflock_cli::analyze::{analyze, parse_step_mask, write_metrics_csv, ClusterMode};
use visflock_cli::config::{parse_config, render_config};
use visflock_cli::heatmap::{emit_heatmap, Metric};
use visflock_cli::io::{read_scene, read_trajectory, write_trajectory, TrajectoryFormat};
use visflock_cli::sweep::{
    read_aggregate_csv, sweep, write_aggregate_csv, write_detail_csv, AggregateRow, SweepSpec,
};
use visflock_core::metrics::WindowSummary;
use visflock_core::{build_vpf, run, SimConfig};

#[derive(Parser)]
#[command(name = "visflock", version, about = "Vision-based flocking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// KEY=VALUE configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides SEED from the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Trailing fraction of the run used for summaries.
    #[arg(long, default_value_t = 0.25)]
    window: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its trajectory and metrics.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "csv")]
        format: TrajectoryFormat,
    },
    /// Run a parameter grid and write detail and aggregate tables plus heatmaps.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parallel runs; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, value_delimiter = ',')]
        alpha0: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        beta0: Option<Vec<f64>>,
        /// FOV as fractions of the full circle.
        #[arg(long, value_delimiter = ',')]
        fov: Option<Vec<f64>>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Compute metrics for a trajectory file (CSV or binary).
    Analyze {
        trajectory: PathBuf,
        #[command(flatten)]
        common: Common,
        /// File of step values to leave out of the summary.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Clustering dissimilarity: sim or robot.
        #[arg(long, default_value = "sim")]
        cluster: ClusterMode,
    },
    /// Print the visual field of one agent in a scene file (x,y,psi[,v]).
    Vpf {
        scene: PathBuf,
        #[arg(long, default_value_t = 0)]
        agent: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render one heatmap from an aggregate table.
    Plot {
        aggregate: PathBuf,
        #[arg(long, default_value = "P")]
        metric: String,
        /// FOV panel to draw; required when the table has several.
        #[arg(long)]
        fov: Option<f64>,
        /// Group size, for the N_clus_max color scale.
        #[arg(long, default_value_t = 10)]
        n_agents: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<SimConfig> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_config(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => SimConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_summary(path: &Path, summary: &WindowSummary) -> Result<()> {
    let mut json = serde_json::to_string_pretty(summary)?;
    json.push('\n');
    fs::write(path, json).with_context(|| format!("writing {}", path.display()))
}

fn check_window(window: f64) -> Result<()> {
    if !(window > 0.0 && window <= 1.0) {
        bail!("--window must lie in (0, 1], got {window}");
    }
    Ok(())
}

fn fov_tag(fov: f64) -> String {
    format!("{}", (fov * 100.0).round())
}

fn cmd_run(common: Common, format: TrajectoryFormat) -> Result<()> {
    check_window(common.window)?;
    let config = load_config(common.config.as_deref(), common.seed)?;
    fs::create_dir_all(&common.out)?;
    let trajectory = run(&config)?;
    let traj_path = common.out.join(format!("trajectory.{}", format.extension()));
    write_trajectory(&trajectory, format, create(&traj_path)?)?;
    let a = analyze(
        &trajectory,
        &config.arena,
        config.params.radius,
        common.window,
        ClusterMode::Sim,
        None,
    );
    write_metrics_csv(&a.records, create(&common.out.join("metrics.csv"))?)?;
    write_summary(&common.out.join("summary.json"), &a.summary)?;
    fs::write(common.out.join("config.txt"), render_config(&config))?;
    eprintln!(
        "{} records written to {}",
        trajectory.records.len(),
        common.out.display()
    );
    Ok(())
}

fn cmd_sweep(
    common: Common,
    workers: usize,
    alpha0: Option<Vec<f64>>,
    beta0: Option<Vec<f64>>,
    fov: Option<Vec<f64>>,
    reps: Option<usize>,
) -> Result<()> {
    let base = load_config(common.config.as_deref(), common.seed)?;
    let mut spec = SweepSpec::new(base);
    spec.window = common.window;
    if let Some(v) = alpha0 {
        spec.alpha0_values = v;
    }
    if let Some(v) = beta0 {
        spec.beta0_values = v;
    }
    if let Some(v) = fov {
        spec.fov_fractions = v;
    }
    if let Some(r) = reps {
        spec.repetitions = r;
    }
    fs::create_dir_all(&common.out)?;
    let result = sweep(&spec, workers)?;
    write_detail_csv(&result.runs, create(&common.out.join("sweep_detail.csv"))?)?;
    write_aggregate_csv(&result.cells, create(&common.out.join("sweep_aggregate.csv"))?)?;
    let rows: Vec<AggregateRow> = result.cells.iter().map(AggregateRow::from).collect();
    for &f in &spec.fov_fractions {
        let panel: Vec<AggregateRow> = rows.iter().filter(|r| r.fov == f).cloned().collect();
        for metric in Metric::ALL {
            let svg = emit_heatmap(&panel, metric, base.n_agents)?;
            let name = format!("heatmap_{}_fov{}.svg", metric.name(), fov_tag(f));
            fs::write(common.out.join(name), svg)?;
        }
    }
    let failed: usize = result.cells.iter().map(|c| c.reps_failed).sum();
    if failed > 0 {
        eprintln!("warning: {failed} runs failed; see sweep_detail.csv");
    }
    eprintln!("{} runs written to {}", result.runs.len(), common.out.display());
    Ok(())
}

fn cmd_analyze(
    trajectory: PathBuf,
    common: Common,
    mask: Option<PathBuf>,
    cluster: ClusterMode,
) -> Result<()> {
    check_window(common.window)?;
    let config = load_config(common.config.as_deref(), common.seed)?;
    let bytes = fs::read(&trajectory).with_context(|| format!("reading {}", trajectory.display()))?;
    let traj = read_trajectory(&bytes).with_context(|| format!("in {}", trajectory.display()))?;
    let excluded = match mask {
        Some(p) => {
            let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            Some(parse_step_mask(&text).map_err(anyhow::Error::msg)?)
        }
        None => None,
    };
    fs::create_dir_all(&common.out)?;
    let a = analyze(
        &traj,
        &config.arena,
        config.params.radius,
        common.window,
        cluster,
        excluded.as_ref(),
    );
    write_metrics_csv(&a.records, create(&common.out.join("metrics.csv"))?)?;
    write_summary(&common.out.join("summary.json"), &a.summary)?;
    Ok(())
}

fn cmd_vpf(scene: PathBuf, agent: usize, config: Option<PathBuf>, out: Option<PathBuf>) -> Result<()> {
    let config = load_config(config.as_deref(), None)?;
    let file = fs::File::open(&scene).with_context(|| format!("opening {}", scene.display()))?;
    let states = read_scene(file, config.params.v0)?;
    if agent >= states.len() {
        bail!("--agent {agent} out of range: scene has {} agents", states.len());
    }
    let field = build_vpf(agent, &states, &config.arena, &config.params)?;
    let dump = field.to_dump();
    match out {
        Some(p) => fs::write(&p, dump).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{dump}"),
    }
    Ok(())
}

fn cmd_plot(aggregate: PathBuf, metric: String, fov: Option<f64>, n_agents: usize, out: PathBuf) -> Result<()> {
    let metric: Metric = metric.parse()?;
    let file = fs::File::open(&aggregate).with_context(|| format!("opening {}", aggregate.display()))?;
    let rows = read_aggregate_csv(file)?;
    let mut fovs: Vec<f64> = rows.iter().map(|r| r.fov).collect();
    fovs.sort_by(f64::total_cmp);
    fovs.dedup();
    let fov = match (fov, fovs.as_slice()) {
        (Some(f), _) => f,
        (None, [only]) => *only,
        (None, []) => bail!("{} has no rows", aggregate.display()),
        (None, _) => bail!("table holds several FOVs {fovs:?}; pick one with --fov"),
    };
    let panel: Vec<AggregateRow> = rows.into_iter().filter(|r| r.fov == fov).collect();
    let svg = emit_heatmap(&panel, metric, n_agents)?;
    fs::write(&out, svg).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { common, format } => cmd_run(common, format),
        Command::Sweep {
            common,
            workers,
            alpha0,
            beta0,
            fov,
            reps,
        } => cmd_sweep(common, workers, alpha0, beta0, fov, reps),
        Command::Analyze {
            trajectory,
            common,
            mask,
            cluster,
        } => cmd_analyze(trajectory, common, mask, cluster),
        Command::Vpf {
            scene,
            agent,
            config,
            out,
        } => cmd_vpf(scene, agent, config, out),
        Command::Plot {
            aggregate,
            metric,
            fov,
            n_agents,
            out,
        } => cmd_plot(aggregate, metric, fov, n_agents, out),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
