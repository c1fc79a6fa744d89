//! `superscroll`: run, track, slice, flow and fit.
//!
//! Exit codes: 0 success (including a physical collapse in `flow`),
//! 2 configuration or input error, 3 numerical divergence, 4 analysis
//! rejection.

mod config;
mod error;
mod fit;
mod flow;
mod run;
mod slice;
mod track;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use superscroll::flow::CollapseGeometry;
use superscroll::{EvolveOptions, Target, TensionParams, Thresholds};

use error::{CliError, CliResult};

pub const WORKERS_ENV: &str = "XMED_WORKERS";

#[derive(Parser)]
#[command(
    name = "superscroll",
    version,
    about = "Excitable-media simulation, filament tracking and curvature flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a JSON config and/or a preset.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// SIM1..SIM4 (shorthand for `--set preset.name=...`).
        #[arg(long)]
        preset: Option<String>,
        /// full or desk.
        #[arg(long)]
        scale: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: config, then $XMED_WORKERS, then 1).
        #[arg(long)]
        workers: Option<usize>,
        /// Continue from a snapshot or checkpoint of the same run.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Dotted-key override, e.g. `--set params.epsilon=0.25`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Track phase singularities in snapshots (paths or glob patterns).
    Track {
        #[arg(required = true)]
        inputs: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        u0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        v0: f64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Dump a coordinate plane of a snapshot as a CSV table.
    Slice {
        input: PathBuf,
        /// Output file, or directory with --all-planes.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Field::U)]
        field: Field,
        /// Plane axes, e.g. `0,1`.
        #[arg(long, value_parser = parse_axes, default_value = "0,1")]
        axes: (usize, usize),
        /// Node indices of the other axes, in increasing axis order.
        #[arg(long, value_delimiter = ',')]
        fixed: Option<Vec<usize>>,
        /// Write every coordinate plane through the node `--at`.
        #[arg(long)]
        all_planes: bool,
        /// Node indices on all axes for --all-planes (default: center).
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<usize>>,
    },
    /// Evolve an XMESH complex under the curvature flow.
    Flow {
        mesh: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        gamma1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        gamma2: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        sample_every: usize,
        #[arg(long, default_value_t = 10)]
        remesh_every: usize,
        #[arg(long)]
        no_remesh: bool,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        rotation_sign: f64,
    },
    /// Fit tensions from a `t,R[,z]` CSV.
    Fit {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Geometry::Ring)]
        geometry: Geometry,
        /// Also write the fit as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Field {
    U,
    V,
}

#[derive(Clone, Copy, ValueEnum)]
enum Geometry {
    Ring,
    Sphere,
}

fn parse_axes(s: &str) -> Result<(usize, usize), String> {
    let (p, q) = s.split_once(',').ok_or("expected two axes, e.g. 0,1")?;
    let axis = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad axis {x:?}: {e}"))
    };
    Ok((axis(p)?, axis(q)?))
}

pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1)
}

pub fn worker_pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))
}

pub fn versions() -> Value {
    json!({
        "superscroll": superscroll::VERSION,
        "cli": env!("CARGO_PKG_VERSION"),
        "snapshot_format": superscroll::engine::snapshot::VERSION,
    })
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run {
            config,
            preset,
            scale,
            out,
            workers,
            resume,
            set,
        } => run::cmd_run(run::RunArgs {
            config,
            preset,
            scale,
            out,
            workers,
            resume,
            set,
        }),
        Command::Track {
            inputs,
            out,
            u0,
            v0,
            workers,
        } => track::cmd_track(
            &inputs,
            &out,
            Thresholds { u0, v0 },
            workers.unwrap_or_else(default_workers),
        ),
        Command::Slice {
            input,
            out,
            field,
            axes,
            fixed,
            all_planes,
            at,
        } => {
            let target = match field {
                Field::U => Target::U,
                Field::V => Target::V,
            };
            if all_planes {
                slice::cmd_slice_all(&input, &out, target, at)
            } else {
                slice::cmd_slice(&input, &out, target, axes, fixed)
            }
        }
        Command::Flow {
            mesh,
            out,
            gamma1,
            gamma2,
            dt,
            steps,
            sample_every,
            remesh_every,
            no_remesh,
            rotation_sign,
        } => flow::cmd_flow(
            &mesh,
            &out,
            &flow::FlowArgs {
                tension: TensionParams::new(gamma1, gamma2),
                dt,
                steps,
                options: EvolveOptions {
                    remesh_every: (!no_remesh).then_some(remesh_every),
                    sample_every,
                    rotation_sign,
                },
            },
        ),
        Command::Fit {
            input,
            geometry,
            out,
        } => {
            let geometry = match geometry {
                Geometry::Ring => CollapseGeometry::Ring,
                Geometry::Sphere => CollapseGeometry::Sphere,
            };
            fit::cmd_fit(&input, geometry, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                error::EXIT_CONFIG
            } else {
                0
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
