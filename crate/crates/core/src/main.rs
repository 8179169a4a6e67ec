use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use planeway::geometry::Vec3;
use planeway::pipeline::{self, StageLog};
use planeway::scenes::SCENE_NAMES;

#[derive(Parser)]
#[command(name = "planeway", version, about = "Traversable-plane extraction and cross-plane trajectory planning")]
struct Cli {
    /// RunConfig JSON; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Suppress the stderr stage log.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

fn point(s: &str) -> Result<Vec3, String> {
    pipeline::parse_point(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic scene cloud (PLY) and its ground truth (JSON).
    GenScene {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SCENE_NAMES))]
        name: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract traversable planes, grids and distance fields from a cloud.
    Extract {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search a route and optimize a trajectory between two points.
    Plan {
        #[arg(long)]
        planes: PathBuf,
        #[arg(long, value_parser = point, allow_hyphen_values = true)]
        start: Vec3,
        #[arg(long, value_parser = point, allow_hyphen_values = true)]
        goal: Vec3,
        /// Output directory for trajectory.json, trajectory.csv and report.json.
        #[arg(long)]
        out: PathBuf,
        /// Graph cache: loaded when present, written otherwise.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Check a trajectory against the constraints at the verification rate.
    Eval {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        planes: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write planes, intersection lines, graph and trajectory as one PLY.
    ExportViz {
        #[arg(long)]
        planes: PathBuf,
        #[arg(long)]
        traj: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// gen-scene, extract, plan, eval and export-viz for one scene.
    Run {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SCENE_NAMES))]
        name: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn print_json<T: serde::Serialize>(value: &T) -> planeway::Result<()> {
    print!("{}", planeway::artifacts::to_canonical_json(value)?);
    Ok(())
}

fn execute(cli: Cli) -> planeway::Result<()> {
    let config = pipeline::load_config(cli.config.as_deref())?;
    let log = if cli.quiet { StageLog::silent() } else { StageLog::stderr() };
    match cli.command {
        Command::GenScene { name, seed, out } => {
            let files = pipeline::cmd_gen_scene(&name, seed, &out, log)?;
            println!("{}\n{}", files.cloud.display(), files.truth.display());
        }
        Command::Extract { cloud, out } => {
            let planes = pipeline::cmd_extract(&cloud, &config, &out, log)?;
            println!("{} traversable planes -> {}", planes.len(), out.display());
        }
        Command::Plan { planes, start, goal, out, graph } => {
            let report = pipeline::cmd_plan(&planes, &start, &goal, &out, graph.as_deref(), &config, log)?;
            println!(
                "status {:?}, final error {:.4} m, length {:.3} m (graph {:.3} m), search {:.1} ms, optimize {:.1} ms",
                report.status, report.final_error_m, report.traj_length_m, report.graph_cost_m, report.path_search_ms, report.optimize_ms
            );
        }
        Command::Eval { traj, planes, out } => {
            let report = pipeline::cmd_eval(&traj, &planes, &config, out.as_deref(), log)?;
            print_json(&report)?;
        }
        Command::ExportViz { planes, traj, graph, out } => {
            let mesh = pipeline::cmd_export_viz(traj.as_deref(), &planes, graph.as_deref(), &config, &out, log)?;
            println!("{} vertices, {} faces, {} edges -> {}", mesh.vertices.len(), mesh.faces.len(), mesh.edges.len(), out.display());
        }
        Command::Run { name, seed, out } => {
            let summary = pipeline::cmd_run(&name, seed, &out, &config, log)?;
            println!(
                "{}: {} planes, final error {:.4} m, optimize {:.1} ms, eval {}",
                summary.scene,
                summary.planes,
                summary.plan.final_error_m,
                summary.plan.optimize_ms,
                if summary.eval.ok { "ok".to_string() } else { summary.eval.violations.join("; ") }
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("PLANEWAY_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
