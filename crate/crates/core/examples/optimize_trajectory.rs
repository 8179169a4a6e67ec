//! Search a route on an extracted scene and optimize the trajectory along it,
//! printing the augmented-Lagrangian progress.
//!
//! `cargo run --release --example optimize_trajectory -- multilayer`

use planeway::config::RunConfig;
use planeway::extraction::extract_traversable_planes;
use planeway::graph::{build_graph, search_path};
use planeway::optimizer::{solve, Problem};
use planeway::scenes::{generate, SceneSpec};

fn main() -> planeway::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "multilayer".into());
    let config = RunConfig::default();
    let scene = generate(&SceneSpec::new(&name, 7))?;
    let planes = extract_traversable_planes(&scene.cloud, &config)?;
    let graph = build_graph(&planes, config.robot.d_s);
    let gt = &scene.ground_truth;
    let path = search_path(&graph, &planes, &gt.start, &gt.goal, config.graph.projection_max_dist, config.robot.d_s)?;
    let (problem, init) = Problem::from_path(&planes, &path, &config.robot, &config.optimizer)?;
    println!("planes {:?}, {} segments, {} variables", path.planes, problem.segment_count(), problem.dimension());

    let started = std::time::Instant::now();
    let sol = solve(&problem, &init)?;
    for l in &sol.log {
        println!(
            "  round {} outer {:2}: rho {:9.1}  inner {:3} its ({:?})  objective {:9.3}  final error {:.2e} m",
            l.round, l.outer, l.rho, l.inner.iterations, l.inner.status, l.objective, l.max_final_error
        );
    }
    println!(
        "{:?} in {:.0} ms: duration {:.2} s, final error {:.4} m, worst residual {:.2e}",
        sol.status,
        started.elapsed().as_secs_f64() * 1e3,
        sol.trajectory.duration(),
        sol.final_error(),
        sol.residuals.max()
    );
    Ok(())
}
