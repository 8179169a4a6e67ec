//! Build the plane graph of a bundled scene and search a route between its
//! suggested start and goal.
//!
//! `cargo run --release --example plan_route -- platform`

use planeway::config::RunConfig;
use planeway::extraction::extract_traversable_planes;
use planeway::graph::{build_graph, search_path};
use planeway::scenes::{generate, SceneSpec};

fn main() -> planeway::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "platform".into());
    let config = RunConfig::default();
    let scene = generate(&SceneSpec::new(&name, 7))?;
    let planes = extract_traversable_planes(&scene.cloud, &config)?;

    let t0 = std::time::Instant::now();
    let graph = build_graph(&planes, config.robot.d_s);
    println!("graph: {} vertices, {} edges in {:.1} ms", graph.vertices.len(), graph.edges.len(), t0.elapsed().as_secs_f64() * 1e3);
    for (k, v) in graph.vertices.iter().enumerate() {
        println!("  v{k} planes {:?} at ({:.2}, {:.2}, {:.2}) param {:.3}", v.plane_pair, v.world_point.x, v.world_point.y, v.world_point.z, v.line_param);
    }

    let gt = &scene.ground_truth;
    let t1 = std::time::Instant::now();
    let path = search_path(&graph, &planes, &gt.start, &gt.goal, config.graph.projection_max_dist, config.robot.d_s)?;
    println!("route over planes {:?}, cost {:.3} m, found in {:.1} ms", path.planes, path.cost, t1.elapsed().as_secs_f64() * 1e3);
    for c in &path.crossings {
        println!("  cross {} -> {} at ({:.2}, {:.2}, {:.2})", c.from, c.to, c.world_point.x, c.world_point.y, c.world_point.z);
    }
    Ok(())
}
