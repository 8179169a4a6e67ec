//! Run the whole pipeline on a scene and write planes, crossings, graph edges
//! and the trajectory into one PLY for a mesh viewer.
//!
//! `cargo run --release --example export_viz -- building /tmp/building.ply`

use std::path::PathBuf;

use planeway::config::RunConfig;
use planeway::extraction::extract_traversable_planes;
use planeway::io::write_text;
use planeway::pipeline::{plan, viz_mesh, StageLog};
use planeway::scenes::{generate, SceneSpec};

fn main() -> planeway::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "building".into());
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join(format!("{name}_viz.ply")));
    let config = RunConfig::default();
    let scene = generate(&SceneSpec::new(&name, 7))?;
    let planes = extract_traversable_planes(&scene.cloud, &config)?;
    let gt = &scene.ground_truth;
    let outcome = plan(&planes, &gt.start, &gt.goal, &config, None, StageLog::stderr())?;
    let mesh = viz_mesh(&planes, &outcome.graph, Some(&outcome.solution.trajectory))?;
    write_text(&out, &mesh.to_ply())?;
    println!("{} vertices, {} faces, {} edges -> {}", mesh.vertices.len(), mesh.faces.len(), mesh.edges.len(), out.display());
    Ok(())
}
