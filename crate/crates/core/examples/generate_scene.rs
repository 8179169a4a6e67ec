//! Sample one of the bundled synthetic scenes and write it as an ASCII PLY.
//!
//! `cargo run --example generate_scene -- building 3`

use planeway::io::{cloud_to_ply, write_text};
use planeway::scenes::{generate, SceneSpec};

fn main() -> planeway::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "multilayer".into());
    let seed = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(7);
    let scene = generate(&SceneSpec::new(&name, seed))?;
    let gt = &scene.ground_truth;
    println!("{name} (seed {seed}): {} points on {} surfaces", scene.cloud.len(), scene.surfaces.len());
    for w in &gt.walkable {
        println!("  walkable {}", w.label);
    }
    for (a, b) in &gt.adjacency {
        println!("  {a} <-> {b}");
    }
    println!("start {:?}\ngoal  {:?}", gt.start.as_slice(), gt.goal.as_slice());
    let out = std::env::temp_dir().join(format!("{name}_{seed}.ply"));
    write_text(&out, &cloud_to_ply(&scene.cloud))?;
    println!("wrote {}", out.display());
    Ok(())
}
