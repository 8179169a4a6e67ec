//! Generate a bundled scene, extract its traversable planes and print them.
//!
//! `cargo run --example extract_planes -- multilayer`

use planeway::config::RunConfig;
use planeway::extraction::extract_traversable_planes;
use planeway::scenes::{generate, SceneSpec};

fn main() -> planeway::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "planes".into());
    let seed = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(7);
    let scene = generate(&SceneSpec::new(&name, seed))?;
    println!("{name}: {} points", scene.cloud.len());
    let started = std::time::Instant::now();
    let planes = extract_traversable_planes(&scene.cloud, &RunConfig::default())?;
    println!("extracted {} traversable planes in {:.0} ms", planes.len(), started.elapsed().as_secs_f64() * 1e3);
    for (i, p) in planes.iter().enumerate() {
        let c = p.transform.translation;
        let gt = scene.ground_truth.surface_at(&c).map(|w| w.label.as_str()).unwrap_or("-");
        let links: Vec<usize> = p.neighbors.iter().map(|n| n.plane).collect();
        println!(
            "  #{i} {:?} psi={:5.1} deg  centroid=({:.2}, {:.2}, {:.2})  points={}  grid={}x{}  gt={gt}  neighbors={links:?}",
            p.kind,
            p.inclination.to_degrees(),
            c.x,
            c.y,
            c.z,
            p.point_count,
            p.grid.width,
            p.grid.height,
        );
    }
    Ok(())
}
